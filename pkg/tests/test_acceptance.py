"""The ten acceptance properties at full corpus size, one line of output each."""
import pytest

from logdepth import acceptance

SEED = 0


@pytest.mark.parametrize("num,title,check", acceptance.CRITERIA, ids=[f"criterion_{c[0]:02d}" for c in acceptance.CRITERIA])
def test_criterion(num, title, check, capsys):
    r = check(SEED, 1.0)
    with capsys.disabled():
        print(f"\ncriterion {num:2d} {'PASS' if r.ok else 'FAIL'}  {title}: {r.detail}")
    assert r.ok, r.detail
