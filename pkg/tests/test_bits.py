import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from logdepth import bits as B

nat = st.integers(min_value=0, max_value=(1 << 70))


def test_base_examples():
    assert B.part(53, 1, 4) == 2
    assert all(B.part(x, 5, 3) == 0 for x in range(200))
    assert B.half(1) == 0
    assert B.length(0) == 0
    assert B.monus(3, 7) == 0
    assert B.concat_word(5, 3) == 11


@given(nat.filter(lambda v: v > 0))
def test_concat_identities(x):
    assert B.concat_word(1, x) == x
    assert B.concat_word(x, 1) == x


def test_concat_rejects_zero():
    with pytest.raises(B.BaseFunctionError):
        B.concat_word(0, 3)


def test_eval_base_errors():
    with pytest.raises(B.BaseFunctionError):
        B.eval_base("nope", (1,))
    with pytest.raises(B.BaseFunctionError):
        B.eval_base("add", (1,))
    with pytest.raises(B.BaseFunctionError):
        B.eval_base("add", (1, -2))


@given(nat, nat)
def test_base_laws(x, y):
    assert B.length(B.smash(x, y)) == B.length(x) * B.length(y) + 1
    assert B.pad(x, y) == x * 2 ** B.length(y)
    assert B.monus(x, y) + min(x, y) == x
    assert B.eval_base("multi", (B.length(x), B.length(y), x, y)) == B.length(x) * B.length(y)


def test_add_bit_zero():
    c = B.blast_function("add", 0, [4, 4])
    assert c.eval((1, 1)) == [0]


def test_half_is_shift():
    for i in range(6):
        c = B.blast_function("half", i, [8])
        assert c.gates[c.outputs[0]] == ("in", (0, i + 1))


@pytest.mark.parametrize("fn,arity", [("add", 2), ("monus", 2), ("half", 1), ("pad", 2),
                                      ("smash", 2), ("length", 1)])
def test_blast_exhaustive_width4(fn, arity):
    c = B.blast_all(fn, [4] * arity)
    samples = list(itertools.product(range(16), repeat=arity))
    for s, out in zip(samples, c.eval_batch(samples)):
        assert B.from_bits(out) == B.eval_base(fn, s), (fn, s)


def test_blast_part_constant_and_variable():
    c = B.blast_all("part", [8], (2, 6))
    for x in range(256):
        assert B.from_bits(c.eval((x,))) == B.part(x, 2, 6)
    cv = B.blast_all("part", [6, 3, 3])
    for x, i, j in itertools.product(range(0, 64, 5), range(8), range(8)):
        assert B.from_bits(cv.eval((x, i, j))) == B.part(x, i, j)
    with pytest.raises(B.CircuitError):
        B.blast_all("part", [32, 32, 32])


def test_blast_monus_width64(rng):
    c = B.blast_all("monus", [64, 64])
    samples = [(rng.getrandbits(64), rng.getrandbits(64)) for _ in range(1000)]
    for s, out in zip(samples, c.eval_batch(samples)):
        assert B.from_bits(out) == B.monus(*s)


def test_compare(rng):
    eq = B.blast_compare("eq", [16, 16])
    lt = B.blast_compare("lt", [16, 16])
    for _ in range(100):
        x = rng.getrandbits(16)
        assert eq.eval((x, x)) == [1]
    assert lt.eval((0, 1)) == [1]
    pairs = [(rng.getrandbits(16), rng.getrandbits(16)) for _ in range(1000)]
    for (x, y), e, l in zip(pairs, eq.eval_batch(pairs), lt.eval_batch(pairs)):
        assert e == [int(x == y)] and l == [int(x < y)]
    with pytest.raises(B.CircuitError):
        B.blast_compare("gt", [4, 4])


def test_circuit_text_roundtrip():
    c = B.blast_all("add", [5, 3])
    d = B.Circuit.from_text(c.to_text())
    assert d.to_text() == c.to_text()
    for s in itertools.product(range(32), range(8)):
        assert d.eval(s) == c.eval(s)


@pytest.mark.parametrize("text", [
    "0 const 1\nout 0\n",
    "widths 2\n0 in 0 5\nout 0\n",
    "widths 2\n0 in 0 0\n1 and 0 2\nout 1\n",
    "widths 2\n1 in 0 0\nout 0\n",
    "widths 2\n0 nand 0\nout 0\n",
])
def test_circuit_text_rejects(text):
    with pytest.raises(B.CircuitError):
        B.Circuit.from_text(text)


def test_hash_consing():
    c = B.Circuit((2,))
    a = c.conj([c.inp(0, 0), c.inp(0, 1)])
    b = c.conj([c.inp(0, 1), c.inp(0, 0)])
    assert a == b
    assert c.neg(c.neg(a)) == a


@settings(max_examples=50)
@given(st.integers(1, 12), st.integers(1, 12), st.data())
def test_blast_add_random_widths(w1, w2, data):
    c = B.blast_all("add", [w1, w2])
    x = data.draw(st.integers(0, (1 << w1) - 1))
    y = data.draw(st.integers(0, (1 << w2) - 1))
    assert B.from_bits(c.eval((x, y))) == x + y
