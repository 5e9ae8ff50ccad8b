import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from logdepth import fastplof as FP
from logdepth import plof as P

W = P.word_from_postfix_text


def test_parse_examples():
    assert P.parse_infix("(p0 ∧ p1)") == P.And(P.Var(0), P.Var(1))
    assert P.parse_infix("¬⊤") == P.Not(P.Top)
    with pytest.raises(P.ParseError) as e:
        P.parse_infix("(p0 ∧")
    assert e.value.offset == 5


def test_ascii_and_glyph_agree():
    assert P.parse_infix("(p0 & (p1 | ~p10)) -> p11") == P.parse_infix("(p0 ∧ (p1 ∨ ¬p10)) → p11")
    with pytest.raises(P.ParseError):
        P.parse_infix("p0 & p1 | p10")


def test_format_parse_round_trip(rng):
    for _ in range(300):
        f = P.random_formula(rng, rng.randrange(1, 30), 6)
        assert P.parse_infix(P.format_infix(f)) == f


def test_to_plof_examples():
    assert str(P.to_plof(P.And(P.Var(0), P.Var(1)))) == "p0 p1 ∧"
    assert str(P.to_plof(P.And(P.Var(0), P.Or(P.Var(1), P.Var(2))))) == "p1 p10 ∨ p0 ∧"


def test_to_plof_swaps_to_converse():
    f = P.Implies(P.Var(0), P.Or(P.Var(1), P.Var(2)))
    g = P.from_plof(P.to_plof(f))
    assert g == P.Bin(P.converse_table(11), P.Or(P.Var(1), P.Var(2)), P.Var(0))
    for bits in range(8):
        sigma = {v: bool((bits >> v) & 1) for v in range(3)}
        assert P.naive_eval(f, sigma) == P.naive_eval(g, sigma)


def test_to_plof_preserves_truth(rng):
    for _ in range(2000):
        f = P.random_formula(rng, rng.randrange(1, 40), 8)
        x = P.to_plof(f)
        assert P.is_plof(x)
        sigma = P.random_sigma(rng, 8)
        assert P.naive_eval(f, sigma) == P.naive_eval(x, sigma)


def test_postfix_recognition():
    assert not P.is_postfix_formula(W("∧ p0 p1"))
    assert not P.is_postfix_formula(P.SymbolWord(()))
    assert P.is_postfix_formula(W("p0 p1 ∧"))
    assert not P.is_plof(W("p0 p1 p10 ∧ ∨"))
    assert P.is_plof(W("p1 p10 ∧ p0 ∨"))


def test_hex_round_trip(rng):
    for _ in range(200):
        x = P.to_plof(P.random_formula(rng, rng.randrange(1, 50), 40))
        assert P.SymbolWord.from_hex(x.to_hex()) == x
    with pytest.raises(P.PlofError):
        P.SymbolWord.from_hex("xyz")
    with pytest.raises(P.PlofError):
        P.SymbolWord([0])


def test_tree_helpers():
    x = W("p0 p1 ∧")
    assert P.subformula_at(x, 3) == (1, 3)
    assert P.subformula_at(x, 2) == (2, 2)
    assert P.in_rel(x, 2, 2)
    assert P.lca(W("p0 p1 ∧ p10 ∨"), 1, 4) == 5


def test_schedule():
    assert P.delta(0) == 2
    assert [P.delta(u) for u in range(1, 5)] == [3, 4, 6, 9]
    for u in range(65):
        assert 2 ** (u + 2) * P.delta(u) < 3 ** (u + 2)
        assert P.delta(u + 1) == P.delta(u) + P.eps(u)
    with pytest.raises(P.PlofError):
        P.window_level(0, 5)


def test_int_k_widths(rng):
    for _ in range(200):
        u = rng.randrange(0, 12)
        m = rng.randrange(-20, 20)
        win = (m, m + P.delta(u + 1))
        pbar = [rng.randrange(1, 5) for _ in range(rng.randrange(0, u + 2))]
        lo, hi = P.int_k(win, pbar)
        assert hi - lo == P.delta(u + 1 - len(pbar))
    assert P.int_k((0, 9), []) == (0, 9)


def test_compose_identity():
    for t in [(a, b) for a in (False, True) for b in (False, True)]:
        assert P.compose(P.IDENTITY, t) == t


def test_breakpoints_single_atom():
    x = W("p0")
    assert P.breakpoint_1selected(x, (1, 1), (0, 2)) == 1


def test_value0_matches_naive(rng):
    for _ in range(300):
        x = P.to_plof(P.random_formula(rng, rng.randrange(1, 120), 6))
        sigma = P.random_sigma(rng, 6)
        n = x.logical_length()
        v = P.value_k(x, (1, n), P.canonical_window((1, n)), (), sigma)
        b = P.naive_eval(x, sigma)
        assert v == (b, b)
        assert P.true_plof(x, sigma) == b


def test_true_plof_examples():
    assert P.true_plof(W("p0 p1 ∧"), {0: True, 1: True})
    assert P.true_plof(W("⊤"), {})
    assert P.true_plof(W("p0 ¬"), {0: False})
    with pytest.raises(P.PlofError):
        P.true_plof(W("p0 ∧"), {})


def test_depth_bound(rng):
    for _ in range(100):
        x = P.to_plof(P.random_formula(rng, rng.randrange(1, 300), 6))
        stats = P.Stats()
        P.true_plof(x, P.random_sigma(rng, 6), stats=stats)
        assert stats.max_level <= P.recursion_bound(x.logical_length())


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 2000), st.integers(0, 2 ** 32))
def test_kernel_matches_reference(n, seed):
    rng = random.Random(seed)
    f = P.random_formula(rng, n, 10)
    x = P.to_plof(f)
    sigma = P.random_sigma(rng, 10)
    assert FP.true_plof(x, sigma) == P.naive_eval(f, sigma)


def test_kernel_windows(rng):
    FP.seed(7)
    for _ in range(200):
        n = rng.randrange(1, 3000)
        kind, data = FP.random_arrays(n, 12)
        sig = FP.sigma_array({v: rng.random() < 0.5 for v in range(12)}, 12)
        ref = FP.naive(kind, data, n, sig)
        u = P.least_u(n)
        for m, uu in ((0, u), (0, u + 2), (-3, P.least_u(n + 3))):
            assert FP.balanced(kind, data, n, sig, m, uu)[0] == ref


def test_taut_check():
    assert FP.taut_check(P.to_plof(P.parse_infix("p0 | ~p0")))
    assert not FP.taut_check(P.to_plof(P.parse_infix("p0")))
    assert FP.taut_check(P.to_plof(P.parse_infix("(p0 -> p1) -> (~p1 -> ~p0)")), algo="naive")
    mask, names = FP.falsifying_mask(P.to_plof(P.parse_infix("p0 -> p1")))
    assert mask == {0: True, 1: False}
    many = " & ".join(f"p{format(k, 'b')}" for k in range(25))
    with pytest.raises(FP.TooManyVariables):
        FP.taut_check(P.to_plof(P.parse_infix(many)))
