import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from logdepth import sigma as S
from logdepth.sigma import BitAtom, C, Fn, IdAtom, V


def test_eval_examples():
    assert S.eval_sb0(S.lt(V("i"), S.length(V("x"))), {"i": 3, "x": 53})
    phi = S.exists_index("j", 4, BitAtom(V("j"), V("x")))
    assert S.eval_sb0(phi, {"x": 8})
    assert not S.eval_sb0(phi, {"x": 16})
    psi = S.forall_length("y", 0, S.le(S.length(V("y")), 0))
    assert S.eval_sb0(psi, {})
    assert S.eval_sb0(S.conj(), {})


def test_unbound_variable():
    with pytest.raises(S.UnboundVariable):
        S.eval_sb0(BitAtom(C(0), V("z")), {})


def test_enumeration_limit():
    phi = S.exists_index("i", V("x"), S.eq(V("i"), C(10 ** 9)))
    with pytest.raises(S.EnumerationLimit):
        S.eval_sb0(phi, {"x": 1 << 40})


def test_stratified_class():
    assert S.check_stratified(BitAtom(S.lin(1, i=2), V("x")), ["x"], ["i"])
    assert S.check_stratified(S.TOP, ["x"])

    class Dummy:
        name = "A"
        vars = ("x",)

    bad = IdAtom(Dummy(), (Fn("add", (V("x"), V("y"))),), V("p"))
    assert not S.check_stratified(bad, ["x", "y"], ["p"])


def test_translate_examples():
    s = S.translate_bool(BitAtom(C(0), V("x")), ["x"], [5])
    assert s.atoms() == {(1, 0)}
    s = S.translate_bool(BitAtom(C(5), V("x")), ["x"], [5])
    assert s.nodes[s.root] == ("const", False)
    s = S.translate_bool(S.le(3, 2), ["x"], [5])
    assert s.nodes[s.root] == ("const", False)


def test_valuation():
    v = S.valuation([5])
    assert v[(1, 0)] and not v[(1, 1)] and v[(1, 2)]
    assert not any(S.valuation([0]).values())


def test_translation_budget():
    lx = S.poly((1, {"x": 1}))
    pair = S.And((BitAtom(V("i"), V("x")), BitAtom(V("j"), V("x"))))
    phi = S.forall_index("i", lx, S.exists_index("j", lx, pair))
    with pytest.raises(S.NodeBudgetExceeded):
        S.translate_bool(phi, ["x"], [(1 << 40) - 1], budget=50)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2 ** 32), st.integers(0, 2 ** 32), st.integers(0, 1 << 30))
def test_translation_round_trip(x, y, seed):
    import random
    rng = random.Random(seed)
    phi = S.random_stratified(rng, ["x", "y"], depth=3, word_bias=0.5)
    xs = [x % (1 << 12), y % (1 << 12)]
    sent = S.translate_bool(phi, ["x", "y"], xs)
    assert sent.evaluate(S.valuation(xs)) == S.eval_sb0(phi, {"x": xs[0], "y": xs[1]})


def test_subst_set_example():
    phi = BitAtom(C(0), V("y"))
    s = S.SetTerm(C(4), "i", S.eq(V("i"), C(0)))
    out = S.subst_set(phi, "y", s)
    assert S.eval_sb0(out, {})


def test_subst_set_materialize(rng):
    for _ in range(300):
        bound = rng.randrange(0, 9)
        k = rng.randrange(1, 4)
        body = S.Or((BitAtom(V("i"), V("x")), S.eq(V("i"), C(k))))
        s = S.SetTerm(C(bound), "i", body)
        phi = S.random_stratified(rng, ["x", "y"], depth=2)
        x = rng.getrandbits(8)
        y = S.materialize(s, {"x": x})
        direct = S.eval_sb0(phi, {"x": x, "y": y})
        assert S.eval_sb0(S.subst_set(phi, "y", s), {"x": x}) == direct


def test_subst_set_empty_set_length():
    s = S.SetTerm(C(5), "i", S.BOT)
    out = S.subst_set(S.eq(S.length(V("y")), C(0)), "y", s)
    assert S.eval_sb0(out, {})


def test_subst_set_rejects_bare_use():
    s = S.SetTerm(C(3), "i", S.TOP)
    with pytest.raises(S.SubstitutionError):
        S.subst_set(S.eq(V("y"), C(0)), "y", s)


def test_subst_capture_rejected():
    phi = S.exists_index("i", 3, S.eq(V("i"), V("k")))
    assert S.eval_sb0(S.subst(phi, "k", C(2)), {})
    with pytest.raises(S.SubstitutionError):
        S.subst(phi, "k", V("i"))


def test_sexpr_round_trip(rng):
    for _ in range(200):
        phi = S.random_stratified(rng, ["x", "y"], depth=3)
        text = S.format_formula(phi)
        back = S.parse_formula(text)
        assert S.format_formula(back) == text
        env = {"x": rng.getrandbits(6), "y": rng.getrandbits(6)}
        assert S.eval_sb0(back, env) == S.eval_sb0(phi, env)


@pytest.mark.parametrize("text", ["(and", "(Bit 1)", "(frob x)", "(< 1 (nope 2))", "(id A (x) p)", "a b"])
def test_sexpr_errors(text):
    with pytest.raises(S.SigmaError):
        S.parse_formula(text)


def test_helper_functions():
    assert S.eval_term(S.fn("half", 7), {}) == 3
    assert S.eval_term(S.fn("len", 8), {}) == 4
    assert S.eval_term(S.norm(1, x=2), {"x": 5}) == 5  # 2 ||5|| + 1
    assert S.eval_term(S.lin(1, i=2), {"i": 5}) == 11
