import pytest

from logdepth import idefs as I
from logdepth import plof as P
from logdepth import sigma as S
from logdepth.sigma import C, IdAtom, V


def const_spec(ell=2, name="A"):
    return I.IdSpec(name, ("x",), "p", S.norm(ell), S.TOP, (), P.And(P.Var(0), P.Var(1)))


def test_constant_true_tree():
    A = const_spec()
    for x in range(20):
        assert I.eval_id(A, (x,), 1)


def test_domain_law():
    A = const_spec(ell=1)
    for x in (0, 1, 5, 300):
        L = A.bound((x,))
        for p in range(0, 1 << (L + 2)):
            ok = 0 < p.bit_length() <= L
            if ok:
                I.eval_id(A, (x,), p)
            else:
                with pytest.raises(I.ClockError):
                    I.eval_id(A, (x,), p)


def test_table_fill(rng):
    for _ in range(20):
        A = I.random_spec(rng, ell=4)
        for x in (0, 3, 77):
            tab = I.table_fill(A, (x,))
            assert len(tab) == 2 ** A.bound((x,)) - 1
            assert all(I.eval_id(A, (x,), p) == v for p, v in tab.items())


def test_trace_records_nodes():
    A = const_spec(ell=1)
    trace = []
    I.eval_id(A, (1,), 1, trace=trace)
    assert trace


def test_gate_atom_range():
    with pytest.raises(I.IdError):
        I.IdSpec("A", ("x",), "p", S.norm(1), S.TOP, (), P.Var(5))
    with pytest.raises(I.IdError):
        I.IdSpec("A", ("p",), "p", S.norm(1), S.TOP, (), P.Var(0))


def test_quad_all_true():
    gate = P.And(P.And(P.Var(0), P.Var(1)), P.And(P.Var(2), P.Var(3)))
    q = I.QuadIdSpec("Q", ("x",), "p", S.norm(1), S.TOP, (), gate)
    R = I.reduce_quad(q)
    for x in range(6):
        L = q.bound((x,))
        for p in range(1, 1 << L):
            if p.bit_length() % 2:
                assert I.eval_id(R, (x,), I.quad_embed(p))


def test_quad_random(rng):
    for _ in range(8):
        q = I.random_quad(rng, ell=1)
        R = I.reduce_quad(q)
        for x in range(4):
            L = q.bound((x,))
            for p in range(1, 1 << L):
                if p.bit_length() % 2:
                    assert I.eval_quad(q, (x,), p) == I.eval_id(R, (x,), I.quad_embed(p))


def test_quad_embed():
    assert I.quad_embed(1) == 1
    assert I.quad_embed(0b110) == 0b1000010
    assert I.quad_embed(0b11001) == (0b1000010 << 6) | 0b000001


def test_flatten_constant_inner():
    inner = const_spec(ell=2, name="N")
    atom = IdAtom(inner, (V("x"),), I.fn("half", V("p")))
    outer = I.IdSpec("A", ("x",), "p", S.norm(2), atom, (), P.Or(P.Var(0), P.Var(1)))
    F = I.flatten_iterated(outer)
    assert not I.has_id(F.terminal)
    for x in range(5):
        for q in range(1, 1 << outer.bound((x,))):
            assert I.eval_id(F, (x,), F.clock_of(q)) == I.eval_id(outer, (x,), q)


def test_flatten_random(rng):
    for t in range(6):
        A = I.random_nested(rng, ell_outer=2, ell_inner=2, nested_params=t % 3)
        F = I.flatten_iterated(A)
        for x in range(4):
            for q in range(1, 1 << A.bound((x,))):
                assert I.eval_id(F, (x,), F.clock_of(q)) == I.eval_id(A, (x,), q)


def test_flatten_marker_route(rng):
    # a parameter with a nested atom goes through the marker quadtree
    inner = I.random_spec(rng, ell=2, m=1, name="N")
    d = S.Or((IdAtom(inner, (V("x"),), V("p")), S.BitAtom(C(0), V("x"))))
    A = I.IdSpec("A", ("x",), "p", S.norm(2), S.BitAtom(C(1), V("x")), (d,), P.Xor(P.Var(0), P.Var(1)))
    mq = I.marker_quad(A, [0])
    cases = {I.marker_case(mq, p)[0] for p in range(1, 1 << mq.bound((3,))) if p.bit_length() == mq.bound((3,))}
    assert {"B", "D0"} <= cases or {"B", "D1"} <= cases
    F = I.flatten_iterated(A)
    assert F.spread == 6
    for x in range(4):
        for q in range(1, 1 << A.bound((x,))):
            assert I.eval_id(F, (x,), F.clock_of(q)) == I.eval_id(A, (x,), q)


def test_flatten_cycle():
    A = const_spec(name="A")
    B = const_spec(name="B")
    A.terminal = IdAtom(B, (V("x"),), V("p"))
    B.terminal = IdAtom(A, (V("x"),), V("p"))
    with pytest.raises(I.CycleError):
        I.flatten_iterated(A)


def test_sim_k0_and_random(rng):
    for K in (0, 1, 2):
        s = I.random_sim(rng, ell=2, K=K, top=3)
        R = I.reduce_sim(s)
        for x in range(3):
            for lam in range(4):
                for q in range(1, 4):
                    offs = [rng.randrange(K + 1) for _ in range(q.bit_length() - 1)]
                    want = I.eval_sim(s, (x,), lam + sum(offs), q)
                    assert I.eval_id(R, (x, lam), I.sim_clock(R, q, offs)) == want


def test_vector_sum_examples(rng):
    zero = I.BitPredicate(lambda j, i, ys: False, 3)
    assert I.vector_sum(zero, 12345) == 0
    one = I.BitPredicate(lambda j, i, ys: j == 0, 1)
    assert I.vector_sum(one, 0b100000) == 6
    for _ in range(100):
        w = rng.randrange(1, 7)
        table = [rng.getrandbits(w) for _ in range(64)]
        f = I.BitPredicate(lambda j, i, ys, t=table: bool((t[i] >> j) & 1), w)
        x = rng.getrandbits(rng.randrange(1, 64)) | 1
        g = I.vector_sum(f, x)
        assert g == sum(table[:x.bit_length()])
        assert g == I.vector_sum(f, x >> 1) + table[x.bit_length() - 1]


def test_vector_sum_overflow():
    f = I.BitPredicate(lambda j, i, ys: True, 8)
    with pytest.raises(I.VectorSumOverflow):
        I.vector_sum(f, 7, H=3)


def test_vector_sum_from_formula():
    # f(i, y) = the two-bit chunk i of y
    phi = S.And((S.lt(V("j"), 2), S.BitAtom(S.lin(i=2, j=1), V("y"))))
    f = I.BitPredicate.from_formula(phi, 2, word_vars=("y",))
    y = 0b11100100
    assert I.vector_sum(f, 0b1111, (y,)) == 0 + 1 + 2 + 3


def test_count_examples():
    assert I.count_bits(lambda i: True, 0) == 0
    phi = S.BitAtom(V("i"), C(53))
    assert I.count_bits(phi, 0b111111) == 4
    for x in range(1, 200):
        assert I.count_bits(lambda i: True, x) <= x.bit_length()
    u = I.count_witness(53)(4)
    assert I.check_count_witness(53, 4, u)
    assert I.at_least(53, 4) and not I.at_least(53, 5)
    assert not I.check_count_witness(53, 4, u ^ 2)


def test_carry_save_spec(rng):
    w = 2
    phi = S.And((S.lt(V("j"), w), S.BitAtom(S.lin(i=w, j=1), V("y"))))
    f = I.BitPredicate.from_formula(phi, w, word_vars=("y",))
    for _ in range(20):
        x = rng.randrange(1, 16)
        y = rng.getrandbits(16)
        H = w + x.bit_length().bit_length() + 1
        cs = I.carry_save_spec(f, H)
        direct = sum(f.value(i, (y,)) for i in range(x.bit_length()))
        assert I.sum_from_root(lambda L: I.eval_sim(cs, (x, y), L, 1), H) == direct


def test_tree_examples():
    assert I.tree_fn(5) == 1
    assert I.and_fn(0b11111) == 0b111
    assert I.or_fn(0b111) == 0b11
    assert I.tree_fn(31) == 1
    for x in range(16):
        assert I.tree_fn(x) == x & 1


def test_tree_predicate(rng):
    assert I.tree_predicate(5, 1)
    for _ in range(1000):
        x = rng.getrandbits(rng.randrange(2, 40)) | 2
        assert I.tree_predicate(x, 1) == bool(I.tree_fn(x))


def test_log4_exponent():
    for x in range(2, 5000):
        e = 0
        while 4 ** (e + 1) <= x.bit_length() - 1:
            e += 1
        assert I.log4_exponent(x) == e
    # |x| a power of two takes the other branch
    assert I.log4_exponent(1 << 15) == 1  # |x| = 16, log4(15) < 2


def test_subtree_recursion(rng):
    for m in (1, 2):
        for _ in range(10):
            y = rng.getrandbits(1 << (4 * m))
            z = (1 << (1 << (4 * m))) + y
            sub = 1 << (4 * (m - 1))
            y0 = 0
            for k in range(16):
                zk = (1 << sub) + ((y >> (sub * k)) & ((1 << sub) - 1))
                y0 |= I.tree_fn(zk) << k
            assert I.tree_fn(z) == I.or_fn(I.and_fn(I.or_fn(I.and_fn((1 << 16) + y0)))) & 1


def test_gadget(rng):
    for _ in range(30):
        A = I.random_spec(rng, ell=3)
        x = rng.getrandbits(5)
        for p in range(1, 8):
            v = I.eval_id(A, (x,), p)
            g1 = I.compile_tree_gadget(A, (x,), p, 1)
            g0 = I.compile_tree_gadget(A, (x,), p, 0)
            assert bool(I.tree_fn(g1)) == v
            assert I.tree_fn(g1) ^ I.tree_fn(g0) == 1
            if p.bit_length() == 3:
                assert g1 == 2 + int(v)  # a leaf gadget is the single bit
            for q in rng.sample(range(g1.bit_length() - 1), min(20, g1.bit_length() - 1)):
                assert (g1 >> q) & 1 == I.gadget_bit(A, (x,), p, 1, q)


def test_gadget_budget():
    A = const_spec(ell=5)
    with pytest.raises(I.BudgetError):
        I.compile_tree_gadget(A, (1,), 1, 1, bit_budget=1 << 10)


def test_spec_text_round_trip(rng):
    specs = [I.random_spec(rng, ell=3), I.random_quad(rng), I.random_sim(rng, K=2)]
    text = I.format_specs(specs)
    back = I.parse_specs(text)
    assert I.format_specs(back.values()) == text
    for a, b in zip(specs, back.values()):
        if isinstance(a, I.SimIdSpec):
            assert I.eval_sim(a, (3,), 1, 2) == I.eval_sim(b, (3,), 1, 2)
        elif isinstance(a, I.QuadIdSpec):
            assert I.eval_quad(a, (3,), 1) == I.eval_quad(b, (3,), 1)
        else:
            assert I.table_fill(a, (5,)) == I.table_fill(b, (5,))


def test_spec_text_nested(rng):
    A = I.random_nested(rng, 2, 2, 1)
    text = I.format_specs(I.nested_specs(A) + [A])
    B = I.parse_specs(text)[A.name]
    assert I.table_fill(A, (3,)) == I.table_fill(B, (3,))


@pytest.mark.parametrize("text", ["(frob)", "(idspec (name A))", "(idspec (name A) (vars x) (clock p) (ell 1) (terminal true) (gate (and d1 p0)))"])
def test_spec_text_errors(text):
    with pytest.raises((S.SigmaError, I.IdError)):
        I.parse_specs(text)
