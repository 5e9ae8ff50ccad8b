"""Clocked inductive definitions over binary trees.

A definition ``A(x, p)`` is given by a terminal formula ``B``, parameter
formulas ``D_1..D_m`` and a propositional gate ``I(d, p0, p1)``.  For a clock
``p`` with ``0 < |p| <= ell(x)`` the value is ``B(x, p)`` at ``|p| = ell`` and
``I(D(x, p), A(x, 2p), A(x, 2p+1))`` above; outside that range it is false.

Also here: the quadtree, simultaneous and iterated forms with their
reductions to the plain form, carry-save vector summation and counting, and
the alternating and/or ``tree`` function with its gadget compiler.
"""
from __future__ import annotations

import itertools
import sys
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Optional, Sequence

import numpy as np

from . import plof as P
from . import sigma as S
from .sigma import C, Cmp, Fn, IdAtom, LinearForm, V


class IdError(ValueError):
    pass


class ClockError(IdError):
    pass


class CycleError(IdError):
    pass


class BudgetError(IdError):
    pass


class VectorSumOverflow(IdError):
    pass


_RECURSION = 20000


def _deep():
    if sys.getrecursionlimit() < _RECURSION:
        sys.setrecursionlimit(_RECURSION)


# ---------------------------------------------------------------------------
# small term and formula builders


def fn(name: str, *args) -> Fn:
    return S.fn(name, *args)


def _len(t) -> Fn:
    return fn("len", t)


def _eq(a, b) -> Cmp:
    return S.eq(a, b)


def _ite(c, a, b):
    return S.Or((S.And((c, a)), S.And((S.Not(c), b))))


def _gite(c, a, b):
    return P.Or(P.And(c, a), P.And(P.Not(c), b))


def _affine(t, a: int, b: int):
    """a*t + b as a term, keeping linear forms linear when possible."""
    if isinstance(t, LinearForm) and t.mode == "norm" and t.const * a + b >= 0:
        return LinearForm(tuple((n, c * a) for n, c in t.coeffs), t.const * a + b, "norm")
    out = t if a == 1 else fn("mul", a, t)
    if b > 0:
        out = fn("add", out, b)
    elif b < 0:
        out = fn("monus", out, -b)
    return out


def _subst_term_many(t, mapping: Mapping[str, object]):
    tmp = {name: f"\x00t{k}" for k, name in enumerate(mapping)}
    for name, v in tmp.items():
        t = S.subst_term(t, name, V(v))
    for name, v in tmp.items():
        t = S.subst_term(t, v, mapping[name])
    return t


def _walk(f):
    """All subformulas, including those inside length-of-set terms."""
    stack = [f]
    while stack:
        g = stack.pop()
        yield g
        if isinstance(g, S.Not):
            stack.append(g.arg)
        elif isinstance(g, (S.And, S.Or)):
            stack.extend(g.args)
        elif isinstance(g, S.Quant):
            stack.append(g.body)
            stack.extend(_term_formulas(g.bound))
        elif isinstance(g, S.BitAtom):
            stack.extend(_term_formulas(g.index))
            stack.extend(_term_formulas(g.arg))
        elif isinstance(g, S.Cmp):
            stack.extend(_term_formulas(g.left))
            stack.extend(_term_formulas(g.right))
        elif isinstance(g, IdAtom):
            stack.extend(_term_formulas(g.clock))
            for a in g.args:
                stack.extend(_term_formulas(a))


def _term_formulas(t):
    if isinstance(t, S.Lh):
        return [t.body] + _term_formulas(t.bound)
    if isinstance(t, Fn):
        return [g for a in t.args for g in _term_formulas(a)]
    return []


def has_id(f) -> bool:
    return any(isinstance(g, IdAtom) for g in _walk(f))


def _map_atoms(f, fun):
    """Rebuild ``f`` with every ID atom replaced by ``fun(atom)``."""
    if isinstance(f, IdAtom):
        return fun(f)
    if isinstance(f, S.Not):
        return S.Not(_map_atoms(f.arg, fun))
    if isinstance(f, S.And):
        return S.And(tuple(_map_atoms(a, fun) for a in f.args))
    if isinstance(f, S.Or):
        return S.Or(tuple(_map_atoms(a, fun) for a in f.args))
    if isinstance(f, S.Quant):
        return S.Quant(f.q, f.kind, f.var, f.bound, _map_atoms(f.body, fun))
    return f


_FRESH = itertools.count()


def freshen(f):
    """Rename every bound variable of ``f`` to a globally unique name."""
    if isinstance(f, S.Quant):
        new = f"{f.var}#{next(_FRESH)}"
        body = S.subst(freshen(f.body), f.var, V(new))
        return S.Quant(f.q, f.kind, new, _freshen_term(f.bound), body)
    if isinstance(f, S.Not):
        return S.Not(freshen(f.arg))
    if isinstance(f, (S.And, S.Or)):
        return type(f)(tuple(freshen(a) for a in f.args))
    if isinstance(f, S.BitAtom):
        return S.BitAtom(_freshen_term(f.index), _freshen_term(f.arg))
    if isinstance(f, S.Cmp):
        return S.Cmp(f.op, _freshen_term(f.left), _freshen_term(f.right))
    if isinstance(f, IdAtom):
        return IdAtom(f.spec, tuple(_freshen_term(a) for a in f.args), _freshen_term(f.clock))
    return f


def _freshen_term(t):
    if isinstance(t, S.Lh):
        new = f"{t.var}#{next(_FRESH)}"
        return S.Lh(_freshen_term(t.bound), new, S.subst(freshen(t.body), t.var, V(new)))
    if isinstance(t, Fn):
        return Fn(t.name, tuple(_freshen_term(a) for a in t.args))
    return t


def _remap_gate(g, fun):
    """Replace gate atoms: ``fun(index)`` returns the new gate subformula."""
    if isinstance(g, P.Var):
        return fun(g.index)
    if isinstance(g, P.Not):
        return P.Not(_remap_gate(g.arg, fun))
    if isinstance(g, P.Bin):
        return P.Bin(g.table, _remap_gate(g.left, fun), _remap_gate(g.right, fun))
    return g


def lazy_gate(g, atom: Callable[[int], bool]) -> bool:
    """Evaluate a gate, skipping the right operand when the left decides it."""
    if isinstance(g, P.Var):
        return atom(g.index)
    if isinstance(g, P.Const):
        return g.value
    if isinstance(g, P.Not):
        return not lazy_gate(g.arg, atom)
    a = 2 * int(lazy_gate(g.left, atom))
    lo, hi = (g.table >> a) & 1, (g.table >> (a + 1)) & 1
    if lo == hi:
        return bool(lo)
    return bool((g.table >> (a + int(lazy_gate(g.right, atom)))) & 1)


def spread(q: int, w: int) -> int:
    return S.FUNCTIONS["spread"][0](q, w)


# ---------------------------------------------------------------------------
# plain definitions


@dataclass(eq=False)
class IdSpec:
    """Gate atoms: Var(k) for d_(k+1) (k < m), Var(m) for p0, Var(m+1) for p1."""
    name: str
    vars: tuple
    clock: str
    ell: object
    terminal: object
    params: tuple
    gate: object
    spread: int = 1
    embed: Optional[Callable[[int], int]] = field(default=None, repr=False)
    meta: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.vars = tuple(self.vars)
        self.params = tuple(self.params)
        if self.clock in self.vars:
            raise IdError("clock variable clashes with a word variable")
        if any(k >= len(self.params) + 2 or k < 0 for k in P.variables(self.gate)):
            raise IdError("gate mentions an undeclared atom")

    @property
    def m(self) -> int:
        return len(self.params)

    def bound(self, xs: Sequence[int]) -> int:
        return S.eval_term(self.ell, dict(zip(self.vars, xs)))

    def clock_of(self, q: int) -> int:
        """Clock of this definition that carries the value of original clock q."""
        if self.embed is not None:
            return self.embed(q)
        return spread(q, self.spread)

    def embed_term(self, t):
        return t if self.spread == 1 else fn("spread", t, self.spread)


class _Eval:
    def __init__(self, trace=None, limit: int = S.DEFAULT_ENUM_LIMIT):
        self.memo: dict = {}
        self.bounds: dict = {}
        self.trace = trace
        self.ctx = S._Ctx(self.atom, limit)

    def bound(self, spec, xs) -> int:
        key = (id(spec), xs)
        b = self.bounds.get(key)
        if b is None:
            b = self.bounds[key] = spec.bound(xs)
        return b

    def atom(self, spec, args, clock) -> bool:
        args = tuple(args)
        if not isinstance(spec, IdSpec):
            raise IdError("nested atoms must name plain definitions")
        if not 0 < clock.bit_length() <= self.bound(spec, args):
            return False
        return self.node(spec, args, clock)

    def node(self, spec: IdSpec, xs: tuple, p: int) -> bool:
        key = (id(spec), xs, p)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        env = dict(zip(spec.vars, xs))
        env[spec.clock] = p
        if p.bit_length() == self.bound(spec, xs):
            v = self.ctx.eval(spec.terminal, env)
        else:
            m = spec.m
            cache: dict = {}

            def atom(k):
                r = cache.get(k)
                if r is None:
                    if k < m:
                        r = self.ctx.eval(spec.params[k], env)
                    else:
                        r = self.node(spec, xs, 2 * p + (k - m))
                    cache[k] = r
                return r

            v = lazy_gate(spec.gate, atom)
        v = bool(v)
        self.memo[key] = v
        if self.trace is not None:
            self.trace.append((spec.name, p, v))
        return v


def eval_id(spec: IdSpec, xs: Sequence[int], p: int, *, trace: Optional[list] = None,
            limit: int = S.DEFAULT_ENUM_LIMIT) -> bool:
    """Value of A(xs, p); ``trace`` collects (name, clock, value) per computed node."""
    _deep()
    xs = tuple(xs)
    ev = _Eval(trace, limit)
    n = ev.bound(spec, xs)
    if not 0 < p.bit_length() <= n:
        raise ClockError(f"clock length {p.bit_length()} outside 1..{n}")
    return ev.node(spec, xs, p)


def id_atom_value(spec, args, clock) -> bool:
    """Atom semantics: false outside the clock range."""
    _deep()
    if isinstance(spec, QuadIdSpec):
        n = spec.bound(tuple(args))
        return 0 < clock.bit_length() <= n and clock.bit_length() % 2 == 1 and eval_quad(spec, args, clock)
    return _Eval().atom(spec, tuple(args), clock)


def table_fill(spec: IdSpec, xs: Sequence[int]) -> dict[int, bool]:
    """Bottom-up value table over all 2^ell - 1 clocks."""
    _deep()
    xs = tuple(xs)
    ev = _Eval()
    L = spec.bound(xs)
    table: dict[int, bool] = {}
    env = dict(zip(spec.vars, xs))
    m = spec.m
    for n in range(L, 0, -1):
        for p in range(1 << (n - 1), 1 << n):
            env[spec.clock] = p
            if n == L:
                table[p] = bool(ev.ctx.eval(spec.terminal, env))
            else:
                dv = [ev.ctx.eval(d, env) for d in spec.params]
                kids = (table[2 * p], table[2 * p + 1])
                table[p] = lazy_gate(spec.gate, lambda k: dv[k] if k < m else kids[k - m])
    return table


# ---------------------------------------------------------------------------
# quadtree definitions


@dataclass(eq=False)
class QuadIdSpec:
    """Clocks of odd length up to 2*ell+1; children 4p + 2i + j.

    Gate atoms: Var(k) for d_(k+1), Var(m + 2i + j) for p_ij."""
    name: str
    vars: tuple
    clock: str
    ell: object
    terminal: object
    params: tuple
    gate: object

    def __post_init__(self):
        self.vars = tuple(self.vars)
        self.params = tuple(self.params)
        if any(k >= len(self.params) + 4 or k < 0 for k in P.variables(self.gate)):
            raise IdError("gate mentions an undeclared atom")

    @property
    def m(self) -> int:
        return len(self.params)

    def bound(self, xs) -> int:
        return 2 * S.eval_term(self.ell, dict(zip(self.vars, xs))) + 1


def eval_quad(q: QuadIdSpec, xs: Sequence[int], p: int, *, trace: Optional[list] = None) -> bool:
    _deep()
    xs = tuple(xs)
    L = q.bound(xs)
    n = p.bit_length()
    if not (0 < n <= L and n % 2 == 1):
        raise ClockError(f"quadtree clock length {n} is not odd in 1..{L}")
    ev = _Eval()
    memo: dict = {}
    base = dict(zip(q.vars, xs))
    m = q.m

    def node(p):
        if p in memo:
            return memo[p]
        env = dict(base)
        env[q.clock] = p
        if p.bit_length() == L:
            v = ev.ctx.eval(q.terminal, env)
        else:
            v = lazy_gate(q.gate, lambda k: ev.ctx.eval(q.params[k], env) if k < m else node(4 * p + k - m))
        memo[p] = v = bool(v)
        if trace is not None:
            trace.append((p, v))
        return v

    return node(p)


def quad_embed(p: int) -> int:
    """Quadtree clock to the clock of its binary reduction: pair ij -> 0000ij."""
    n = p.bit_length() - 1
    out = 1
    for k in reversed(range(0, n, 2)):
        out = (out << 6) | ((p >> k) & 3)
    return out


def reduce_quad(q: QuadIdSpec) -> IdSpec:
    """Binary definition R with R(x, quad_embed(p)) = A(x, p).

    Each quad level becomes six binary levels: four OR levels guess the
    conjunct index k, a select node checks I_k with the children fixed by k,
    and a literal node checks that the chosen child pair has the guessed values."""
    c = V(q.clock)
    r = fn("mod", fn("monus", _len(c), 1), 6)
    orig = fn("extract", c, 6, 0, 2, r)
    b = [S.BitAtom(C(e), c) for e in range(5)]
    params = [
        S.lt(r, 4),
        _eq(r, 4),
        _eq(r, 5),
        S.Or((S.And((S.Not(b[0]), b[1])), S.And((b[0], b[3])))),
        S.Or((S.And((S.Not(b[0]), b[2])), S.And((b[0], b[4])))),
    ]
    params += b[:4]
    params += [S.subst(d, q.clock, orig) for d in q.params]
    m = len(params)
    p0, p1 = P.Var(m), P.Var(m + 1)
    sel = _remap_gate(q.gate, lambda k: P.Var(9 + k) if k < q.m else P.Var(5 + k - q.m))
    gate = P.Or(P.And(P.Var(0), P.Or(p0, p1)),
                P.Or(P.And(P.Var(1), P.And(sel, P.And(p0, p1))),
                     P.And(P.Var(2), P.And(P.Iff(p0, P.Var(3)), P.Iff(p1, P.Var(4))))))
    return IdSpec(f"{q.name}~bin", q.vars, q.clock, _affine(q.ell, 6, 1),
                  S.subst(q.terminal, q.clock, orig), tuple(params), gate, embed=quad_embed)


# ---------------------------------------------------------------------------
# simultaneous definitions


@dataclass(eq=False)
class SimIdSpec:
    """A(x, lam, p): children A(x, lam + j, 2p + i) for j <= K, i < 2.

    Gate atoms: Var(k) for d_(k+1), Var(m + i*(K+1) + j) for p_j^i.  The
    value is false when lam exceeds ``lambda_bound``."""
    name: str
    vars: tuple
    lam: str
    clock: str
    ell: object
    lambda_bound: object
    K: int
    terminal: object
    params: tuple
    gate: object

    def __post_init__(self):
        self.vars = tuple(self.vars)
        self.params = tuple(self.params)
        if self.K < 0:
            raise IdError("K is a natural number")
        if any(k >= len(self.params) + 2 * (self.K + 1) or k < 0 for k in P.variables(self.gate)):
            raise IdError("gate mentions an undeclared atom")

    @property
    def m(self) -> int:
        return len(self.params)


def eval_sim(s: SimIdSpec, xs: Sequence[int], lam: int, p: int, *, trace: Optional[list] = None) -> bool:
    _deep()
    xs = tuple(xs)
    base = dict(zip(s.vars, xs))
    L = S.eval_term(s.ell, base)
    top = S.eval_term(s.lambda_bound, base)
    if not 0 < p.bit_length() <= L:
        raise ClockError(f"clock length {p.bit_length()} outside 1..{L}")
    ev = _Eval()
    memo: dict = {}
    m, w = s.m, s.K + 1

    def node(lam, p):
        key = (lam, p)
        if key in memo:
            return memo[key]
        if lam > top:
            v = False
        else:
            env = dict(base)
            env[s.lam] = lam
            env[s.clock] = p
            if p.bit_length() == L:
                v = ev.ctx.eval(s.terminal, env)
            else:
                def atom(k):
                    if k < m:
                        return ev.ctx.eval(s.params[k], env)
                    i, j = divmod(k - m, w)
                    return node(lam + j, 2 * p + i)
                v = lazy_gate(s.gate, atom)
        memo[key] = v = bool(v)
        if trace is not None:
            trace.append((lam, p, v))
        return v

    return node(lam, p)


@dataclass(eq=False)
class KaryIdSpec:
    """Definition over clocks growing by ``width`` digits per level.

    Child t of p is p * 2^width + codes[t]; gate atoms Var(k) for d_(k+1),
    Var(m + t) for child t.  ``valid`` gates every node."""
    name: str
    vars: tuple
    clock: str
    levels: object
    width: int
    codes: tuple
    terminal: object
    params: tuple
    gate: object
    valid: object

    @property
    def m(self) -> int:
        return len(self.params)

    def bound(self, xs) -> int:
        return 1 + self.width * S.eval_term(self.levels, dict(zip(self.vars, xs)))


def _minus_one(t):
    if isinstance(t, LinearForm) and t.mode == "norm" and t.const >= 1:
        return LinearForm(t.coeffs, t.const - 1, "norm")
    return fn("monus", t, 1)


def sim_to_kary(s: SimIdSpec) -> KaryIdSpec:
    """2(K+1)-ary form: a level appends i then 0^(K-j) 1^j, so the clock
    carries the tree position q and the accumulated offset #J."""
    K, w = s.K, s.K + 1
    p = V(s.clock)
    q = fn("extract", p, w, K, K + 1, 0)
    nj = fn("monus", fn("count", fn("extract", p, w, 0, K, 0)), 1)
    lam2 = fn("add", V(s.lam), nj)
    sub = {s.lam: lam2, s.clock: q}
    valid = S.le(lam2, s.lambda_bound)
    codes = tuple((i << K) + (1 << j) - 1 for i in (0, 1) for j in range(w))
    return KaryIdSpec(f"{s.name}~kary", s.vars + (s.lam,), s.clock, _minus_one(s.ell), w, codes,
                      S.And((valid, S.subst_many(s.terminal, sub))),
                      tuple(S.subst_many(d, sub) for d in s.params), s.gate, valid)


def eval_kary(k: KaryIdSpec, xs: Sequence[int], p: int) -> bool:
    _deep()
    xs = tuple(xs)
    L = k.bound(xs)
    n = p.bit_length()
    if not (0 < n <= L and (n - 1) % k.width == 0):
        raise ClockError(f"clock length {n} is not a level of 1..{L}")
    ev = _Eval()
    memo: dict = {}
    base = dict(zip(k.vars, xs))
    m = k.m

    def node(p):
        if p in memo:
            return memo[p]
        env = dict(base)
        env[k.clock] = p
        if p.bit_length() == L:
            v = ev.ctx.eval(k.terminal, env)
        else:
            v = ev.ctx.eval(k.valid, env) and lazy_gate(
                k.gate, lambda a: ev.ctx.eval(k.params[a], env) if a < m else node((p << k.width) | k.codes[a - m]))
        memo[p] = v = bool(v)
        return v

    return node(p)


def kary_to_binary(k: KaryIdSpec) -> IdSpec:
    """Binary definition via guess chains.

    A level is a block of 2K'+1+w digits (K' = number of children).  Digits
    come in (guess, select) pairs: OR nodes guess a child value, AND nodes
    either keep guessing or select the current child.  After the chain closes,
    the node at 2K' checks I on the guessed values, while a selected child
    walks through a literal check, copy nodes and finally its own code digits."""
    Kp, w = len(k.codes), k.width
    Bk = 2 * Kp + 1 + w
    c = V(k.clock)
    r = fn("mod", fn("monus", _len(c), 1), Bk)
    blk = fn("suffix", c, r)
    over = fn("monus", r, 2 * Kp)
    head = fn("shr", blk, over)
    hr = fn("monus", r, over)
    sel = fn("extract", head, 2, 0, 1, fn("mod", hr, 2))
    t = fn("monus", fn("count", sel), 1)
    nsel = fn("monus", _len(sel), 1)
    orig = fn("extract", c, Bk, 0, w, r)
    sub = {k.clock: orig}
    code_bit = [S.And((_eq(t, t0), _eq(r, 2 * Kp + 1 + s0)))
                for t0, code in enumerate(k.codes) for s0 in range(w) if (code >> (w - 1 - s0)) & 1]
    params = [
        _eq(t, nsel),
        _eq(fn("mod", r, 2), 0),
        S.lt(r, 2 * Kp),
        _eq(r, 2 * Kp),
        _eq(r, fn("add", fn("mul", 2, t), 2)),
        S.le(2 * Kp + 1, r),
        S.Or(tuple(code_bit)),
        S.BitAtom(C(1), c),
        S.subst(k.valid, k.clock, orig),
    ]
    params += [S.BitAtom(C(2 * Kp - 1 - 2 * u), c) for u in range(Kp)]
    base = len(params)
    params += [S.subst(d, k.clock, orig) for d in k.params]
    M = len(params)
    p0, p1 = P.Var(M), P.Var(M + 1)
    inner = _remap_gate(k.gate, lambda a: P.Var(base + a) if a < k.m else P.Var(9 + a - k.m))
    chain = _gite(P.Var(2), _gite(P.Var(1), P.Or(p0, p1), P.And(p0, p1)),
                  P.And(P.Var(3), P.And(P.Var(8), inner)))
    walk = _gite(P.Var(5), _gite(P.Var(6), p1, p0), _gite(P.Var(4), P.Iff(p0, P.Var(7)), p0))
    gate = _gite(P.Var(0), chain, walk)
    out = IdSpec(f"{k.name}~bin", k.vars, k.clock, _affine(k.levels, Bk, 1),
                 S.subst(k.terminal, k.clock, orig), tuple(params), gate)
    out.meta["chain"] = (Kp, w, k.codes)
    return out


def chain_clock(spec: IdSpec, steps: Iterable[int], start: int = 1) -> int:
    """Binary clock reached from ``start`` by selecting the given child indices."""
    Kp, w, codes = spec.meta["chain"]
    c = start
    for t in steps:
        digits = [0, 1] * t + [0, 0] + [0] * (2 * Kp - 2 * t - 1)
        digits += [(codes[t] >> (w - 1 - s)) & 1 for s in range(w)]
        for d in digits:
            c = 2 * c + d
    return c


def reduce_sim(s: SimIdSpec) -> IdSpec:
    """Binary definition R with R(x, lam, sim_clock(R, q, js)) = A(x, lam + sum js, q)."""
    out = kary_to_binary(sim_to_kary(s))
    out.name = f"{s.name}~bin"
    out.meta["K"] = s.K
    out.embed = lambda q: sim_clock(out, q)
    return out


def sim_clock(spec: IdSpec, q: int, offsets: Optional[Sequence[int]] = None) -> int:
    """Binary clock for tree position q with per-level offsets (default 0)."""
    K = spec.meta["K"]
    n = q.bit_length() - 1
    offsets = list(offsets) if offsets is not None else [0] * n
    if len(offsets) != n:
        raise IdError("one offset per clock digit")
    steps = [((q >> (n - 1 - k)) & 1) * (K + 1) + offsets[k] for k in range(n)]
    return chain_clock(spec, steps)


# ---------------------------------------------------------------------------
# iterated definitions


def nested_specs(spec: IdSpec) -> list:
    out, seen = [], set()
    for f in (spec.terminal,) + spec.params:
        for g in _walk(f):
            if isinstance(g, IdAtom) and id(g.spec) not in seen:
                seen.add(id(g.spec))
                out.append(g.spec)
    return out


def marker_quad(spec: IdSpec, nested_d: Sequence[int]) -> QuadIdSpec:
    """Quadtree form moving the (at most two) parameters with nested atoms
    into the terminal: pair 0b follows the original clock, pair 1b marks the
    parameter b and is then copied down to a leaf that evaluates it."""
    if len(nested_d) > 2:
        raise IdError("at most two parameters may contain nested atoms")
    p = V(spec.clock)
    e = fn("extract", p, 2, 1, 2, 0)
    hm = S.le(2, fn("count", e))
    u = fn("lowbit", fn("part", e, 0, fn("monus", _len(e), 1)))
    q_plain = fn("extract", p, 2, 0, 1, 0)
    q_mark = fn("extract", fn("shr", p, fn("add", fn("mul", 2, u), 2)), 2, 0, 1, 0)
    kbit = S.BitAtom(fn("mul", 2, u), p)
    rest = [k for k in range(spec.m) if k not in nested_d]
    terminal = [S.And((S.Not(hm), S.subst(spec.terminal, spec.clock, q_plain)))]
    for pos, k in enumerate(nested_d):
        mark = S.Not(kbit) if pos == 0 else kbit
        terminal.append(S.And((hm, mark, S.subst(spec.params[k], spec.clock, q_mark))))
    params = [hm] + [S.subst(spec.params[k], spec.clock, q_plain) for k in rest]
    m2 = len(params)

    def atom(k):
        if k < spec.m:
            if k in nested_d:
                return P.Var(m2 + 2 + nested_d.index(k))
            return P.Var(1 + rest.index(k))
        return P.Var(m2 + (k - spec.m))

    gate = P.Or(P.And(P.Not(P.Var(0)), _remap_gate(spec.gate, atom)), P.And(P.Var(0), P.Var(m2)))
    return QuadIdSpec(f"{spec.name}~quad", spec.vars, spec.clock, _minus_one(spec.ell),
                      S.Or(tuple(terminal)), tuple(params), gate)


def marker_case(quad: QuadIdSpec, p: int) -> tuple[str, int]:
    """Which terminal case a marker-quad leaf uses: ("B", q), ("D0", q) or ("D1", q)."""
    env = {quad.clock: p}
    ev = _Eval()
    hm = ev.ctx.eval(quad.params[0], env)
    e = S.eval_term(fn("extract", V("p"), 2, 1, 2, 0), {"p": p})
    if not hm:
        return "B", S.eval_term(fn("extract", V("p"), 2, 0, 1, 0), {"p": p})
    body = e & ((1 << (e.bit_length() - 1)) - 1)
    u = (body & -body).bit_length() - 1
    q = S.eval_term(fn("extract", V("p"), 2, 0, 1, 0), {"p": p >> (2 * u + 2)})
    return ("D1" if (p >> (2 * u)) & 1 else "D0"), q


def _nnf(f, neg: bool):
    if not has_id(f):
        return ("pure", S.Not(f) if neg else f)
    if isinstance(f, IdAtom):
        return ("lit", not neg, f)
    if isinstance(f, S.Not):
        return _nnf(f.arg, not neg)
    if isinstance(f, (S.And, S.Or)):
        op = "and" if isinstance(f, S.And) else "or"
        if neg:
            op = "or" if op == "and" else "and"
        kids = [_nnf(a, neg) for a in f.args]
        return _balance(op, kids)
    raise IdError("nested atoms under quantifiers or inside terms are not supported")


def _balance(op, kids):
    if len(kids) == 1:
        return kids[0]
    h = len(kids) // 2
    return (op, _balance(op, kids[:h]), _balance(op, kids[h:]))


def _height(node) -> int:
    if node[0] in ("and", "or"):
        return 1 + max(_height(node[1]), _height(node[2]))
    return 0


def _tree_nodes(node, depth=0, path=0):
    yield depth, path, node
    if node[0] in ("and", "or"):
        yield from _tree_nodes(node[1], depth + 1, 2 * path)
        yield from _tree_nodes(node[2], depth + 1, 2 * path + 1)


def _inline_terminal(R: IdSpec) -> IdSpec:
    """Replace nested atoms in the terminal by subtrees below R's leaves.

    Below a leaf, an NNF tree of the terminal is laid out with AND/OR gates;
    a literal N(a, s) continues as a copy of N's tree from clock s (dual gate
    for negative literals) and pure leaves become constants."""
    tree = _nnf(R.terminal, False)
    h = _height(tree)
    c = V(R.clock)
    ellR = R.ell
    e = fn("monus", _len(c), ellR)
    cR = fn("shr", c, e)
    params: list = []

    def par(f):
        params.append(f)
        return P.Var(len(params) - 1)

    CH0, CH1 = P.Var(-1), P.Var(-2)
    cases = []  # (cond formula, gate ast or None, const formula or None)
    mR = R.m
    r_off = len(params)
    for d in R.params:
        par(d)
    rgate = _remap_gate(R.gate, lambda k: P.Var(r_off + k) if k < mR else (CH0 if k == mR else CH1))
    cases.append((S.lt(_len(c), ellR), rgate, None))
    lit_bounds = {}
    for depth, path, node in _tree_nodes(tree):
        here = S.And((_eq(e, depth), _eq(fn("part", c, 0, depth), path)))
        kind = node[0]
        if kind in ("and", "or"):
            cases.append((here, P.And(CH0, CH1) if kind == "and" else P.Or(CH0, CH1), None))
        elif kind == "pure":
            cases.append((here, None, S.subst(node[1], R.clock, cR)))
        else:
            positive, atom = node[1], node[2]
            N = atom.spec
            if not isinstance(N, IdSpec):
                raise IdError("nested atoms must name plain definitions")
            if not all(isinstance(a, V) and a.name in R.vars for a in atom.args):
                raise IdError("nested atom arguments must be word variables of the outer definition")
            if has_id(N.terminal) or any(has_id(d) for d in N.params):
                raise IdError("nested definition is not flat")
            sub_vars = dict(zip(N.vars, atom.args))
            ellN = _subst_term_many(N.ell, sub_vars)
            lit_bounds[(id(N), atom.args)] = ellN
            s = S.subst_term(atom.clock, R.clock, cR)
            nd = fn("monus", e, depth)
            region = S.And((S.le(depth, e), _eq(fn("part", fn("shr", c, nd), 0, depth), path)))
            z = fn("concat", s, fn("suffix", c, nd))
            into = {**sub_vars, N.clock: z}
            oor = S.Not(S.And((S.lt(0, _len(s)), S.le(_len(s), ellN))))
            cases.append((S.And((region, oor)), None, S.Truth(not positive)))
            leaf = S.subst_many(freshen(N.terminal), into)
            cases.append((S.And((region, _eq(_len(z), ellN))), None, leaf if positive else S.Not(leaf)))
            off = len(params)
            for d in N.params:
                par(S.subst_many(freshen(d), into))
            if positive:
                g = _remap_gate(N.gate, lambda k: P.Var(off + k) if k < N.m else (CH0 if k == N.m else CH1))
            else:
                g = P.Not(_remap_gate(N.gate, lambda k: P.Var(off + k) if k < N.m
                                      else P.Not(CH0 if k == N.m else CH1)))
            cases.append((S.And((region, S.lt(_len(z), ellN))), g, None))
    gate: P.Formula = P.Bot
    terminal = S.BOT
    for cond, g, const in reversed(cases):
        v = par(cond)
        gate = _gite(v, g if g is not None else par(const), gate)
        terminal = _ite(cond, const if const is not None else S.BOT, terminal)
    M = len(params)
    gate = _remap_gate(gate, lambda k: P.Var(M) if k == -1 else P.Var(M + 1) if k == -2 else P.Var(k))
    ell = fn("add", ellR, h)
    for t in lit_bounds.values():
        ell = fn("add", ell, t)
    return IdSpec(f"{R.name}~flat", R.vars, R.clock, ell, terminal, tuple(params), gate)


def flatten_iterated(spec: IdSpec, _stack: tuple = (), _done: Optional[dict] = None) -> IdSpec:
    """Plain definition F with F(x, F.clock_of(q)) = A(x, q) whose formulas
    have no nested atoms.  Nested definitions are flattened first."""
    _done = {} if _done is None else _done
    if id(spec) in _done:
        return _done[id(spec)]
    if any(s is spec for s in _stack):
        raise CycleError(f"definition {spec.name} refers to itself")
    nested = nested_specs(spec)
    if not nested:
        _done[id(spec)] = spec
        return spec
    flat = {id(n): flatten_iterated(n, _stack + (spec,), _done) for n in nested}

    def rewrite(a: IdAtom):
        N = flat[id(a.spec)]
        return IdAtom(N, a.args, N.embed_term(a.clock))

    terminal = _map_atoms(spec.terminal, rewrite)
    params = tuple(_map_atoms(d, rewrite) for d in spec.params)
    for f in (terminal,) + params:
        for g in _walk(f):
            if isinstance(g, S.Quant) and has_id(g.body):
                raise IdError("nested atoms under quantifiers are not supported")
    base = IdSpec(spec.name, spec.vars, spec.clock, spec.ell, terminal, params, spec.gate)
    nested_d = [k for k, d in enumerate(params) if has_id(d)]
    if nested_d:
        R = reduce_quad(marker_quad(base, nested_d))
        width = 6
    else:
        R, width = base, 1
    F = _inline_terminal(R)
    F.name = f"{spec.name}~flat"
    F.spread = width
    F.embed = None
    _done[id(spec)] = F
    return F


# ---------------------------------------------------------------------------
# vector summation and counting


@dataclass(frozen=True)
class BitPredicate:
    """f(i, ys) < 2^width given by its bit graph: bitgraph(j, i, ys) = Bit(j, f(i, ys))."""
    bitgraph: Callable[[int, int, Sequence[int]], bool]
    width: int
    formula: object = None
    names: tuple = ()

    def value(self, i: int, ys: Sequence[int]) -> int:
        return sum(1 << j for j in range(self.width) if self.bitgraph(j, i, ys))

    @classmethod
    def from_formula(cls, phi, width: int, bit_var: str = "j", index_var: str = "i",
                     word_vars: Sequence[str] = ()) -> "BitPredicate":
        word_vars = tuple(word_vars)

        def g(j, i, ys):
            env = dict(zip(word_vars, ys))
            env[bit_var] = j
            env[index_var] = i
            return S.eval_sb0(phi, env)

        return cls(g, width, phi, (bit_var, index_var) + word_vars)


def _maj(a: int, b: int, c: int) -> int:
    return (a & b) | (a & c) | (b & c)


def _reverse(v: int, width: int) -> int:
    return int(format(v, f"0{width}b")[::-1], 2) if width else 0


def carry_add(s: int, c: int, H: int) -> int:
    """Full addition written bit by bit: a_l = s_l xor c_l xor (exists k < l:
    s_k and c_k and every position strictly between propagates)."""
    out = 0
    for lam in range(H + 2):
        sl, cl = (s >> lam) & 1, (c >> lam) & 1
        carry = 0
        for eta in range(lam):
            if (s >> eta) & 1 and (c >> eta) & 1 and all(
                    ((s >> rho) ^ (c >> rho)) & 1 for rho in range(eta + 1, lam)):
                carry = 1
                break
        out |= (sl ^ cl ^ carry) << lam
    return out


def vector_sum(f: BitPredicate, x: int, ys: Sequence[int] = (), H: Optional[int] = None) -> int:
    """sum_{i < |x|} f(i, ys) by a carry-save tree over positions with
    digits in reverse order: bit l of a pair stands for 2^(H - l)."""
    n = x.bit_length()
    if n == 0:
        return 0
    depth = n.bit_length()
    if H is None:
        H = f.width + depth
    top = 1 << (H + 1)
    level = []
    for i in range(1 << depth):
        v = f.value(i, ys) if i < n else 0
        if v >= top:
            raise VectorSumOverflow(f"summand {v} does not fit below 2^{H + 1}")
        level.append((_reverse(v, H + 1), 0))
    while len(level) > 1:
        nxt = []
        for (s0, c0), (s1, c1) in zip(level[::2], level[1::2]):
            x0 = s0 ^ s1 ^ c0
            m0 = _maj(s0, s1, c0)
            if m0 & 1:
                raise VectorSumOverflow("carry out of the top digit")
            cp = m0 >> 1
            s = x0 ^ cp ^ c1
            m1 = _maj(x0, cp, c1)
            if m1 & 1:
                raise VectorSumOverflow("carry out of the top digit")
            nxt.append((s, m1 >> 1))
        level = nxt
    s, c = level[0]
    sv, cv = _reverse(s, H + 1), _reverse(c, H + 1)
    total = carry_add(sv, cv, H + 1)
    if total >= 1 << (H + 1):
        raise VectorSumOverflow(f"sum needs more than {H + 1} digits")
    return total


def count_bits(phi, x: int, ys: Sequence[int] = ()) -> int:
    """#{i < |x| : phi(i)} for a callable or a formula over index variable i."""
    if callable(phi):
        pred = BitPredicate(lambda j, i, ys: bool(phi(i)), 1)
    else:
        pred = BitPredicate.from_formula(S.And((S.Cmp("=", V("j"), C(0)), phi)), 1)
    return vector_sum(pred, x, ys)


def count_witness(J: int) -> Callable[[int], int]:
    """Encoder of the first y one-positions of J into a single word u."""
    w = J.bit_length().bit_length()
    ones = [i for i in range(J.bit_length()) if (J >> i) & 1]

    def make(y: int) -> int:
        if y > len(ones):
            raise IdError("fewer than y ones")
        u = 1 << (w * y)
        for k in range(y):
            u |= ones[k] << (w * k)
        return u

    return make


def check_count_witness(J: int, y: int, u: int) -> bool:
    """u lists y increasing one-positions of J, each in ||J|| digits."""
    w = J.bit_length().bit_length()
    if y > J.bit_length() or u.bit_length() > w * y + 1:
        return False
    prev = -1
    for k in range(y):
        uk = (u >> (w * k)) & ((1 << w) - 1)
        if uk <= prev or not (J >> uk) & 1:
            return False
        prev = uk
    return True


def at_least(J: int, y: int) -> bool:
    """y <= number of ones of J, decided through a witness."""
    try:
        u = count_witness(J)(y)
    except IdError:
        return False
    return check_count_witness(J, y, u)


def carry_save_spec(f: BitPredicate, H: int, ys_names: Sequence[str] = ()) -> SimIdSpec:
    """Simultaneous definition of the carry-save tree for ``f`` (which must
    carry a formula over (j, i, ys)).  Lambda = 2l + b: b = 0 gives digit l of
    the sum word, b = 1 digit l of the carry word, both at order H - l."""
    if f.formula is None:
        raise IdError("carry-save definition needs the formula of f")
    bit_var, index_var = f.names[:2]
    word = f.names[2:]
    x, lam, p = V("x"), V("L"), V("p")
    half = fn("half", lam)
    nx = _len(_len(x))
    pp = fn("part", p, 0, nx)
    fbit = S.subst_many(f.formula, {bit_var: fn("monus", H, half), index_var: pp})
    terminal = S.And((S.Not(S.BitAtom(C(0), lam)), S.le(half, H), S.lt(pp, _len(x)), fbit))
    K = 4
    m = 1

    def a(j, i):
        return P.Var(m + i * (K + 1) + j)

    def maj(u, v, w):
        return P.Or(P.Or(P.And(u, v), P.And(u, w)), P.And(v, w))

    def xor3(u, v, w):
        return P.Xor(P.Xor(u, v), w)

    s_gate = P.Xor(P.Xor(xor3(a(0, 0), a(0, 1), a(1, 0)), maj(a(2, 0), a(2, 1), a(3, 0))), a(1, 1))
    c_gate = maj(xor3(a(1, 0), a(1, 1), a(2, 0)), maj(a(3, 0), a(3, 1), a(4, 0)), a(2, 1))
    gate = _gite(P.Var(0), c_gate, s_gate)
    return SimIdSpec("carry-save", ("x",) + tuple(word), "L", "p", S.norm(1, x=1), C(2 * H + 1), K,
                     terminal, (S.BitAtom(C(0), lam),), gate)


def sum_from_root(value: Callable[[int], bool], H: int) -> int:
    """Read the sum and carry words off the root values A(2l), A(2l+1)."""
    s = sum(1 << (H - l) for l in range(H + 1) if value(2 * l))
    c = sum(1 << (H - l) for l in range(H + 1) if value(2 * l + 1))
    return s + c


# ---------------------------------------------------------------------------
# the and/or tree function


def _bits(x: int, n: int) -> np.ndarray:
    x &= (1 << n) - 1
    raw = np.frombuffer(x.to_bytes((n + 7) // 8 or 1, "little"), dtype=np.uint8)
    return np.unpackbits(raw, bitorder="little")[:n]


def _from_bits(b: np.ndarray) -> int:
    return int.from_bytes(np.packbits(b.astype(np.uint8), bitorder="little").tobytes(), "little")


def _pairs(x: int, op) -> int:
    if x == 0:
        return 0
    npairs = (x.bit_length() - 1) // 2
    if npairs == 0:
        return 1
    b = _bits(x, 2 * npairs)
    return (1 << npairs) | _from_bits(op(b[0::2], b[1::2]))


def and_fn(x: int) -> int:
    """Pairwise AND of the digit pairs below the top, keeping a leading 1."""
    return _pairs(x, np.bitwise_and)


def or_fn(x: int) -> int:
    return _pairs(x, np.bitwise_or)


def tree_fn(x: int) -> int:
    """Value of the alternating and/or tree whose leaves are the digits of x."""
    while x >= 16:
        x = or_fn(and_fn(x))
    return x & 1


def log4_exponent(x: int) -> int:
    """floor(log4(|x| - 1)) by the norm formula: (||x|| - 2) // 2 when |x| is a
    power of two, (||x|| - 1) // 2 otherwise."""
    n = x.bit_length()
    nn = n.bit_length()
    if n > 0 and n & (n - 1) == 0:
        return max(nn - 2, 0) // 2
    return max(nn - 1, 0) // 2


def tree_spec() -> IdSpec:
    """Tree(x, p) as a plain definition; Tree(x, 1) = tree(x)."""
    x, c = V("x"), V("p")
    nx = _len(_len(x))
    e = fn("div", fn("monus", nx, fn("add", 1, fn("monus", 2, fn("count", _len(x))))), 2)
    ny1 = fn("mul", 2, e)
    leafmode = S.le(fn("add", ny1, 1), _len(c))
    leafval = S.BitAtom(fn("part", c, 0, ny1), x)
    odd = S.BitAtom(C(0), _len(c))
    p0, p1 = P.Var(3), P.Var(4)
    gate = _gite(P.Var(0), P.Var(1), _gite(P.Var(2), P.Or(p0, p1), P.And(p0, p1)))
    return IdSpec("Tree", ("x",), "p", S.norm(1, x=1), leafval, (leafmode, leafval, odd), gate)


TREE = tree_spec()


def tree_predicate(x: int, p: int = 1) -> bool:
    return eval_id(TREE, (x,), p)


def _polar(v: bool, xi: int) -> bool:
    return v if xi else not v


class _Gadget:
    def __init__(self, spec: IdSpec, xs: tuple):
        self.spec, self.xs = spec, xs
        self.ev = _Eval()
        self.L = spec.bound(xs)
        self.memo: dict = {}
        self.blank: dict = {}

    def env(self, p):
        env = dict(zip(self.spec.vars, self.xs))
        env[self.spec.clock] = p
        return env

    def leaf(self, p, xi) -> bool:
        return _polar(self.ev.ctx.eval(self.spec.terminal, self.env(p)), xi)

    def cofactor(self, p, k, xi) -> bool:
        """I(D(p), Bit(0, k), Bit(1, k)) with polarity xi."""
        env = self.env(p)
        m = self.spec.m
        kids = (k & 1, (k >> 1) & 1)
        v = lazy_gate(self.spec.gate,
                      lambda a: self.ev.ctx.eval(self.spec.params[a], env) if a < m else bool(kids[a - m]))
        return _polar(v, xi)

    def blank_block(self, d) -> np.ndarray:
        """Block that only the free-accept rule makes true: ones exactly where some b2 digit is set."""
        if d not in self.blank:
            if d == 0:
                self.blank[d] = np.zeros(1, np.uint8)
            else:
                sub = self.blank_block(d - 1)
                ones = np.ones_like(sub)
                self.blank[d] = np.concatenate([ones if (K >> 2) & 1 else sub for K in range(16)])
        return self.blank[d]

    def build(self, p, xi, d) -> np.ndarray:
        key = (p, xi, d)
        if key in self.memo:
            return self.memo[key]
        if d == 0:
            out = np.array([self.leaf(p, xi)], np.uint8)
        else:
            parts = []
            for K in range(16):
                b0, b1, b2, b3 = K & 1, (K >> 1) & 1, (K >> 2) & 1, (K >> 3) & 1
                if b2:
                    parts.append(np.ones(1 << (4 * (d - 1)), np.uint8))
                    continue
                k = 2 * b3 + b1
                if self.cofactor(p, k, xi):
                    parts.append(self.build(2 * p + b0, (k >> b0) & 1, d - 1))
                else:
                    parts.append(self.blank_block(d - 1))
            out = np.concatenate(parts)
        self.memo[key] = out
        return out


def compile_tree_gadget(spec: IdSpec, xs: Sequence[int], p: int, xi: int,
                        bit_budget: int = 1 << 20) -> int:
    """Word g with tree(g) = (A(xs, p) iff xi), of length 2^(4(ell - |p|)) + 1.

    Each level spends four digits b3 b2 b1 b0: b2 = 1 is a free accept, k =
    2 b3 + b1 guesses the two child values and b0 picks the child to follow."""
    _deep()
    xs = tuple(xs)
    g = _Gadget(spec, xs)
    if not 0 < p.bit_length() <= g.L:
        return 0 if xi else 1
    d = g.L - p.bit_length()
    size = 1 << (4 * d)
    if size > bit_budget:
        raise BudgetError(f"gadget needs 2^{4 * d} digits, budget is {bit_budget}")
    return (1 << size) | _from_bits(g.build(p, xi, d))


def gadget_bit(spec: IdSpec, xs: Sequence[int], p: int, xi: int, q: int) -> bool:
    """Digit q of the gadget, decided directly from the two case rules."""
    xs = tuple(xs)
    g = _Gadget(spec, xs)
    L = g.L - p.bit_length()
    n = 4 * L
    if any((q >> (4 * i + 2)) & 1 for i in range(L)):
        return True
    node, pol = p, xi
    for m in range(L + 1):
        i0 = n - 4 * m
        if m > 0:
            b0 = (q >> i0) & 1
            pos = (not b0 and (q >> (i0 + 1)) & 1) or (b0 and (q >> (i0 + 3)) & 1)
            node = 2 * node + b0
            pol = 1 if pos else 0
        if m == L:
            return g.leaf(node, pol)
        j = i0 - 4
        k = 2 * ((q >> (j + 3)) & 1) + ((q >> (j + 1)) & 1)
        if not g.cofactor(node, k, pol):
            return False
    return True


# ---------------------------------------------------------------------------
# text format


GATE_OPS = {8: "and", 14: "or", 6: "xor", 9: "iff", 11: "imp", 13: "rimp",
            7: "nand", 1: "nor", 4: "nimp", 2: "nrimp"}
_OP_TABLE = {v: k for k, v in GATE_OPS.items()}


def _atom_names(kind: str, m: int, K: int = 0) -> list[str]:
    names = [f"d{k + 1}" for k in range(m)]
    if kind == "quad":
        names += ["p00", "p01", "p10", "p11"]
    elif kind == "sim":
        names += [f"p{i}_{j}" for i in (0, 1) for j in range(K + 1)]
    else:
        names += ["p0", "p1"]
    return names


def gate_to_sx(g, names: Sequence[str]):
    if isinstance(g, P.Var):
        return names[g.index]
    if isinstance(g, P.Const):
        return "true" if g.value else "false"
    if isinstance(g, P.Not):
        return ["not", gate_to_sx(g.arg, names)]
    return [GATE_OPS[g.table], gate_to_sx(g.left, names), gate_to_sx(g.right, names)]


def gate_from_sx(x, names: Sequence[str]):
    if isinstance(x, str):
        if x == "true":
            return P.Top
        if x == "false":
            return P.Bot
        if x not in names:
            raise S.SexprError(f"unknown gate atom {x!r}")
        return P.Var(list(names).index(x))
    head = x[0]
    if head == "not":
        return P.Not(gate_from_sx(x[1], names))
    if head not in _OP_TABLE or len(x) < 3:
        raise S.SexprError(f"bad gate {S.dump_sexpr(x)}")
    if len(x) > 3 and head not in ("and", "or", "xor", "iff"):
        raise S.SexprError(f"{head} takes two operands")
    out = gate_from_sx(x[1], names)
    for y in x[2:]:
        out = P.Bin(_OP_TABLE[head], out, gate_from_sx(y, names))
    return out


def spec_to_sx(spec):
    kind = "quad" if isinstance(spec, QuadIdSpec) else "sim" if isinstance(spec, SimIdSpec) else "plain"
    K = spec.K if kind == "sim" else 0
    out = [{"plain": "idspec", "quad": "quadspec", "sim": "simspec"}[kind], ["name", spec.name],
           ["vars"] + list(spec.vars), ["clock", spec.clock]]
    if kind == "sim":
        out += [["lambda", spec.lam], ["K", str(K)], ["lambda-bound", S.term_to_sx(spec.lambda_bound)]]
    out += [["ell", S.term_to_sx(spec.ell)], ["terminal", S.formula_to_sx(spec.terminal)],
            ["params"] + [S.formula_to_sx(d) for d in spec.params],
            ["gate", gate_to_sx(spec.gate, _atom_names(kind, spec.m, K))]]
    return out


def format_specs(specs: Iterable) -> str:
    return "\n".join(S.dump_sexpr(spec_to_sx(s)) for s in specs) + "\n"


def parse_specs(text: str) -> dict:
    """Definitions in file order; later ones may name earlier ones in atoms."""
    out: dict = {}
    for item in S.parse_sexpr(text):
        if not isinstance(item, list) or item[0] not in ("idspec", "quadspec", "simspec"):
            raise S.SexprError("expected (idspec ...), (quadspec ...) or (simspec ...)")
        fields = {}
        for f in item[1:]:
            if not isinstance(f, list) or not f:
                raise S.SexprError(f"bad field {S.dump_sexpr(f)}")
            fields[f[0]] = f[1:]
        try:
            name = fields["name"][0]
            vars_ = tuple(fields["vars"])
            clock = fields["clock"][0]
            ell = S.term_from_sx(fields["ell"][0])
            terminal = S.formula_from_sx(fields["terminal"][0], out)
            params = tuple(S.formula_from_sx(d, out) for d in fields.get("params", []))
            gate_sx = fields["gate"][0]
        except (KeyError, IndexError) as e:
            raise S.SexprError(f"missing field {e}") from None
        if item[0] == "idspec":
            spec = IdSpec(name, vars_, clock, ell, terminal, params, gate_from_sx(gate_sx, _atom_names("plain", len(params))))
        elif item[0] == "quadspec":
            spec = QuadIdSpec(name, vars_, clock, ell, terminal, params, gate_from_sx(gate_sx, _atom_names("quad", len(params))))
        else:
            K = S._int(fields["K"][0])
            spec = SimIdSpec(name, vars_, fields["lambda"][0], clock, ell, S.term_from_sx(fields["lambda-bound"][0]),
                             K, terminal, params, gate_from_sx(gate_sx, _atom_names("sim", len(params), K)))
        out[name] = spec
    return out


# ---------------------------------------------------------------------------
# random definitions (test corpus)


def random_gate(rng, n_atoms: int, depth: int = 3):
    if depth <= 0 or rng.random() < 0.25:
        return P.Var(rng.randrange(n_atoms))
    if rng.random() < 0.15:
        return P.Not(random_gate(rng, n_atoms, depth - 1))
    return P.Bin(rng.choice(P.BINARY_TABLES), random_gate(rng, n_atoms, depth - 1),
                 random_gate(rng, n_atoms, depth - 1))


def _random_formula(rng, vars_, clock, depth):
    return S.random_stratified(rng, list(vars_), depth, [clock], max_quant_bound=3)


def random_spec(rng, vars_=("x",), ell: int = 3, m: int = 2, depth: int = 2, name: str = "A") -> IdSpec:
    params = tuple(_random_formula(rng, vars_, "p", depth) for _ in range(m))
    gate = random_gate(rng, m + 2, 3)
    return IdSpec(name, vars_, "p", S.norm(ell), _random_formula(rng, vars_, "p", depth), params, gate)


def random_quad(rng, vars_=("x",), ell: int = 1, m: int = 2, depth: int = 2, name: str = "Q") -> QuadIdSpec:
    params = tuple(_random_formula(rng, vars_, "p", depth) for _ in range(m))
    return QuadIdSpec(name, vars_, "p", S.norm(ell), _random_formula(rng, vars_, "p", depth), params,
                      random_gate(rng, m + 4, 3))


def random_sim(rng, vars_=("x",), ell: int = 2, K: int = 1, top: int = 3, m: int = 1,
               depth: int = 2, name: str = "M") -> SimIdSpec:
    allv = list(vars_) + ["L"]
    params = tuple(S.random_stratified(rng, list(vars_), depth, ["p", "L"], 3) for _ in range(m))
    terminal = S.random_stratified(rng, list(vars_), depth, ["p", "L"], 3)
    del allv
    return SimIdSpec(name, vars_, "L", "p", S.norm(ell), C(top), K, terminal, params,
                     random_gate(rng, m + 2 * (K + 1), 3))


def random_nested(rng, ell_outer: int = 2, ell_inner: int = 2, nested_params: int = 1) -> IdSpec:
    """Outer definition whose terminal and some parameters use an inner one."""
    inner = random_spec(rng, ("x",), ell_inner, 1, 1, name="N")
    clocks = [V("p"), fn("suffix", V("p"), 1), fn("add", V("p"), 1), fn("half", V("p")), C(rng.randrange(1, 4))]

    def lit():
        a = IdAtom(inner, (V("x"),), rng.choice(clocks))
        return S.Not(a) if rng.random() < 0.4 else a

    def mix():
        pure = _random_formula(rng, ("x",), "p", 1)
        return rng.choice([S.And((lit(), pure)), S.Or((lit(), lit())), S.Or((pure, lit())), lit()])

    params = [mix() if k < nested_params else _random_formula(rng, ("x",), "p", 1) for k in range(2)]
    gate = random_gate(rng, 4, 3)
    return IdSpec("A", ("x",), "p", S.norm(ell_outer), mix(), tuple(params), gate)
