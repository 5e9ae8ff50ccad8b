"""Bounded-arithmetic formulas over words and indices.

Terms, formulas, a standard-model interpreter, the stratified-class checker,
translation of stratified formulas into boolean sentences over the bit atoms
p_j^k, substitution of a set term for a word variable, and an S-expression
text format.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Optional, Sequence, Union

from . import bits as B

DEFAULT_ENUM_LIMIT = 1 << 20
DEFAULT_NODE_BUDGET = 1 << 24


class SigmaError(ValueError):
    pass


class UnboundVariable(SigmaError):
    pass


class EnumerationLimit(SigmaError):
    pass


class NodeBudgetExceeded(SigmaError):
    pass


class SubstitutionError(SigmaError):
    pass


class SexprError(SigmaError):
    pass


# ---------------------------------------------------------------------------
# terms


@dataclass(frozen=True)
class V:
    name: str


@dataclass(frozen=True)
class C:
    value: int

    def __post_init__(self):
        if self.value < 0:
            raise SigmaError("constants are naturals")


@dataclass(frozen=True)
class Fn:
    name: str
    args: tuple

    def __post_init__(self):
        if self.name not in FUNCTIONS:
            raise SigmaError(f"unknown function {self.name!r}")
        arity = FUNCTIONS[self.name][1]
        if len(self.args) != arity:
            raise SigmaError(f"{self.name} takes {arity} arguments, got {len(self.args)}")


@dataclass(frozen=True)
class LinearForm:
    """sum c_k * arg_k + const.  mode "norm": arg_k = ||x_k||; mode "index": arg_k = i_k."""
    coeffs: tuple = ()
    const: int = 0
    mode: str = "index"

    def __post_init__(self):
        if self.mode not in ("norm", "index"):
            raise SigmaError(f"linear form mode {self.mode!r}")
        if self.const < 0 or any(c < 0 for _, c in self.coeffs):
            raise SigmaError("linear form coefficients are naturals")

    def names(self) -> set[str]:
        return {n for n, _ in self.coeffs}


@dataclass(frozen=True)
class PolyForm:
    """sum coef * prod |x|^e over monomials ((coef, ((x, e), ...)), ...)."""
    monomials: tuple = ()

    def __post_init__(self):
        for coef, powers in self.monomials:
            if coef < 0 or any(e < 0 for _, e in powers):
                raise SigmaError("polynomial coefficients are naturals")

    def names(self) -> set[str]:
        return {n for _, powers in self.monomials for n, _ in powers}


@dataclass(frozen=True)
class Lh:
    """max{i < bound : body(i)} + 1, or 0 when no such i."""
    bound: "Term"
    var: str
    body: "Formula"


Term = Union[V, C, Fn, LinearForm, PolyForm, Lh]


def lin(const: int = 0, **coeffs: int) -> LinearForm:
    return LinearForm(tuple(sorted(coeffs.items())), const, "index")


def norm(const: int = 0, **coeffs: int) -> LinearForm:
    return LinearForm(tuple(sorted(coeffs.items())), const, "norm")


def poly(*monomials) -> PolyForm:
    """poly((3, {"x": 2}), (1, {})) is 3|x|^2 + 1."""
    return PolyForm(tuple((c, tuple(sorted(p.items()))) for c, p in monomials))


def length(t: Term) -> Fn:
    return Fn("len", (t,))


def _t(x) -> Term:
    if isinstance(x, int):
        return C(x)
    if isinstance(x, str):
        return V(x)
    return x


def fn(name: str, *args) -> Fn:
    return Fn(name, tuple(_t(a) for a in args))


# ---------------------------------------------------------------------------
# function table


def _div(a: int, b: int) -> int:
    return a // b if b else 0


def _mod(a: int, b: int) -> int:
    return a % b if b else 0


def _suffix(a: int, r: int) -> int:
    return (1 << r) | B.part(a, 0, r)


def _extract(a: int, w: int, lo: int, hi: int, skip: int) -> int:
    """Marker-coded word made of digits [lo, hi) of each complete w-digit block
    of a (blocks counted upward from bit ``skip``, below the leading 1)."""
    if a == 0 or w == 0 or hi <= lo:
        return 1
    n = a.bit_length() - 1
    if n < skip:
        return 1
    nb = (n - skip) // w
    width = hi - lo
    out = 1
    for b in reversed(range(nb)):
        base = skip + b * w
        out = (out << width) | B.part(a, base + lo, base + hi)
    return out


def _lowbit(a: int) -> int:
    return (a & -a).bit_length() - 1 if a else 0


def _spread(a: int, w: int) -> int:
    """Marker-coded word whose digits d become 0^(w-1) d."""
    if a == 0 or w <= 1:
        return a
    n = a.bit_length() - 1
    out = 1 << (n * w)
    for k in range(n):
        if (a >> k) & 1:
            out |= 1 << (k * w)
    return out


def _concat(a: int, b: int) -> int:
    if a == 0 or b == 0:
        return 0
    return B.concat_word(a, b)


FUNCTIONS: dict[str, tuple[Callable[..., int], int]] = {
    "len": (B.length, 1),
    "bit": (B.bit, 2),
    "part": (B.part, 3),
    "monus": (B.monus, 2),
    "half": (B.half, 1),
    "add": (B.add, 2),
    "pad": (B.pad, 2),
    "smash": (B.smash, 2),
    "multi": (B.multi, 4),
    # definable helpers used by the tree reductions
    "mul": (lambda a, b: a * b, 2),
    "div": (_div, 2),
    "mod": (_mod, 2),
    "shr": (lambda a, k: a >> k, 2),
    "suffix": (_suffix, 2),
    "extract": (_extract, 5),
    "count": (lambda a: bin(a).count("1"), 1),
    "concat": (_concat, 2),
    "lowbit": (_lowbit, 1),
    "spread": (_spread, 2),
}
_ALIASES = {"length": "len"}


# ---------------------------------------------------------------------------
# formulas


@dataclass(frozen=True)
class Truth:
    value: bool


@dataclass(frozen=True)
class BitAtom:
    """Bit(index, arg) = 1."""
    index: Term
    arg: Term


@dataclass(frozen=True)
class Cmp:
    op: str
    left: Term
    right: Term

    def __post_init__(self):
        if self.op not in ("<", "<=", "="):
            raise SigmaError(f"comparison {self.op!r}")


@dataclass(frozen=True, eq=False)
class IdAtom:
    """A(args, clock) for an inductively defined predicate ``spec``."""
    spec: object
    args: tuple
    clock: Term

    def __eq__(self, other):
        return (isinstance(other, IdAtom) and self.spec is other.spec
                and self.args == other.args and self.clock == other.clock)

    def __hash__(self):
        return hash((id(self.spec), self.args, self.clock))


@dataclass(frozen=True)
class Not:
    arg: "Formula"


@dataclass(frozen=True)
class And:
    args: tuple


@dataclass(frozen=True)
class Or:
    args: tuple


@dataclass(frozen=True)
class Quant:
    """q in {forall, exists}; kind "index": var < bound, kind "length": |var| <= bound."""
    q: str
    kind: str
    var: str
    bound: Term
    body: "Formula"

    def __post_init__(self):
        if self.q not in ("forall", "exists") or self.kind not in ("index", "length"):
            raise SigmaError(f"quantifier {self.q}/{self.kind}")


Formula = Union[Truth, BitAtom, Cmp, IdAtom, Not, And, Or, Quant]
TOP, BOT = Truth(True), Truth(False)


def conj(*fs: Formula) -> Formula:
    return And(tuple(fs)) if len(fs) != 1 else fs[0]


def disj(*fs: Formula) -> Formula:
    return Or(tuple(fs)) if len(fs) != 1 else fs[0]


def implies(a: Formula, b: Formula) -> Formula:
    return Or((Not(a), b))


def iff(a: Formula, b: Formula) -> Formula:
    return Or((And((a, b)), And((Not(a), Not(b)))))


def bit_is(index, arg) -> BitAtom:
    return BitAtom(_t(index), _t(arg))


def lt(a, b) -> Cmp:
    return Cmp("<", _t(a), _t(b))


def le(a, b) -> Cmp:
    return Cmp("<=", _t(a), _t(b))


def eq(a, b) -> Cmp:
    return Cmp("=", _t(a), _t(b))


def forall_index(var: str, bound, body: Formula) -> Quant:
    return Quant("forall", "index", var, _t(bound), body)


def exists_index(var: str, bound, body: Formula) -> Quant:
    return Quant("exists", "index", var, _t(bound), body)


def forall_length(var: str, bound, body: Formula) -> Quant:
    return Quant("forall", "length", var, _t(bound), body)


def exists_length(var: str, bound, body: Formula) -> Quant:
    return Quant("exists", "length", var, _t(bound), body)


@dataclass
class Env:
    words: dict = field(default_factory=dict)
    indices: dict = field(default_factory=dict)

    def merged(self) -> dict:
        out = dict(self.words)
        out.update(self.indices)
        return out


@dataclass(frozen=True)
class SetTerm:
    """{var < bound : body(var)} with bound a polynomial in the context lengths."""
    bound: Term
    var: str
    body: Formula


# ---------------------------------------------------------------------------
# evaluation


def eval_term(t: Term, env: Mapping[str, int], ctx: "_Ctx | None" = None) -> int:
    if isinstance(t, C):
        return t.value
    if isinstance(t, V):
        try:
            return env[t.name]
        except KeyError:
            raise UnboundVariable(t.name) from None
    if isinstance(t, Fn):
        f = FUNCTIONS[t.name][0]
        return f(*(eval_term(a, env, ctx) for a in t.args))
    if isinstance(t, LinearForm):
        total = t.const
        for name, c in t.coeffs:
            try:
                v = env[name]
            except KeyError:
                raise UnboundVariable(name) from None
            if t.mode == "norm":
                v = v.bit_length().bit_length()
            total += c * v
        return total
    if isinstance(t, PolyForm):
        total = 0
        for coef, powers in t.monomials:
            term = coef
            for name, e in powers:
                try:
                    term *= env[name].bit_length() ** e
                except KeyError:
                    raise UnboundVariable(name) from None
            total += term
        return total
    if isinstance(t, Lh):
        ctx = ctx or _Ctx()
        bound = eval_term(t.bound, env, ctx)
        ctx.check_range(bound)
        local = dict(env)
        for i in reversed(range(bound)):
            local[t.var] = i
            if ctx.eval(t.body, local):
                return i + 1
        return 0
    raise SigmaError(f"not a term: {t!r}")


def _default_id_eval(spec, args, clock) -> bool:
    from .idefs import id_atom_value

    return id_atom_value(spec, args, clock)


class _Ctx:
    def __init__(self, id_eval=None, limit: int = DEFAULT_ENUM_LIMIT):
        self.id_eval = id_eval or _default_id_eval
        self.limit = limit

    def check_range(self, n: int) -> None:
        if n > self.limit:
            raise EnumerationLimit(f"quantifier range {n} exceeds limit {self.limit}")

    def eval(self, f: Formula, env: dict) -> bool:
        if isinstance(f, Truth):
            return f.value
        if isinstance(f, BitAtom):
            return bool(B.bit(eval_term(f.index, env, self), eval_term(f.arg, env, self)))
        if isinstance(f, Cmp):
            a = eval_term(f.left, env, self)
            b = eval_term(f.right, env, self)
            return a < b if f.op == "<" else a <= b if f.op == "<=" else a == b
        if isinstance(f, Not):
            return not self.eval(f.arg, env)
        if isinstance(f, And):
            return all(self.eval(a, env) for a in f.args)
        if isinstance(f, Or):
            return any(self.eval(a, env) for a in f.args)
        if isinstance(f, IdAtom):
            args = tuple(eval_term(a, env, self) for a in f.args)
            return bool(self.id_eval(f.spec, args, eval_term(f.clock, env, self)))
        if isinstance(f, Quant):
            bound = eval_term(f.bound, env, self)
            if f.kind == "length":
                if bound >= 63 or (1 << bound) > self.limit:
                    raise EnumerationLimit(f"length quantifier 2^{bound} exceeds limit {self.limit}")
                rng = range(1 << bound)
            else:
                self.check_range(bound)
                rng = range(bound)
            saved = env.get(f.var, _MISSING)
            want = f.q == "exists"
            try:
                for v in rng:
                    env[f.var] = v
                    if self.eval(f.body, env) == want:
                        return want
                return not want
            finally:
                if saved is _MISSING:
                    env.pop(f.var, None)
                else:
                    env[f.var] = saved
        raise SigmaError(f"not a formula: {f!r}")


_MISSING = object()


def eval_sb0(phi: Formula, env: Union[Env, Mapping[str, int]], id_eval=None, *,
             limit: int = DEFAULT_ENUM_LIMIT) -> bool:
    """Standard-model truth value; ``id_eval(spec, args, clock)`` decides ID atoms."""
    d = env.merged() if isinstance(env, Env) else dict(env)
    return _Ctx(id_eval, limit).eval(phi, d)


# ---------------------------------------------------------------------------
# free variables and substitution


def term_vars(t: Term) -> set[str]:
    if isinstance(t, V):
        return {t.name}
    if isinstance(t, C):
        return set()
    if isinstance(t, Fn):
        out: set[str] = set()
        for a in t.args:
            out |= term_vars(a)
        return out
    if isinstance(t, (LinearForm, PolyForm)):
        return t.names()
    if isinstance(t, Lh):
        return term_vars(t.bound) | (free_vars(t.body) - {t.var})
    raise SigmaError(f"not a term: {t!r}")


def free_vars(f: Formula) -> set[str]:
    if isinstance(f, Truth):
        return set()
    if isinstance(f, BitAtom):
        return term_vars(f.index) | term_vars(f.arg)
    if isinstance(f, Cmp):
        return term_vars(f.left) | term_vars(f.right)
    if isinstance(f, IdAtom):
        out = term_vars(f.clock)
        for a in f.args:
            out |= term_vars(a)
        return out
    if isinstance(f, Not):
        return free_vars(f.arg)
    if isinstance(f, (And, Or)):
        out = set()
        for a in f.args:
            out |= free_vars(a)
        return out
    if isinstance(f, Quant):
        return term_vars(f.bound) | (free_vars(f.body) - {f.var})
    raise SigmaError(f"not a formula: {f!r}")


def _as_fn_tree(t: Union[LinearForm, PolyForm]) -> Term:
    """Expand a linear or polynomial form into explicit add/mul/len terms."""
    parts: list[Term] = []
    if isinstance(t, LinearForm):
        for name, c in t.coeffs:
            arg: Term = V(name)
            if t.mode == "norm":
                arg = length(length(arg))
            parts.append(arg if c == 1 else Fn("mul", (C(c), arg)))
        if t.const or not parts:
            parts.append(C(t.const))
    else:
        for coef, powers in t.monomials:
            factors: list[Term] = []
            for name, e in powers:
                factors.extend([length(V(name))] * e)
            if coef != 1 or not factors:
                factors.insert(0, C(coef))
            term = factors[0]
            for f2 in factors[1:]:
                term = Fn("mul", (term, f2))
            parts.append(term)
        if not parts:
            parts.append(C(0))
    out = parts[0]
    for p in parts[1:]:
        out = Fn("add", (out, p))
    return out


def subst_term(t: Term, name: str, value: Term) -> Term:
    """Replace variable ``name`` by ``value`` inside a term."""
    if name not in term_vars(t):
        return t
    if isinstance(t, V):
        return value
    if isinstance(t, Fn):
        return Fn(t.name, tuple(subst_term(a, name, value) for a in t.args))
    if isinstance(t, LinearForm) and t.mode == "index":
        c = dict(t.coeffs).pop(name)
        rest = LinearForm(tuple((n, k) for n, k in t.coeffs if n != name), t.const, "index")
        if isinstance(value, C):
            return LinearForm(rest.coeffs, rest.const + c * value.value, "index")
        if isinstance(value, V):
            merged = dict(rest.coeffs)
            merged[value.name] = merged.get(value.name, 0) + c
            return LinearForm(tuple(sorted(merged.items())), rest.const, "index")
        if isinstance(value, LinearForm) and value.mode == "index":
            merged = dict(rest.coeffs)
            for n, k in value.coeffs:
                merged[n] = merged.get(n, 0) + c * k
            return LinearForm(tuple(sorted(merged.items())), rest.const + c * value.const, "index")
        scaled = value if c == 1 else Fn("mul", (C(c), value))
        return Fn("add", (rest, scaled))
    if isinstance(t, (LinearForm, PolyForm)):
        return subst_term(_as_fn_tree(t), name, value)
    if isinstance(t, Lh):
        if t.var == name:
            return Lh(subst_term(t.bound, name, value), t.var, t.body)
        if t.var in term_vars(value):
            raise SubstitutionError(f"substitution would capture {t.var}")
        return Lh(subst_term(t.bound, name, value), t.var, subst(t.body, name, value))
    return t


def subst(f: Formula, name: str, value: Term) -> Formula:
    """Capture-checked replacement of a free variable by a term."""
    if isinstance(f, Truth):
        return f
    if isinstance(f, BitAtom):
        return BitAtom(subst_term(f.index, name, value), subst_term(f.arg, name, value))
    if isinstance(f, Cmp):
        return Cmp(f.op, subst_term(f.left, name, value), subst_term(f.right, name, value))
    if isinstance(f, IdAtom):
        return IdAtom(f.spec, tuple(subst_term(a, name, value) for a in f.args),
                      subst_term(f.clock, name, value))
    if isinstance(f, Not):
        return Not(subst(f.arg, name, value))
    if isinstance(f, And):
        return And(tuple(subst(a, name, value) for a in f.args))
    if isinstance(f, Or):
        return Or(tuple(subst(a, name, value) for a in f.args))
    if isinstance(f, Quant):
        bound = subst_term(f.bound, name, value)
        if f.var == name:
            return Quant(f.q, f.kind, f.var, bound, f.body)
        if f.var in term_vars(value) and name in free_vars(f.body):
            raise SubstitutionError(f"substitution would capture {f.var}")
        return Quant(f.q, f.kind, f.var, bound, subst(f.body, name, value))
    raise SigmaError(f"not a formula: {f!r}")


def subst_many(f: Formula, mapping: Mapping[str, Term]) -> Formula:
    """Simultaneous substitution via fresh intermediate names."""
    tmp = {name: f"\x00{k}" for k, name in enumerate(mapping)}
    for name, t in tmp.items():
        f = subst(f, name, V(t))
    for name, t in tmp.items():
        f = subst(f, t, mapping[name])
    return f


# ---------------------------------------------------------------------------
# stratification


def _is_index_linear(t: Term, index_vars: set[str]) -> bool:
    if isinstance(t, C):
        return True
    if isinstance(t, V):
        return t.name in index_vars
    return isinstance(t, LinearForm) and t.mode == "index" and t.names() <= index_vars


def _is_len_of(t: Term, names: set[str]) -> bool:
    return (isinstance(t, Fn) and t.name == "len" and isinstance(t.args[0], V)
            and t.args[0].name in names)


def _stratified_atom(f: Formula, W: set[str], I: set[str]) -> bool:
    if isinstance(f, BitAtom):
        if not _is_index_linear(f.index, I):
            return False
        a = f.arg
        if isinstance(a, V):
            return a.name in W or a.name in I
        if _is_len_of(a, W) or _is_len_of(a, I):
            return True
        return (isinstance(a, Fn) and a.name == "mul"
                and _is_len_of(a.args[0], W) and _is_len_of(a.args[1], W))
    if isinstance(f, Cmp):
        if f.op == "<" and isinstance(f.left, V) and f.left.name in I and _is_len_of(f.right, W):
            return True
        return f.op == "<=" and _is_index_linear(f.left, I) and _is_index_linear(f.right, I)
    return False


def check_stratified(phi: Formula, word_vars: Iterable[str], index_vars: Iterable[str] = ()) -> bool:
    """Membership in the stratified class over (word_vars; index_vars)."""
    return _strat(phi, frozenset(word_vars), frozenset(index_vars), {})


def _spec_stratified(spec, cache: dict) -> bool:
    key = id(spec)
    if key not in cache:
        cache[key] = True  # provisional, guards against cycles
        W = frozenset(spec.vars)
        I = frozenset([spec.clock])
        ok = _strat(spec.terminal, W, I, cache) and all(_strat(d, W, I, cache) for d in spec.params)
        cache[key] = ok
    return cache[key]


def _strat(f: Formula, W: frozenset, I: frozenset, cache: dict) -> bool:
    if W & I:
        return False
    if isinstance(f, Truth):
        return True
    if isinstance(f, (BitAtom, Cmp)):
        return _stratified_atom(f, W, I)
    if isinstance(f, Not):
        return _strat(f.arg, W, I, cache)
    if isinstance(f, (And, Or)):
        return all(_strat(a, W, I, cache) for a in f.args)
    if isinstance(f, IdAtom):
        if not all(isinstance(a, V) and a.name in W for a in f.args):
            return False
        if not (isinstance(f.clock, V) and f.clock.name in I):
            return False
        spec = f.spec
        if not hasattr(spec, "terminal") or len(f.args) != len(spec.vars):
            return False
        return _spec_stratified(spec, cache)
    if isinstance(f, Quant):
        if f.var in W or f.var in I:
            return False
        if f.kind == "index":
            b = f.bound
            if not (isinstance(b, C) or (isinstance(b, PolyForm) and b.names() <= W)):
                return False
            return _strat(f.body, W, I | {f.var}, cache)
        b = f.bound
        if not (isinstance(b, C) or (isinstance(b, LinearForm) and b.mode == "norm" and b.names() <= W)):
            return False
        return _strat(f.body, W | {f.var}, I, cache)
    return False


# ---------------------------------------------------------------------------
# boolean sentences


@dataclass
class BoolSentence:
    """Hash-consed dag.  Node kinds: ("const", v), ("atom", k, j), ("not", a),
    ("and", args), ("or", args); ``root`` indexes ``nodes``."""
    nodes: list
    root: int

    @property
    def size(self) -> int:
        return len(self.nodes)

    def atoms(self) -> set[tuple[int, int]]:
        return {(n[1], n[2]) for n in self._reachable() if n[0] == "atom"}

    def _reachable(self):
        seen = set()
        stack = [self.root]
        while stack:
            k = stack.pop()
            if k in seen:
                continue
            seen.add(k)
            node = self.nodes[k]
            if node[0] == "not":
                stack.append(node[1])
            elif node[0] in ("and", "or"):
                stack.extend(node[1])
        return [self.nodes[k] for k in sorted(seen)]

    def evaluate(self, sigma: Union[Mapping[tuple[int, int], bool], Callable]) -> bool:
        look = sigma if callable(sigma) else (lambda k, j: bool(sigma.get((k, j), False)))
        val: list = [None] * len(self.nodes)
        for k, node in enumerate(self.nodes):  # children precede parents
            op = node[0]
            if op == "const":
                val[k] = node[1]
            elif op == "atom":
                val[k] = look(node[1], node[2])
            elif op == "not":
                val[k] = not val[node[1]]
            elif op == "and":
                val[k] = all(val[a] for a in node[1])
            else:
                val[k] = any(val[a] for a in node[1])
        return bool(val[self.root])

    def to_sexpr(self) -> str:
        memo: dict[int, str] = {}
        for k, node in enumerate(self.nodes):
            op = node[0]
            if op == "const":
                memo[k] = "true" if node[1] else "false"
            elif op == "atom":
                memo[k] = f"(p {node[1]} {node[2]})"
            elif op == "not":
                memo[k] = f"(not {memo[node[1]]})"
            else:
                memo[k] = "(" + " ".join([op] + [memo[a] for a in node[1]]) + ")"
        return memo[self.root]


class _BoolBuilder:
    def __init__(self, budget: int):
        self.nodes: list = []
        self.index: dict = {}
        self.budget = budget
        self.false = self._mk(("const", False))
        self.true = self._mk(("const", True))

    def _mk(self, key) -> int:
        k = self.index.get(key)
        if k is None:
            if len(self.nodes) >= self.budget:
                raise NodeBudgetExceeded(f"translation exceeds {self.budget} nodes")
            k = len(self.nodes)
            self.nodes.append(key)
            self.index[key] = k
        return k

    def const(self, v: bool) -> int:
        return self.true if v else self.false

    def atom(self, k: int, j: int) -> int:
        return self._mk(("atom", k, j))

    def neg(self, a: int) -> int:
        if a == self.true:
            return self.false
        if a == self.false:
            return self.true
        node = self.nodes[a]
        if node[0] == "not":
            return node[1]
        return self._mk(("not", a))

    def nary(self, op: str, args: Iterable[int]) -> int:
        absorb, unit = (self.false, self.true) if op == "and" else (self.true, self.false)
        acc: set[int] = set()
        for a in args:
            if a == absorb:
                return absorb
            if a == unit:
                continue
            node = self.nodes[a]
            if node[0] == op:
                acc.update(node[1])
            else:
                acc.add(a)
        if not acc:
            return unit
        if len(acc) == 1:
            return next(iter(acc))
        return self._mk((op, tuple(sorted(acc))))


def valuation(xs: Sequence[int]) -> dict[tuple[int, int], bool]:
    """sigma_x(p_j^k) = Bit(j, x_k); k counts from 1."""
    return {(k, j): bool((x >> j) & 1) for k, x in enumerate(xs, start=1) for j in range(x.bit_length())}


class _Translator:
    def __init__(self, budget: int, limit: int):
        self.b = _BoolBuilder(budget)
        self.limit = limit
        self.memo: dict = {}

    # env maps word names -> ("sym", k, length) | ("val", n); index names -> int

    def _length(self, entry) -> int:
        return entry[2] if entry[0] == "sym" else entry[1].bit_length()

    def closed(self, t: Term, env: dict) -> int:
        if isinstance(t, C):
            return t.value
        if isinstance(t, V):
            e = env.get(t.name, _MISSING)
            if e is _MISSING:
                raise UnboundVariable(t.name)
            if isinstance(e, int):
                return e
            if e[0] == "val":
                return e[1]
            raise SigmaError(f"word variable {t.name} used outside a bit position")
        if isinstance(t, Fn) and t.name == "len" and isinstance(t.args[0], V):
            e = env.get(t.args[0].name, _MISSING)
            if e is _MISSING:
                raise UnboundVariable(t.args[0].name)
            return e.bit_length() if isinstance(e, int) else self._length(e)
        if isinstance(t, Fn):
            return FUNCTIONS[t.name][0](*(self.closed(a, env) for a in t.args))
        if isinstance(t, LinearForm):
            total = t.const
            for name, c in t.coeffs:
                e = env.get(name, _MISSING)
                if e is _MISSING:
                    raise UnboundVariable(name)
                if t.mode == "norm":
                    v = (e.bit_length() if isinstance(e, int) else self._length(e)).bit_length()
                else:
                    v = self.closed(V(name), env)
                total += c * v
            return total
        if isinstance(t, PolyForm):
            total = 0
            for coef, powers in t.monomials:
                term = coef
                for name, e_ in powers:
                    term *= self.closed(length(V(name)), env) ** e_
                total += term
            return total
        raise SigmaError(f"term {t!r} has no closed value here")

    def tr(self, f: Formula, env: dict) -> int:
        b = self.b
        if isinstance(f, Truth):
            return b.const(f.value)
        if isinstance(f, BitAtom):
            j = self.closed(f.index, env)
            if isinstance(f.arg, V):
                e = env.get(f.arg.name, _MISSING)
                if e is _MISSING:
                    raise UnboundVariable(f.arg.name)
                if not isinstance(e, int) and e[0] == "sym":
                    return b.atom(e[1], j) if j < e[2] else b.false
            return b.const(bool(B.bit(j, self.closed(f.arg, env))))
        if isinstance(f, Cmp):
            x, y = self.closed(f.left, env), self.closed(f.right, env)
            return b.const(x < y if f.op == "<" else x <= y if f.op == "<=" else x == y)
        if isinstance(f, Not):
            return b.neg(self.tr(f.arg, env))
        if isinstance(f, (And, Or)):
            return b.nary("and" if isinstance(f, And) else "or", (self.tr(a, env) for a in f.args))
        if isinstance(f, Quant):
            bound = self.closed(f.bound, env)
            if f.kind == "length":
                if bound >= 63 or (1 << bound) > self.limit:
                    raise EnumerationLimit(f"length quantifier 2^{bound} exceeds limit")
                values = [("val", y) for y in range(1 << bound)]
            else:
                if bound > self.limit:
                    raise EnumerationLimit(f"index quantifier {bound} exceeds limit")
                values = list(range(bound))
            parts = []
            for v in values:
                env2 = dict(env)
                env2[f.var] = v
                parts.append(self.tr(f.body, env2))
            return b.nary("and" if f.q == "forall" else "or", parts)
        if isinstance(f, IdAtom):
            entries = []
            for a in f.args:
                if not isinstance(a, V) or a.name not in env:
                    raise SigmaError("ID atom arguments must be bound word variables")
                e = env[a.name]
                entries.append(("val", e) if isinstance(e, int) else e)
            return self.tr_id(f.spec, tuple(entries), self.closed(f.clock, env))
        raise SigmaError(f"not a formula: {f!r}")

    def tr_id(self, spec, entries: tuple, p: int) -> int:
        key = (id(spec), entries, p)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        env = dict(zip(spec.vars, entries))
        ell = self.closed(spec.ell, env)
        n = p.bit_length()
        if not (0 < n <= ell):
            out = self.b.false
        else:
            env[spec.clock] = p
            if n == ell:
                out = self.tr(spec.terminal, env)
            else:
                dvals = [self.tr(d, env) for d in spec.params]
                kids = [self.tr_id(spec, entries, 2 * p), self.tr_id(spec, entries, 2 * p + 1)]
                out = self.gate(spec.gate, dvals + kids)
        self.memo[key] = out
        return out

    def gate(self, g, atoms: list[int]) -> int:
        from . import plof as P

        b = self.b
        if isinstance(g, P.Var):
            return atoms[g.index]
        if isinstance(g, P.Const):
            return b.const(g.value)
        if isinstance(g, P.Not):
            return b.neg(self.gate(g.arg, atoms))
        x, y = self.gate(g.left, atoms), self.gate(g.right, atoms)
        # expand the truth table as a disjunction of minterms
        terms = []
        for a in (0, 1):
            for c in (0, 1):
                if (g.table >> (2 * a + c)) & 1:
                    terms.append(b.nary("and", (x if a else b.neg(x), y if c else b.neg(y))))
        return b.nary("or", terms)


def translate_bool(phi: Formula, word_vars: Sequence[str], xs: Sequence[int], *,
                   index_env: Optional[Mapping[str, int]] = None,
                   budget: int = DEFAULT_NODE_BUDGET, limit: int = DEFAULT_ENUM_LIMIT,
                   check: bool = True) -> BoolSentence:
    """Boolean sentence over p_j^k (k = position of the word variable, from 1)."""
    if len(word_vars) != len(xs):
        raise SigmaError("one value per word variable")
    index_env = dict(index_env or {})
    if check and not check_stratified(phi, word_vars, index_env):
        raise SigmaError("formula is not stratified over the given variables")
    t = _Translator(budget, limit)
    env: dict = {name: ("sym", k, x.bit_length()) for k, (name, x) in enumerate(zip(word_vars, xs), start=1)}
    env.update(index_env)
    root = t.tr(phi, env)
    return BoolSentence(t.b.nodes, root)


def translation_bound(phi: Formula, word_vars: Sequence[str], xs: Sequence[int],
                      index_env: Optional[Mapping[str, int]] = None) -> int:
    """Node count bound: quantifier ranges times formula size, ID atoms by tree size."""
    env: dict = {n: ("sym", k, x.bit_length()) for k, (n, x) in enumerate(zip(word_vars, xs), start=1)}
    env.update(index_env or {})
    tr = _Translator(DEFAULT_NODE_BUDGET, DEFAULT_ENUM_LIMIT)
    return 2 + _bound(phi, env, tr)


def _bound(f: Formula, env: dict, tr: _Translator) -> int:
    if isinstance(f, (Truth, BitAtom, Cmp)):
        return 1
    if isinstance(f, Not):
        return 1 + _bound(f.arg, env, tr)
    if isinstance(f, (And, Or)):
        return 1 + sum(_bound(a, env, tr) for a in f.args)
    if isinstance(f, Quant):
        n = tr.closed(f.bound, env)
        rng = (1 << n) if f.kind == "length" else n
        env2 = dict(env)
        # the body bound is taken at the largest value of the bound variable
        env2[f.var] = ("val", (1 << n) - 1) if f.kind == "length" else max(n - 1, 0)
        return 1 + rng * _bound(f.body, env2, tr)
    if isinstance(f, IdAtom):
        spec = f.spec
        entries = [env[a.name] if not isinstance(env[a.name], int) else ("val", env[a.name]) for a in f.args]
        senv = dict(zip(spec.vars, entries))
        ell = tr.closed(spec.ell, senv)
        senv[spec.clock] = (1 << max(ell, 1)) - 1
        per = _bound(spec.terminal, senv, tr) + sum(_bound(d, senv, tr) for d in spec.params)
        gate_size = 16 * sum(1 for _ in _gate_nodes(spec.gate))
        return (1 << (ell + 1)) * (per + gate_size)
    raise SigmaError(f"not a formula: {f!r}")


def _gate_nodes(g):
    from . import plof as P

    return P.postorder(g)


# ---------------------------------------------------------------------------
# set-term substitution


def subst_set(phi: Formula, y: str, s: SetTerm) -> Formula:
    """Replace Bit(j, y) = 1 by (j < bound and body(j)) and |y| by lh(bound, body)."""
    lh = Lh(s.bound, s.var, s.body)
    clash = (free_vars(s.body) - {s.var}) | term_vars(s.bound)
    return _ss(phi, y, s, lh, frozenset(clash))


def _ss_term(t: Term, y: str, lh: Lh) -> Term:
    if y not in term_vars(t):
        return t
    if isinstance(t, Fn) and t.name == "len" and t.args[0] == V(y):
        return lh
    if isinstance(t, V):
        raise SubstitutionError(f"{y} occurs outside a bit or length position")
    if isinstance(t, Fn):
        return Fn(t.name, tuple(_ss_term(a, y, lh) for a in t.args))
    if isinstance(t, (LinearForm, PolyForm)):
        return _ss_term(_as_fn_tree(t), y, lh)
    if isinstance(t, Lh):
        if t.var == y:
            return Lh(_ss_term(t.bound, y, lh), t.var, t.body)
        raise SubstitutionError(f"{y} occurs inside a nested set term")
    raise SubstitutionError(f"cannot substitute into {t!r}")


def _ss(f: Formula, y: str, s: SetTerm, lh: Lh, clash: frozenset) -> Formula:
    if isinstance(f, Truth):
        return f
    if isinstance(f, BitAtom):
        if f.arg == V(y):
            j = _ss_term(f.index, y, lh)
            return And((Cmp("<", j, s.bound), subst(s.body, s.var, j)))
        return BitAtom(_ss_term(f.index, y, lh), _ss_term(f.arg, y, lh))
    if isinstance(f, Cmp):
        return Cmp(f.op, _ss_term(f.left, y, lh), _ss_term(f.right, y, lh))
    if isinstance(f, IdAtom):
        if y in free_vars(f):
            raise SubstitutionError(f"{y} occurs as an argument of an inductively defined predicate")
        return f
    if isinstance(f, Not):
        return Not(_ss(f.arg, y, s, lh, clash))
    if isinstance(f, (And, Or)):
        return type(f)(tuple(_ss(a, y, s, lh, clash) for a in f.args))
    if isinstance(f, Quant):
        bound = _ss_term(f.bound, y, lh)
        if f.var == y:
            return Quant(f.q, f.kind, f.var, bound, f.body)
        if f.var in clash and y in free_vars(f.body):
            raise SubstitutionError(f"bound variable {f.var} would capture the set term")
        return Quant(f.q, f.kind, f.var, bound, _ss(f.body, y, s, lh, clash))
    raise SigmaError(f"not a formula: {f!r}")


def materialize(s: SetTerm, env: Mapping[str, int], id_eval=None) -> int:
    """The word whose bit set is {i < bound : body(i)}."""
    ctx = _Ctx(id_eval)
    local = dict(env)
    bound = eval_term(s.bound, local, ctx)
    ctx.check_range(bound)
    out = 0
    for i in range(bound):
        local[s.var] = i
        if ctx.eval(s.body, local):
            out |= 1 << i
    return out


# ---------------------------------------------------------------------------
# S-expressions

_TOKEN = re.compile(r"\s*(?:(\()|(\))|([^\s()]+))")


def parse_sexpr(text: str):
    """Nested lists of atoms (str); integers stay strings."""
    pos = 0
    stack: list[list] = [[]]
    text = re.sub(r";[^\n]*", "", text)
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            if text[pos:].strip() == "":
                break
            raise SexprError(f"bad token at offset {pos}")
        pos = m.end()
        if m.group(1):
            stack.append([])
        elif m.group(2):
            if len(stack) == 1:
                raise SexprError(f"unbalanced ')' at offset {pos - 1}")
            done = stack.pop()
            stack[-1].append(done)
        elif m.group(3):
            stack[-1].append(m.group(3))
    if len(stack) != 1:
        raise SexprError("unbalanced '('")
    return stack[0]


def dump_sexpr(x) -> str:
    if isinstance(x, list):
        return "(" + " ".join(dump_sexpr(a) for a in x) + ")"
    return str(x)


def term_to_sx(t: Term):
    if isinstance(t, V):
        return t.name
    if isinstance(t, C):
        return str(t.value)
    if isinstance(t, Fn):
        return [t.name] + [term_to_sx(a) for a in t.args]
    if isinstance(t, LinearForm):
        return ["lin", t.mode] + [[n, str(c)] for n, c in t.coeffs] + [str(t.const)]
    if isinstance(t, PolyForm):
        return ["poly"] + [[str(c)] + [[n, str(e)] for n, e in p] for c, p in t.monomials]
    if isinstance(t, Lh):
        return ["lh", term_to_sx(t.bound), t.var, formula_to_sx(t.body)]
    raise SigmaError(f"not a term: {t!r}")


def _spec_name(spec) -> str:
    return getattr(spec, "name", None) or f"spec{id(spec):x}"


def formula_to_sx(f: Formula):
    if isinstance(f, Truth):
        return "true" if f.value else "false"
    if isinstance(f, BitAtom):
        return ["Bit", term_to_sx(f.index), term_to_sx(f.arg)]
    if isinstance(f, Cmp):
        return [f.op, term_to_sx(f.left), term_to_sx(f.right)]
    if isinstance(f, IdAtom):
        return ["id", _spec_name(f.spec), [term_to_sx(a) for a in f.args], term_to_sx(f.clock)]
    if isinstance(f, Not):
        return ["not", formula_to_sx(f.arg)]
    if isinstance(f, (And, Or)):
        return ["and" if isinstance(f, And) else "or"] + [formula_to_sx(a) for a in f.args]
    if isinstance(f, Quant):
        if f.kind == "index":
            head = [f.var, term_to_sx(f.bound)]
        else:
            head = ["len", f.var, term_to_sx(f.bound)]
        return [f.q, head, formula_to_sx(f.body)]
    raise SigmaError(f"not a formula: {f!r}")


def _int(tok) -> int:
    if isinstance(tok, str) and tok.isdigit():
        return int(tok)
    raise SexprError(f"expected a natural number, got {dump_sexpr(tok)}")


def term_from_sx(x) -> Term:
    try:
        return _term_from_sx(x)
    except (IndexError, TypeError):
        raise SexprError(f"malformed term {dump_sexpr(x)}") from None


def _term_from_sx(x) -> Term:
    if isinstance(x, str):
        return C(int(x)) if x.isdigit() else V(x)
    if not x or not isinstance(x[0], str):
        raise SexprError(f"bad term {dump_sexpr(x)}")
    head = x[0]
    if head == "lin":
        mode = x[1]
        coeffs = tuple(sorted((c[0], _int(c[1])) for c in x[2:-1]))
        return LinearForm(coeffs, _int(x[-1]), mode)
    if head == "poly":
        monos = []
        for m in x[1:]:
            monos.append((_int(m[0]), tuple(sorted((p[0], _int(p[1])) for p in m[1:]))))
        return PolyForm(tuple(monos))
    if head == "lh":
        return Lh(term_from_sx(x[1]), x[2], formula_from_sx(x[3]))
    name = _ALIASES.get(head, head)
    if name not in FUNCTIONS:
        raise SexprError(f"unknown function {head!r}")
    try:
        return Fn(name, tuple(term_from_sx(a) for a in x[1:]))
    except SigmaError as e:
        raise SexprError(str(e)) from None


def formula_from_sx(x, specs: Optional[Mapping[str, object]] = None) -> Formula:
    try:
        return _formula_from_sx(x, specs)
    except (IndexError, TypeError):
        raise SexprError(f"malformed formula {dump_sexpr(x)}") from None


def _formula_from_sx(x, specs: Optional[Mapping[str, object]] = None) -> Formula:
    if isinstance(x, str):
        if x == "true":
            return TOP
        if x == "false":
            return BOT
        raise SexprError(f"bad formula atom {x!r}")
    if not x or not isinstance(x[0], str):
        raise SexprError(f"bad formula {dump_sexpr(x)}")
    head = x[0]
    if head == "Bit":
        return BitAtom(term_from_sx(x[1]), term_from_sx(x[2]))
    if head in ("<", "<=", "="):
        return Cmp(head, term_from_sx(x[1]), term_from_sx(x[2]))
    if head == "not":
        return Not(formula_from_sx(x[1], specs))
    if head in ("and", "or"):
        parts = tuple(formula_from_sx(a, specs) for a in x[1:])
        return And(parts) if head == "and" else Or(parts)
    if head in ("forall", "exists"):
        binder = x[1]
        if len(binder) == 3 and binder[0] == "len":
            return Quant(head, "length", binder[1], term_from_sx(binder[2]), formula_from_sx(x[2], specs))
        return Quant(head, "index", binder[0], term_from_sx(binder[1]), formula_from_sx(x[2], specs))
    if head == "id":
        name = x[1]
        if specs is None or name not in specs:
            raise SexprError(f"unknown inductive predicate {name!r}")
        return IdAtom(specs[name], tuple(term_from_sx(a) for a in x[2]), term_from_sx(x[3]))
    raise SexprError(f"unknown formula head {head!r}")


def format_formula(f: Formula) -> str:
    return dump_sexpr(formula_to_sx(f))


def parse_formula(text: str, specs: Optional[Mapping[str, object]] = None) -> Formula:
    items = parse_sexpr(text)
    if len(items) != 1:
        raise SexprError("expected exactly one formula")
    return formula_from_sx(items[0], specs)


# ---------------------------------------------------------------------------
# random stratified formulas (test corpus)


def random_stratified(rng, word_vars: Sequence[str], depth: int = 3, index_vars: Sequence[str] = (),
                      max_quant_bound: int = 4, fresh: Optional[list] = None,
                      word_bias: float = 0.0) -> Formula:
    """Random member of the stratified class over (word_vars; index_vars).

    ``word_bias`` is the extra chance that an atom reads a bit of a word
    variable, the only atom kind that survives translation unfolded."""
    fresh = fresh if fresh is not None else [0]
    W, I = list(word_vars), list(index_vars)

    def linear():
        coeffs = {i: rng.randrange(0, 3) for i in I if rng.random() < 0.6}
        coeffs = {k: v for k, v in coeffs.items() if v}
        return LinearForm(tuple(sorted(coeffs.items())), rng.randrange(0, 5), "index")

    def atom():
        choices = ["bitx", "bitlen", "bitprod", "le"]
        if I:
            choices += ["biti", "bitleni", "ilt"]
        kind = "bitx" if rng.random() < word_bias else rng.choice(choices)
        if kind == "bitx":
            return BitAtom(linear(), V(rng.choice(W)))
        if kind == "bitlen":
            return BitAtom(linear(), length(V(rng.choice(W))))
        if kind == "bitprod":
            return BitAtom(linear(), Fn("mul", (length(V(rng.choice(W))), length(V(rng.choice(W))))))
        if kind == "le":
            return Cmp("<=", linear(), linear())
        if kind == "biti":
            return BitAtom(linear(), V(rng.choice(I)))
        if kind == "bitleni":
            return BitAtom(linear(), length(V(rng.choice(I))))
        return Cmp("<", V(rng.choice(I)), length(V(rng.choice(W))))

    if depth <= 0 or rng.random() < 0.2:
        return atom()
    r = rng.random()
    if r < 0.15:
        return Not(random_stratified(rng, W, depth - 1, I, max_quant_bound, fresh, word_bias))
    if r < 0.55:
        k = rng.randrange(2, 4)
        parts = tuple(random_stratified(rng, W, depth - 1, I, max_quant_bound, fresh, word_bias) for _ in range(k))
        return And(parts) if rng.random() < 0.5 else Or(parts)
    fresh[0] += 1
    q = rng.choice(("forall", "exists"))
    if r < 0.8:
        var = f"i{fresh[0]}"
        if rng.random() < 0.5:
            bound: Term = C(rng.randrange(0, max_quant_bound + 1))
        else:
            bound = poly((1, {rng.choice(W): 1}), (rng.randrange(0, 2), {}))
        return Quant(q, "index", var, bound, random_stratified(rng, W, depth - 1, I + [var], max_quant_bound, fresh, word_bias))
    var = f"y{fresh[0]}"
    if rng.random() < 0.5:
        bound = C(rng.randrange(0, 3))
    else:
        bound = LinearForm(((rng.choice(W), 1),), 0, "norm")
    return Quant(q, "length", var, bound, random_stratified(rng, W + [var], depth - 1, I, max_quant_bound, fresh, word_bias))
