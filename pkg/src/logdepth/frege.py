"""Frege proofs over coded formulas: schematic axioms plus modus ponens.

A proof is a list of formula words; coded as one word the lines are joined
by commas.  Matching works on decoded trees and treats a connective applied
to swapped operands as its converse, since the longer-operand-first coding
may swap operands."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from importlib import resources
from typing import Optional, Sequence

from . import fastplof as FP
from . import plof as P
from .sigma import SexprError, dump_sexpr, parse_sexpr


class FregeError(ValueError):
    pass


_OPS = {names[1]: tt for tt, names in P.BINARY_NAMES.items()}
_OP_NAME = {tt: name for name, tt in _OPS.items()}


# ---------------------------------------------------------------------------
# schemes


@dataclass(frozen=True)
class SVar:
    name: str


Pattern = object  # SVar | P.Const | P.Not over patterns | P.Bin over patterns


def pattern_from_sx(x) -> Pattern:
    if isinstance(x, str):
        if x == "top":
            return P.Top
        if x == "bot":
            return P.Bot
        if x[:1].isupper():
            return SVar(x)
        raise SexprError(f"bad scheme atom {x!r}")
    head = x[0]
    if head == "not" and len(x) == 2:
        return P.Not(pattern_from_sx(x[1]))
    if head in _OPS and len(x) == 3:
        return P.Bin(_OPS[head], pattern_from_sx(x[1]), pattern_from_sx(x[2]))
    raise SexprError(f"bad scheme {dump_sexpr(x)}")


def pattern_to_sx(p):
    if isinstance(p, SVar):
        return p.name
    if isinstance(p, P.Const):
        return "top" if p.value else "bot"
    if isinstance(p, P.Not):
        return ["not", pattern_to_sx(p.arg)]
    return [_OP_NAME[p.table], pattern_to_sx(p.left), pattern_to_sx(p.right)]


def schematic_vars(p) -> list[str]:
    out: list[str] = []
    stack = [p]
    while stack:
        q = stack.pop()
        if isinstance(q, SVar):
            if q.name not in out:
                out.append(q.name)
        elif isinstance(q, P.Not):
            stack.append(q.arg)
        elif isinstance(q, P.Bin):
            stack.extend((q.right, q.left))
    return out


def instantiate(p, binding: dict) -> P.Formula:
    if isinstance(p, SVar):
        return binding[p.name]
    if isinstance(p, P.Const):
        return p
    if isinstance(p, P.Not):
        return P.Not(instantiate(p.arg, binding))
    return P.Bin(p.table, instantiate(p.left, binding), instantiate(p.right, binding))


@dataclass(frozen=True)
class Scheme:
    name: str
    pattern: object


@dataclass
class FregeSystem:
    schemes: list

    @classmethod
    def from_text(cls, text: str) -> "FregeSystem":
        schemes = []
        for item in parse_sexpr(text):
            if not (isinstance(item, list) and len(item) == 3 and item[0] == "scheme"):
                raise SexprError("expected (scheme NAME FORMULA)")
            s = Scheme(item[1], pattern_from_sx(item[2]))
            names = schematic_vars(s.pattern)
            for bits in itertools.product((False, True), repeat=len(names)):
                f = instantiate(s.pattern, {n: P.Const(b) for n, b in zip(names, bits)})
                if not P.naive_eval(f):
                    raise FregeError(f"scheme {s.name} is not a tautology")
            schemes.append(s)
        return cls(schemes)

    @classmethod
    def default(cls) -> "FregeSystem":
        return cls.from_text(resources.files("logdepth").joinpath("data/frege.axioms").read_text())

    def to_text(self) -> str:
        return "".join(f"(scheme {s.name} {dump_sexpr(pattern_to_sx(s.pattern))})\n" for s in self.schemes)

    def match(self, f: P.Formula) -> Optional[str]:
        """Name of the first scheme that ``f`` instantiates, or None."""
        keys: dict = {}
        for s in self.schemes:
            if next(_match(s.pattern, f, {}, keys), None) is not None:
                return s.name
        return None


def key(f: P.Formula, memo: Optional[dict] = None):
    """Identity of a formula up to operand swaps with the converse connective."""
    memo = {} if memo is None else memo
    for node in P.postorder(f):
        if id(node) in memo:
            continue
        if isinstance(node, P.Var):
            k = ("v", node.index)
        elif isinstance(node, P.Const):
            k = ("c", node.value)
        elif isinstance(node, P.Not):
            k = ("n", memo[id(node.arg)])
        else:
            a, b = memo[id(node.left)], memo[id(node.right)]
            k = min((node.table, a, b), (P.converse_table(node.table), b, a))
            k = ("b",) + k
        memo[id(node)] = k
    return memo[id(f)]


def _match(p, f, binding: dict, keys: dict):
    """Yield every binding extending ``binding`` under which f instantiates p."""
    if isinstance(p, SVar):
        k = key(f, keys)
        if p.name in binding:
            if binding[p.name] == k:
                yield binding
        else:
            yield {**binding, p.name: k}
        return
    if isinstance(p, P.Const):
        if isinstance(f, P.Const) and f.value == p.value:
            yield binding
        return
    if isinstance(p, P.Not):
        if isinstance(f, P.Not):
            yield from _match(p.arg, f.arg, binding, keys)
        return
    if not isinstance(f, P.Bin):
        return
    for table, left, right in ((f.table, f.left, f.right), (P.converse_table(f.table), f.right, f.left)):
        if table == p.table:
            for b in _match(p.left, left, binding, keys):
                yield from _match(p.right, right, b, keys)


# ---------------------------------------------------------------------------
# proofs


@dataclass
class FregeProof:
    lines: list = field(default_factory=list)

    def to_word(self) -> P.SymbolWord:
        return P.SymbolWord.join_commas(self.lines)

    @classmethod
    def from_word(cls, x: P.SymbolWord) -> "FregeProof":
        return cls(x.split_commas())

    def to_fpf(self) -> str:
        return ",".join(w.to_hex() for w in self.lines) + "\n"

    @classmethod
    def from_fpf(cls, text: str) -> "FregeProof":
        parts = [t.strip() for t in text.strip().split(",")]
        if parts == [""]:
            return cls([])
        return cls([P.SymbolWord.from_hex(t) for t in parts])


def beta(i: int, x: P.SymbolWord) -> P.SymbolWord:
    """The i-th comma-separated segment of x (from 0)."""
    parts = x.split_commas()
    if not 0 <= i < len(parts):
        raise IndexError(f"segment {i} of {len(parts)}")
    return parts[i]


@dataclass
class CheckResult:
    ok: bool
    line: Optional[int] = None
    reason: str = ""
    justification: list = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok

    def report(self) -> dict:
        return {"accepted": self.ok, "line": self.line, "reason": self.reason,
                "justification": self.justification}


def _implication(f: P.Formula):
    if isinstance(f, P.Bin):
        if f.table == 11:
            return f.left, f.right
        if f.table == 13:
            return f.right, f.left
    return None


def check_proof(proof: FregeProof, system: FregeSystem, target: Optional[P.SymbolWord] = None) -> CheckResult:
    """Every line an axiom instance or a modus ponens consequence of two
    earlier lines, and the last line equal to ``target`` (up to swaps)."""
    seen: dict = {}
    consequents: dict = {}
    just: list = []
    if not proof.lines:
        return CheckResult(False, None, "empty proof")
    for n, line in enumerate(proof.lines):
        if not P.is_postfix_formula(line):
            return CheckResult(False, n, "not a formula", just)
        f = P.from_plof(line)
        memo: dict = {}
        k = key(f, memo)
        name = system.match(f)
        if name is not None:
            just.append(["axiom", name])
        else:
            via = None
            for a, idx in consequents.get(k, ()):
                if a in seen:
                    via = (seen[a], idx)
                    break
            if via is None:
                return CheckResult(False, n, "neither an axiom instance nor a modus ponens step", just)
            just.append(["mp", via[0], via[1]])
        seen.setdefault(k, n)
        imp = _implication(f)
        if imp is not None:
            consequents.setdefault(key(imp[1], memo), []).append((key(imp[0], memo), n))
    if target is not None:
        if not P.is_postfix_formula(target) or key(P.from_plof(target)) != key(P.from_plof(proof.lines[-1])):
            return CheckResult(False, len(proof.lines) - 1, "last line differs from the target", just)
    return CheckResult(True, None, "", just)


def reflection_check(proof: FregeProof, system: FregeSystem, sigma) -> bool:
    """If the proof checks, every line is true under sigma."""
    if not check_proof(proof, system):
        return True
    return all(FP.true_plof(line, sigma) for line in proof.lines)


def taut_check(x: P.SymbolWord, max_vars: int = 20, algo: str = "balanced") -> bool:
    return FP.taut_check(x, max_vars, algo)


# ---------------------------------------------------------------------------
# proof generation and mutation (test corpus)


def _imp(a, b):
    return P.Bin(11, a, b)


def _scheme(system, name):
    for s in system.schemes:
        if s.name == name:
            return s
    raise FregeError(f"no scheme {name}")


def generate_proof(rng, system: FregeSystem, nvars: int = 16, steps: int = 6, size: int = 3) -> FregeProof:
    """Random proof built from axiom instances and modus ponens chains."""
    pool = rng.sample(range(16), min(nvars, 16)) if nvars <= 16 else list(range(nvars))
    proven: list = []
    lines: list = []

    def small():
        f = P.random_formula(rng, rng.randrange(1, size + 1), nvars=len(pool), p_const=0.05)
        return _rename(f, pool)

    def add(f):
        lines.append(P.to_plof(f))
        proven.append(f)
        return f

    def instance(s):
        return instantiate(s.pattern, {n: small() for n in schematic_vars(s.pattern)})

    add(instance(rng.choice(system.schemes)))
    for _ in range(rng.randrange(1, steps + 1)):
        move = rng.random()
        if move < 0.2:
            add(instance(rng.choice(system.schemes)))
        elif move < 0.5:
            a = rng.choice(proven)
            b = small()
            add(_imp(a, _imp(b, a)))
            add(_imp(b, a))
        elif move < 0.7:
            cands = [f for f in proven if (imp := _implication(f)) and _implication(imp[1])]
            if not cands:
                continue
            a, rest = _implication(rng.choice(cands))
            b, c = _implication(rest)
            s_inst = _imp(_imp(a, _imp(b, c)), _imp(_imp(a, b), _imp(a, c)))
            add(s_inst)
            add(_imp(_imp(a, b), _imp(a, c)))
        else:
            pairs = [(f, g) for f in proven for g in proven
                     if (imp := _implication(f)) and key(imp[0]) == key(g)]
            if pairs:
                f, _ = rng.choice(pairs)
                add(_implication(f)[1])
            else:
                a = rng.choice(proven)
                b = small()
                add(_imp(a, _imp(b, a)))
                add(_imp(b, a))
    return FregeProof(lines)


def _rename(f, pool):
    if isinstance(f, P.Var):
        return P.Var(pool[f.index % len(pool)])
    if isinstance(f, P.Not):
        return P.Not(_rename(f.arg, pool))
    if isinstance(f, P.Bin):
        return P.Bin(f.table, _rename(f.left, pool), _rename(f.right, pool))
    return f


def _nodes(f):
    return list(P.postorder(f))


def _replace(f, target, new):
    if f is target:
        return new
    if isinstance(f, P.Not):
        return P.Not(_replace(f.arg, target, new))
    if isinstance(f, P.Bin):
        return P.Bin(f.table, _replace(f.left, target, new), _replace(f.right, target, new))
    return f


def mutate_line(rng, line: P.SymbolWord, nvars: int = 16, tries: int = 1000) -> P.SymbolWord:
    """Random local edit of a line, retried until the result is not a tautology."""
    f = P.from_plof(line)
    for _ in range(tries):
        node = rng.choice(_nodes(f))
        r = rng.random()
        if isinstance(node, P.Bin) and r < 0.4:
            new = P.Bin(rng.choice([t for t in P.BINARY_TABLES if t != node.table]), node.left, node.right)
        elif isinstance(node, P.Var) and r < 0.6:
            new = P.Var(rng.choice([v for v in range(max(nvars, 2)) if v != node.index]))
        elif r < 0.8:
            new = P.Not(node)
        else:
            new = P.Var(rng.randrange(max(nvars, 2)))
        g = _replace(f, node, new)
        w = P.to_plof(g)
        if not FP.taut_check(w, max_vars=64, algo="naive"):
            return w
    raise FregeError("no non-tautological mutation found")
