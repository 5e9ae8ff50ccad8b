"""Symbol-coded propositional formulas and log-depth evaluation.

Formulas are coded as words over a 19-letter alphabet, 5 bits per letter.
The evaluation algorithm splits a formula into at most four pieces around
breakpoints chosen inside a window (m, n] whose width follows the schedule
Delta_0 = 2, eps_u = Delta_u // 2, Delta_{u+1} = Delta_u + eps_u, and
recurses into sub-windows.  A piece may miss one operand (its "scar"); its
value is the pair (value if scar is true, value if scar is false).

Positions of logical symbols are 1-based throughout, as are intervals.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping, Sequence, Union


class PlofError(ValueError):
    pass


class ParseError(PlofError):
    def __init__(self, msg: str, offset: int):
        super().__init__(f"{msg} at offset {offset}")
        self.offset = offset


# ---------------------------------------------------------------------------
# alphabet

SYM_P, SYM_0, SYM_1, SYM_LPAREN, SYM_RPAREN, SYM_COMMA = 1, 2, 3, 4, 5, 6
SYM_TOP, SYM_BOT, SYM_NOT = 7, 8, 9

# Binary connectives that depend on both arguments, in increasing order of
# their truth table tt, where bit (2a + b) of tt is f(a, b).
BINARY_TABLES = (1, 2, 4, 6, 7, 8, 9, 11, 13, 14)
BINARY_NAMES = {
    1: ("↓", "nor"),
    2: ("↚", "<-/"),
    4: ("↛", "-/>"),
    6: ("⊕", "^"),
    7: ("↑", "nand"),
    8: ("∧", "&"),
    9: ("↔", "<->"),
    11: ("→", "->"),
    13: ("←", "<-"),
    14: ("∨", "|"),
}
SYM_OF_TABLE = {tt: 10 + k for k, tt in enumerate(BINARY_TABLES)}
TABLE_OF_SYM = {s: tt for tt, s in SYM_OF_TABLE.items()}
ALL_SYMBOLS = tuple(range(1, 20))

_SYM_TEXT = {
    SYM_P: "p", SYM_0: "0", SYM_1: "1", SYM_LPAREN: "(", SYM_RPAREN: ")",
    SYM_COMMA: ",", SYM_TOP: "⊤", SYM_BOT: "⊥", SYM_NOT: "¬",
}
_SYM_TEXT.update({s: BINARY_NAMES[tt][0] for s, tt in TABLE_OF_SYM.items()})


def apply_table(tt: int, a: bool, b: bool) -> bool:
    return bool((tt >> (2 * int(a) + int(b))) & 1)


def converse_table(tt: int) -> int:
    """Table of (a, b) -> f(b, a); the ten binary connectives are closed under it."""
    return (tt & 0b1001) | ((tt & 0b0010) << 1) | ((tt & 0b0100) >> 1)


def symbol_table() -> list[tuple[str, str]]:
    """(glyph, 5-bit code) rows, code written most significant bit first."""
    return [(_SYM_TEXT[s], format(s, "05b")) for s in ALL_SYMBOLS]


# ---------------------------------------------------------------------------
# ASTs


@dataclass(frozen=True)
class Var:
    index: int


@dataclass(frozen=True)
class Const:
    value: bool


@dataclass(frozen=True)
class Not:
    arg: "Formula"


@dataclass(frozen=True)
class Bin:
    table: int
    left: "Formula"
    right: "Formula"


Formula = Union[Var, Const, Not, Bin]


def And(a, b):
    return Bin(8, a, b)


def Or(a, b):
    return Bin(14, a, b)


def Implies(a, b):
    return Bin(11, a, b)


def Iff(a, b):
    return Bin(9, a, b)


def Xor(a, b):
    return Bin(6, a, b)


Top, Bot = Const(True), Const(False)


def _children(f):
    if isinstance(f, Not):
        return (f.arg,)
    if isinstance(f, Bin):
        return (f.left, f.right)
    return ()


def postorder(f: Formula):
    """Iterative post-order walk (formulas can be deeper than the recursion limit)."""
    stack = [(f, False)]
    while stack:
        node, done = stack.pop()
        if done:
            yield node
            continue
        stack.append((node, True))
        for ch in reversed(_children(node)):
            stack.append((ch, False))


def logical_size(f: Formula) -> dict:
    """Map id(node) -> number of logical symbols of the node's formula."""
    size: dict = {}
    for node in postorder(f):
        size[id(node)] = 1 + sum(size[id(c)] for c in _children(node))
    return size


def variables(f: Formula) -> set[int]:
    return {n.index for n in postorder(f) if isinstance(n, Var)}


def _as_bool_map(sigma) -> Mapping[int, bool]:
    return sigma if sigma is not None else {}


def naive_eval(x: Union[Formula, "SymbolWord"], sigma=None) -> bool:
    """Plain recursive (stack based) truth evaluation; missing variables are false."""
    sigma = _as_bool_map(sigma)
    if isinstance(x, SymbolWord):
        return _naive_postfix(x.logical(), sigma)
    val: dict = {}
    for node in postorder(x):
        if isinstance(node, Var):
            v = bool(sigma.get(node.index, False))
        elif isinstance(node, Const):
            v = node.value
        elif isinstance(node, Not):
            v = not val[id(node.arg)]
        else:
            v = apply_table(node.table, val[id(node.left)], val[id(node.right)])
        val[id(node)] = v
    return val[id(x)]


def _naive_postfix(syms, sigma) -> bool:
    stack: list[bool] = []
    for kind, data in syms:
        if kind == "var":
            stack.append(bool(sigma.get(data, False)))
        elif kind == "const":
            stack.append(data)
        elif kind == "not":
            if not stack:
                raise PlofError("negation without operand")
            stack.append(not stack.pop())
        elif kind == "bin":
            if len(stack) < 2:
                raise PlofError("binary connective without two operands")
            b = stack.pop()
            a = stack.pop()
            stack.append(apply_table(data, a, b))
        else:
            raise PlofError(f"symbol {kind!r} cannot occur in a formula")
    if len(stack) != 1:
        raise PlofError("word is not a single formula")
    return stack[0]


def format_infix(f: Formula) -> str:
    out: dict = {}
    for node in postorder(f):
        if isinstance(node, Var):
            s = "p" + format(node.index, "b")
        elif isinstance(node, Const):
            s = "⊤" if node.value else "⊥"
        elif isinstance(node, Not):
            s = "¬" + out[id(node.arg)]
        else:
            s = f"({out[id(node.left)]} {BINARY_NAMES[node.table][0]} {out[id(node.right)]})"
        out[id(node)] = s
    return out[id(f)]


# ---------------------------------------------------------------------------
# infix parser

_ASSOCIATIVE = {8, 14, 6, 9}
_BIN_TOKENS = sorted(
    [(g, tt) for tt, names in BINARY_NAMES.items() for g in names], key=lambda t: -len(t[0])
)
_TOKEN_RE = re.compile(r"\s+")


def _tokenize(text: str):
    toks = []
    pos = 0
    n = len(text)
    while pos < n:
        ch = text[pos]
        if ch.isspace():
            pos += 1
            continue
        if ch == "p":
            end = pos + 1
            while end < n and text[end] in "01":
                end += 1
            if end == pos + 1:
                raise ParseError("variable needs binary digits", end)
            toks.append(("var", int(text[pos + 1:end], 2), pos))
            pos = end
            continue
        if ch in "()":
            toks.append((ch, None, pos))
            pos += 1
            continue
        if ch in "¬~!" and not text.startswith("!&", pos) and not text.startswith("!|", pos):
            toks.append(("not", None, pos))
            pos += 1
            continue
        for word, value in (("⊤", True), ("⊥", False), ("T", True), ("F", False)):
            if text.startswith(word, pos):
                toks.append(("const", value, pos))
                pos += len(word)
                break
        else:
            for glyph, tt in _BIN_TOKENS:
                if text.startswith(glyph, pos):
                    toks.append(("bin", tt, pos))
                    pos += len(glyph)
                    break
            else:
                if text.startswith("!&", pos):
                    toks.append(("bin", 7, pos))
                    pos += 2
                elif text.startswith("!|", pos):
                    toks.append(("bin", 1, pos))
                    pos += 2
                else:
                    raise ParseError(f"unexpected character {ch!r}", pos)
    return toks


def parse_infix(text: str) -> Formula:
    """Parse human infix syntax.

    Binary connectives share one precedence level; a chain like
    ``p0 & p1 & p10`` groups to the left but only for the associative
    connectives and only when the connective repeats.  Mixed chains need
    parentheses.
    """
    toks = _tokenize(text)
    end = len(text)
    pos = 0

    def peek():
        return toks[pos] if pos < len(toks) else None

    def offset():
        t = peek()
        return t[2] if t else end

    def unary():
        nonlocal pos
        t = peek()
        if t is None:
            raise ParseError("unexpected end of input", end)
        kind = t[0]
        if kind == "not":
            pos += 1
            return Not(unary())
        if kind == "var":
            pos += 1
            return Var(t[1])
        if kind == "const":
            pos += 1
            return Const(t[1])
        if kind == "(":
            pos += 1
            inner = chain()
            t2 = peek()
            if t2 is None or t2[0] != ")":
                raise ParseError("expected ')'", offset())
            pos += 1
            return inner
        raise ParseError(f"unexpected token {text[t[2]]!r}", t[2])

    def chain():
        nonlocal pos
        left = unary()
        first = None
        while peek() is not None and peek()[0] == "bin":
            t = peek()
            if first is None:
                first = t[1]
            elif t[1] != first or first not in _ASSOCIATIVE:
                raise ParseError("mixed connectives need parentheses", t[2])
            pos += 1
            left = Bin(t[1], left, unary())
        return left

    f = chain()
    if pos != len(toks):
        raise ParseError("trailing input", toks[pos][2])
    return f


# ---------------------------------------------------------------------------
# symbol words


class SymbolWord:
    """Sequence of 5-bit symbol codes; symbol 1 sits in the lowest bits when packed."""

    __slots__ = ("codes", "_logical")

    def __init__(self, codes: Sequence[int]):
        codes = tuple(int(c) for c in codes)
        for c in codes:
            if c not in ALL_SYMBOLS:
                raise PlofError(f"invalid symbol code {c}")
        self.codes = codes
        self._logical = None

    def __eq__(self, other):
        return isinstance(other, SymbolWord) and self.codes == other.codes

    def __hash__(self):
        return hash(self.codes)

    def __len__(self):
        return len(self.codes)

    def __repr__(self):
        return f"SymbolWord({str(self)!r})"

    def __str__(self):
        return " ".join(_render(k, d) for k, d in self.logical())

    def to_int(self) -> int:
        out = 0
        for pos, c in enumerate(self.codes):
            out |= c << (5 * pos)
        return out

    @classmethod
    def from_int(cls, n: int) -> "SymbolWord":
        codes = []
        while n:
            codes.append(n & 31)
            n >>= 5
        return cls(codes)

    def to_hex(self) -> str:
        return format(self.to_int(), "x")

    @classmethod
    def from_hex(cls, text: str) -> "SymbolWord":
        text = text.strip()
        try:
            return cls.from_int(int(text, 16)) if text else cls(())
        except ValueError:
            raise PlofError("not a hex-packed symbol word") from None

    def logical(self) -> list[tuple[str, object]]:
        """Logical symbols in order: (kind, data) with digits folded into variables."""
        if self._logical is not None:
            return self._logical
        out: list[tuple[str, object]] = []
        codes = self.codes
        k = 0
        n = len(codes)
        while k < n:
            c = codes[k]
            if c == SYM_P:
                end = k + 1
                while end < n and codes[end] in (SYM_0, SYM_1):
                    end += 1
                digits = "".join("0" if d == SYM_0 else "1" for d in codes[k + 1:end])
                out.append(("var", int(digits, 2) if digits else -1))
                k = end
                continue
            if c in (SYM_0, SYM_1):
                out.append(("digit", c))
            elif c == SYM_TOP:
                out.append(("const", True))
            elif c == SYM_BOT:
                out.append(("const", False))
            elif c == SYM_NOT:
                out.append(("not", None))
            elif c in TABLE_OF_SYM:
                out.append(("bin", TABLE_OF_SYM[c]))
            elif c == SYM_COMMA:
                out.append(("comma", None))
            else:
                out.append(("paren", c))
            k += 1
        self._logical = out
        return out

    def logical_length(self) -> int:
        return len(self.logical())

    def split_commas(self) -> list["SymbolWord"]:
        parts: list[list[int]] = [[]]
        for c in self.codes:
            if c == SYM_COMMA:
                parts.append([])
            else:
                parts[-1].append(c)
        return [SymbolWord(p) for p in parts]

    @classmethod
    def join_commas(cls, words: Sequence["SymbolWord"]) -> "SymbolWord":
        codes: list[int] = []
        for k, w in enumerate(words):
            if k:
                codes.append(SYM_COMMA)
            codes.extend(w.codes)
        return cls(codes)


def _render(kind, data) -> str:
    if kind == "var":
        return "p" + ("" if data < 0 else format(data, "b"))
    if kind == "const":
        return "⊤" if data else "⊥"
    if kind == "not":
        return "¬"
    if kind == "bin":
        return BINARY_NAMES[data][0]
    if kind == "comma":
        return ","
    if kind == "digit":
        return "0" if data == SYM_0 else "1"
    return _SYM_TEXT[data]


def _var_codes(n: int) -> list[int]:
    return [SYM_P] + [SYM_1 if ch == "1" else SYM_0 for ch in format(n, "b")]


def word_from_postfix_text(text: str) -> SymbolWord:
    """Build a word from space separated postfix tokens such as ``p0 p1 ∧``."""
    codes: list[int] = []
    for tok in text.split():
        if tok.startswith("p") and len(tok) > 1 and set(tok[1:]) <= {"0", "1"}:
            codes.extend(_var_codes(int(tok[1:], 2)))
        elif tok in ("⊤", "T"):
            codes.append(SYM_TOP)
        elif tok in ("⊥", "F"):
            codes.append(SYM_BOT)
        elif tok in ("¬", "~", "!"):
            codes.append(SYM_NOT)
        elif tok == ",":
            codes.append(SYM_COMMA)
        else:
            for tt, names in BINARY_NAMES.items():
                if tok in names:
                    codes.append(SYM_OF_TABLE[tt])
                    break
            else:
                raise PlofError(f"unknown postfix token {tok!r}")
    return SymbolWord(codes)


def to_plof(f: Formula) -> SymbolWord:
    """Postfix coding, longer operand first (ties keep the left operand first).

    When the operands are swapped the connective is replaced by its converse,
    so the word denotes the same function.
    """
    size = logical_size(f)
    codes: list[int] = []
    stack: list = [(f, False)]
    while stack:
        node, emit = stack.pop()
        if emit is not False:
            if isinstance(node, Not):
                codes.append(SYM_NOT)
            else:
                codes.append(SYM_OF_TABLE[emit])
            continue
        if isinstance(node, Var):
            codes.extend(_var_codes(node.index))
        elif isinstance(node, Const):
            codes.append(SYM_TOP if node.value else SYM_BOT)
        elif isinstance(node, Not):
            stack.append((node, -1))
            stack.append((node.arg, False))
        else:
            first, second = node.left, node.right
            table = node.table
            if size[id(second)] > size[id(first)]:
                first, second = second, first
                table = converse_table(table)
            stack.append((node, table))
            stack.append((second, False))
            stack.append((first, False))
    return SymbolWord(codes)


def from_plof(x: SymbolWord) -> Formula:
    """Decode a postfix word back to an AST.  Operand order is as written."""
    stack: list = []
    for kind, data in x.logical():
        if kind == "var":
            if data < 0:
                raise PlofError("variable without index")
            stack.append(Var(data))
        elif kind == "const":
            stack.append(Const(data))
        elif kind == "not":
            if not stack:
                raise PlofError("negation without operand")
            stack.append(Not(stack.pop()))
        elif kind == "bin":
            if len(stack) < 2:
                raise PlofError("binary connective without two operands")
            b = stack.pop()
            a = stack.pop()
            stack.append(Bin(data, a, b))
        else:
            raise PlofError(f"symbol {kind!r} cannot occur in a formula")
    if len(stack) != 1:
        raise PlofError("word is not a single formula")
    return stack[0]


def is_postfix_formula(x: SymbolWord) -> bool:
    """Counting criterion: first symbol atomic, atoms = 1 + binaries overall,
    and atoms exceed binaries on every proper prefix."""
    syms = x.logical()
    if not syms:
        return False
    atoms = binaries = 0
    for pos, (kind, data) in enumerate(syms):
        if kind in ("digit", "comma", "paren") or (kind == "var" and data < 0):
            return False
        if pos == 0 and kind not in ("var", "const"):
            return False
        if kind in ("var", "const"):
            atoms += 1
        elif kind == "bin":
            binaries += 1
        if pos < len(syms) - 1 and atoms <= binaries:
            return False
    return atoms == binaries + 1


def is_plof(x: SymbolWord) -> bool:
    """Postfix formula whose binary nodes all put the longer operand first."""
    if not is_postfix_formula(x):
        return False
    t = FormulaTree(x)
    for k in range(1, t.n + 1):
        if t.kind[k] == K_BIN:
            right = k - 1
            left = t.start[right] - 1
            if (right - t.start[right] + 1) > (left - t.start[left] + 1):
                return False
    return True


# ---------------------------------------------------------------------------
# tree structure over logical-symbol positions

K_VAR, K_TOP, K_BOT, K_NOT, K_BIN = 0, 1, 2, 3, 4


class FormulaTree:
    """Parse structure of a postfix formula word.

    ``start[k]`` is the first position of the subformula ending at k, so
    that subformula is [start[k], k].  ``up[t][k]`` is the 2**t-th ancestor
    (``n + 1`` when there is none).
    """

    def __init__(self, x: SymbolWord):
        if not is_postfix_formula(x):
            raise PlofError("not a postfix formula")
        syms = x.logical()
        n = len(syms)
        self.n = n
        self.kind = [K_VAR] * (n + 2)
        self.data = [0] * (n + 2)
        self.start = list(range(n + 2))
        parent = [n + 1] * (n + 2)
        stack: list[int] = []
        for pos, (kind, data) in enumerate(syms, start=1):
            if kind == "var":
                self.kind[pos], self.data[pos] = K_VAR, data
                stack.append(pos)
            elif kind == "const":
                self.kind[pos] = K_TOP if data else K_BOT
                stack.append(pos)
            elif kind == "not":
                self.kind[pos] = K_NOT
                c = stack.pop()
                parent[c] = pos
                self.start[pos] = self.start[c]
                stack.append(pos)
            else:
                self.kind[pos], self.data[pos] = K_BIN, data
                b = stack.pop()
                a = stack.pop()
                parent[a] = parent[b] = pos
                self.start[pos] = self.start[a]
                stack.append(pos)
        self.parent = parent
        up = [parent]
        span = 1
        while span < n:
            prev = up[-1]
            up.append([prev[prev[k]] if prev[k] <= n else n + 1 for k in range(n + 2)])
            span *= 2
        self.up = up

    def is_desc(self, j: int, i: int) -> bool:
        """j ⊴ i: symbol j lies in the subformula ending at i."""
        return 1 <= i <= self.n and self.start[i] <= j <= i

    def max_ancestor(self, v: int, bound: int) -> int:
        """Largest ancestor of v (v included) that is <= bound; 0 if v > bound."""
        if v > bound or v < 1:
            return 0
        for row in reversed(self.up):
            w = row[v]
            if w <= bound:
                v = w
        return v

    def lca(self, a: int, b: int) -> int:
        """min{k : a ⊴ k and b ⊴ k}; n + 1 when there is none."""
        if a > b:
            a, b = b, a
        if a < 1:
            return self.n + 1
        if self.start[b] <= a:
            return b
        for row in reversed(self.up):
            w = row[b]
            if w <= self.n and self.start[w] > a:
                b = w
        return self.parent[b]


def subformula_at(x: SymbolWord, j: int) -> tuple[int, int]:
    t = FormulaTree(x)
    if not 1 <= j <= t.n:
        raise PlofError("position out of range")
    return (t.start[j], j)


def in_rel(x: SymbolWord, j: int, i: int) -> bool:
    return FormulaTree(x).is_desc(j, i)


def lca(x: SymbolWord, i: int, j: int) -> int:
    return FormulaTree(x).lca(i, j)


# ---------------------------------------------------------------------------
# schedule


@lru_cache(maxsize=None)
def delta_eps(u: int) -> tuple[int, int]:
    if u < 0:
        raise PlofError("schedule index must be >= 0")
    d = 2
    for _ in range(u):
        d += d // 2
    return d, d // 2


def delta(u: int) -> int:
    return delta_eps(u)[0]


def eps(u: int) -> int:
    return delta_eps(u)[1]


def least_u(span: int) -> int:
    """Least u >= 0 with Delta_{u+1} >= span."""
    u = 0
    while delta(u + 1) < span:
        u += 1
    return u


def window_level(m: int, n: int) -> int:
    """The u with n - m = Delta_{u+1}; error if the width is off schedule."""
    w = n - m
    u = 0
    while delta(u + 1) < w:
        u += 1
    if delta(u + 1) != w:
        raise PlofError(f"window width {w} is not on the schedule")
    return u


# ---------------------------------------------------------------------------
# breakpoints and pieces

TruthPair = tuple[bool, bool]
IDENTITY: TruthPair = (True, False)


def compose(s: TruthPair, t: TruthPair) -> TruthPair:
    """(s ∘ t)_i = t_1 if s_i else t_2: run s, then feed its value to t's scar."""
    return (t[0] if s[0] else t[1], t[0] if s[1] else t[1])


def f_bin(tt: int, s: TruthPair, t: TruthPair) -> TruthPair:
    return (apply_table(tt, s[0], t[0]), apply_table(tt, s[1], t[1]))


def _bp(t: FormulaTree, i: int, j: int, l: int, r: int) -> int:
    """Breakpoint of [i, j] 1-selected by (l, r]: the largest k <= min(r, j)
    lying above x[i] or x[l+1]; i - 1 when there is none."""
    bound = min(r, j)
    best = i - 1
    if i <= bound:
        best = max(best, t.max_ancestor(i, bound))
    if i < l + 1 <= bound:
        best = max(best, t.max_ancestor(l + 1, bound))
    return best


def _breakpoints(t: FormulaTree, i: int, j: int, m: int, u: int):
    """Breakpoints of [i, j] generated by (m, m + Delta_{u+1}]."""
    e = eps(u)
    n = m + delta(u + 1)
    a1 = _bp(t, i, j, m, m + e)
    a2 = _bp(t, i, j, m + e, n - e)
    a4 = t.lca(a1, a2)
    return a1, a2, a4 - 1, a4


def breakpoint_1selected(x: SymbolWord, fml: tuple[int, int], sel: tuple[int, int]) -> int:
    i, j = fml
    l, r = sel
    if not (l < r and l < j and i <= r):
        raise PlofError("selection window violates l < r, l < j, i <= r")
    return _bp(FormulaTree(x), i, j, l, r)


def breakpoints(x: SymbolWord, fml: tuple[int, int], win: tuple[int, int]):
    i, j = fml
    m, n = win
    u = window_level(m, n)
    if not m < i <= j <= n:
        raise PlofError("formula must lie inside the window")
    return _breakpoints(FormulaTree(x), i, j, m, u)


def _check_digits(pbar: Sequence[int]) -> None:
    for p in pbar:
        if p not in (1, 2, 3, 4):
            raise PlofError(f"piece digit {p} outside 1..4")


def int_k(win: tuple[int, int], pbar: Sequence[int]) -> tuple[int, int]:
    """Sub-window reached by the digits p_1..p_k; the offset sum goes through vector_sum."""
    from .idefs import BitPredicate, vector_sum

    m, n = win
    u = window_level(m, n)
    k = len(pbar)
    _check_digits(pbar)
    if k > u + 1:
        raise PlofError("more digits than schedule levels")
    terms = [((p - 1) // 2) * eps(u - idx) for idx, p in enumerate(pbar)]
    width = max((v.bit_length() for v in terms), default=0)
    f = BitPredicate(lambda bit_j, idx, ys: bool((terms[idx] >> bit_j) & 1), width)
    shift = vector_sum(f, (1 << k) - 1 if k else 0, [])
    m2 = m + shift
    return m2, m2 + delta(u + 1 - k)


def _pieces(t: FormulaTree, i, j, mk, uk, c, d):
    """Pieces of [c, d] cut by the breakpoints of [i, j] in window (mk, mk + Delta_{uk+1}]."""
    a1, a2, a3, a4 = _breakpoints(t, i, j, mk, uk)
    bounds = ((i - 1, a1), (a1, a2), (a2, a3), (a4, j))
    pieces = [(max(c, lo + 1), min(d, hi)) for lo, hi in bounds]
    binop = a4 if (a2 != a4 and c <= a4 <= d) else None
    return pieces, binop


def scar_count(t: FormulaTree, i: int, j: int) -> int:
    """0 for a formula, 1 for a formula missing one leading operand; error otherwise."""
    if not 1 <= i <= j <= t.n:
        raise PlofError(f"interval [{i}, {j}] out of range")
    depth = 0
    borrowed = 0
    for pos in range(i, j + 1):
        kind = t.kind[pos]
        need = 2 if kind == K_BIN else 1 if kind == K_NOT else 0
        if need > depth:
            borrowed += need - depth
            depth = need
        depth -= need - 1
    if depth != 1 or borrowed > 1:
        raise PlofError(f"[{i}, {j}] is not a formula with at most one scar")
    return borrowed


class _Frame:
    """A top interval ready for splitting.  A scarred [i, j] is handled as
    the formula [i - 1, j] whose first symbol stands for the scar."""

    __slots__ = ("t", "i", "j", "hole")

    def __init__(self, t: FormulaTree, fml, win):
        i, j = fml
        m, n = win
        if not m < i <= j <= n:
            raise PlofError("formula must lie inside the window")
        self.t = t
        if scar_count(t, i, j):
            if not m < i - 1:
                raise PlofError("a scarred formula needs its scar position inside the window")
            self.i, self.j, self.hole = i - 1, j, i - 1
        else:
            self.i, self.j, self.hole = i, j, None

    def descend(self, m: int, u: int, pbar: Sequence[int]):
        c, d = self.i, self.j
        mk = m
        for level, p in enumerate(pbar):
            pieces, _ = _pieces(self.t, self.i, self.j, mk, u - level, c, d)
            c, d = pieces[p - 1]
            mk += ((p - 1) // 2) * eps(u - level)
        return c, d, mk


def _prepare(x, fml, win, pbar, tree=None):
    t = tree or FormulaTree(x)
    m, n = win
    u = window_level(m, n)
    _check_digits(pbar)
    if len(pbar) > u + 1:
        raise PlofError("more digits than schedule levels")
    return _Frame(t, fml, win), u


def subfm_k(x: SymbolWord, fml, win, pbar: Sequence[int]):
    """Interval reached from fml by the digits p_1..p_k; (lo, hi) with lo > hi when empty.

    For a scarred fml the scar position i - 1 may appear as the first symbol.
    """
    frame, u = _prepare(x, fml, win, pbar)
    c, d, _ = frame.descend(win[0], u, pbar)
    return c, d


def _leaf_value(t: FormulaTree, pos: int, sigma, hole) -> TruthPair:
    if pos == hole:
        return IDENTITY
    kind = t.kind[pos]
    if kind == K_NOT:
        return (False, True)
    if kind == K_TOP:
        return (True, True)
    if kind == K_BOT:
        return (False, False)
    if kind == K_VAR:
        v = bool(sigma.get(t.data[pos], False))
        return (v, v)
    raise PlofError(f"binary connective at {pos} left as a lone piece")


class Stats:
    """Counters filled in by one evaluation."""

    __slots__ = ("max_level", "calls")

    def __init__(self):
        self.max_level = 0
        self.calls = 0


def _value(frame: _Frame, sigma, u, k, mk, c, d, stats, shortcut=True) -> TruthPair:
    stats.calls += 1
    if k > stats.max_level:
        stats.max_level = k
    if c > d:
        return IDENTITY
    t = frame.t
    if k == u + 1:
        if c != d:
            raise PlofError(f"piece [{c}, {d}] still has several symbols at the last level")
        return _leaf_value(t, c, sigma, frame.hole)
    if shortcut and c == d:
        return _leaf_value(t, c, sigma, frame.hole)
    uk = u - k
    e = eps(uk)
    pieces, binop = _pieces(t, frame.i, frame.j, mk, uk, c, d)
    v = [
        _value(frame, sigma, u, k + 1, mk + (e if p >= 2 else 0), pc, pd, stats, shortcut)
        for p, (pc, pd) in enumerate(pieces)
    ]
    if binop is None:
        return compose(compose(compose(v[0], v[1]), v[2]), v[3])
    return compose(f_bin(t.data[binop], v[0], compose(v[1], v[2])), v[3])


def value_k(x: SymbolWord, fml, win, pbar: Sequence[int] = (), sigma=None, *,
            tree=None, stats=None, shortcut=True) -> TruthPair:
    """Truth pair of the piece SubFm_k(fml, win, pbar).

    With ``shortcut`` a one-symbol piece is valued at once instead of being
    carried down to the last level; the result is the same.
    """
    sigma = _as_bool_map(sigma)
    frame, u = _prepare(x, fml, win, pbar, tree)
    c, d, mk = frame.descend(win[0], u, pbar)
    return _value(frame, sigma, u, len(pbar), mk, c, d, stats or Stats(), shortcut)


def canonical_window(fml: tuple[int, int]) -> tuple[int, int]:
    """(i - 1, i - 1 + Delta_{u+1}) for the least u whose window covers fml."""
    i, j = fml
    u = least_u(j - i + 1)
    return i - 1, i - 1 + delta(u + 1)


def true_plof(x: SymbolWord, sigma=None, *, stats=None) -> bool:
    """Truth of a postfix formula via value_0 in its canonical window."""
    if not is_postfix_formula(x):
        raise PlofError("not a postfix formula")
    t = FormulaTree(x)
    fml = (1, t.n)
    v = value_k(x, fml, canonical_window(fml), (), sigma, tree=t, stats=stats)
    if v[0] != v[1]:
        raise PlofError("whole formula evaluated as scarred")
    return v[0]


def recursion_bound(n_symbols: int) -> int:
    """Least u + 1 with Delta_{u+1} >= n_symbols."""
    return least_u(n_symbols) + 1


# ---------------------------------------------------------------------------
# random formulas


def random_formula(rng, size: int, nvars: int = 8, p_unary: float = 0.15, p_const: float = 0.05) -> Formula:
    """Uniformly random formula shape with ``size`` logical symbols.

    The arity sequence is a random arrangement of atoms (+1), negations (0)
    and binary nodes (-1) summing to 1; the cycle lemma picks the unique
    rotation that is a valid postfix word, which makes the shape uniform
    among shapes with that composition.
    """
    if size < 1:
        raise PlofError("size must be positive")
    unary = sum(1 for _ in range(size - 1) if rng.random() < p_unary)
    if (size - unary) % 2 == 0:
        unary += 1 if unary < size - 1 else -1
    binary = (size - unary - 1) // 2
    atoms = binary + 1
    seq = [1] * atoms + [0] * unary + [-1] * binary
    rng.shuffle(seq)
    # rotation after the last position where the prefix sum hits its minimum
    total = low = 0
    cut = 0
    for pos, w in enumerate(seq):
        total += w
        if total <= low:
            low = total
            cut = pos + 1
    seq = seq[cut:] + seq[:cut]
    stack: list = []
    for w in seq:
        if w == 1:
            if rng.random() < p_const:
                stack.append(Const(rng.random() < 0.5))
            else:
                stack.append(Var(rng.randrange(nvars)))
        elif w == 0:
            stack.append(Not(stack.pop()))
        else:
            b = stack.pop()
            a = stack.pop()
            stack.append(Bin(rng.choice(BINARY_TABLES), a, b))
    assert len(stack) == 1
    return stack[0]


def random_sigma(rng, nvars: int) -> dict[int, bool]:
    return {v: rng.random() < 0.5 for v in range(nvars)}
