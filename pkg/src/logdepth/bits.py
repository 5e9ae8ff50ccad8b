"""Naturals as little-endian bit strings, the base function table, and
bit-blasting of those functions into boolean circuits.

A circuit is a DAG of gates over input-bit atoms ``InputBit(arg, bit)``.
Gates are hash-consed, so identical subcircuits are shared.  Evaluation is
bit-sliced: a batch of N inputs is packed into Python ints with one bit per
sample, so each gate is visited once per batch.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence


class BaseFunctionError(ValueError):
    pass


class CircuitError(ValueError):
    pass


# ---------------------------------------------------------------------------
# base functions


def length(x: int) -> int:
    return x.bit_length()


def bit(i: int, x: int) -> int:
    return (x >> i) & 1


def part(x: int, i: int, j: int) -> int:
    if j <= i:
        return 0
    return (x >> i) & ((1 << (j - i)) - 1)


def pad(x: int, y: int) -> int:
    return x << y.bit_length()


def smash(x: int, y: int) -> int:
    return 1 << (x.bit_length() * y.bit_length())


def monus(x: int, y: int) -> int:
    return x - y if x > y else 0


def half(x: int) -> int:
    return x >> 1


def add(x: int, y: int) -> int:
    return x + y


def multi(i: int, j: int, x: int, y: int) -> int:
    """|x[0,i)| * |y[0,j)| when i <= |x| and j <= |y|, else 0."""
    if i > x.bit_length() or j > y.bit_length():
        return 0
    return part(x, 0, i).bit_length() * part(y, 0, j).bit_length()


BASE_FUNCTIONS = {
    "bit": (bit, 2),
    "length": (length, 1),
    "part": (part, 3),
    "monus": (monus, 2),
    "half": (half, 1),
    "add": (add, 2),
    "pad": (pad, 2),
    "smash": (smash, 2),
    "multi": (multi, 4),
}


def eval_base(fn: str, args: Sequence[int]) -> int:
    try:
        f, arity = BASE_FUNCTIONS[fn]
    except KeyError:
        raise BaseFunctionError(f"unknown base function {fn!r}") from None
    if len(args) != arity:
        raise BaseFunctionError(f"{fn} takes {arity} arguments, got {len(args)}")
    if any(a < 0 for a in args):
        raise BaseFunctionError("arguments must be naturals")
    return f(*args)


def concat_word(x: int, y: int) -> int:
    """Concatenate marker-coded words: [u] * [v] = [uv]."""
    if x <= 0 or y <= 0:
        raise BaseFunctionError("concat_word needs marker-coded words (>= 1)")
    n = y.bit_length() - 1
    return (x << n) + part(y, 0, n)


def bits_of(x: int, width: int | None = None) -> list[int]:
    w = x.bit_length() if width is None else width
    return [(x >> k) & 1 for k in range(w)]


def from_bits(bs: Iterable[int]) -> int:
    out = 0
    for k, b in enumerate(bs):
        if b:
            out |= 1 << k
    return out


# ---------------------------------------------------------------------------
# circuits

CONST, INPUT, NOT, AND, OR, XOR = "const", "in", "not", "and", "or", "xor"


@dataclass
class Circuit:
    """Hash-consed boolean DAG.  ``gates[g]`` is ``(op, operands)``."""

    widths: tuple[int, ...]
    gates: list[tuple] = field(default_factory=list)
    outputs: list[int] = field(default_factory=list)
    _index: dict = field(default_factory=dict, repr=False)

    def _add(self, key: tuple) -> int:
        g = self._index.get(key)
        if g is None:
            g = len(self.gates)
            self.gates.append(key)
            self._index[key] = g
        return g

    # constructors with light constant folding
    def const(self, b: bool) -> int:
        return self._add((CONST, (1 if b else 0,)))

    def inp(self, arg: int, k: int) -> int:
        if arg >= len(self.widths):
            raise CircuitError(f"argument {arg} out of arity {len(self.widths)}")
        if k < 0:
            raise CircuitError("negative bit index")
        if k >= self.widths[arg]:
            return self.const(False)
        return self._add((INPUT, (arg, k)))

    def _const_value(self, g: int):
        op, a = self.gates[g]
        return a[0] if op == CONST else None

    def neg(self, g: int) -> int:
        c = self._const_value(g)
        if c is not None:
            return self.const(not c)
        op, a = self.gates[g]
        if op == NOT:
            return a[0]
        return self._add((NOT, (g,)))

    def conj(self, gs: Iterable[int]) -> int:
        keep = []
        for g in gs:
            c = self._const_value(g)
            if c == 0:
                return self.const(False)
            if c is None and g not in keep:
                keep.append(g)
        if not keep:
            return self.const(True)
        if len(keep) == 1:
            return keep[0]
        return self._add((AND, tuple(sorted(keep))))

    def disj(self, gs: Iterable[int]) -> int:
        keep = []
        for g in gs:
            c = self._const_value(g)
            if c == 1:
                return self.const(True)
            if c is None and g not in keep:
                keep.append(g)
        if not keep:
            return self.const(False)
        if len(keep) == 1:
            return keep[0]
        return self._add((OR, tuple(sorted(keep))))

    def xor(self, gs: Iterable[int]) -> int:
        keep: list[int] = []
        flip = 0
        for g in gs:
            c = self._const_value(g)
            if c is not None:
                flip ^= c
            elif g in keep:
                keep.remove(g)
            else:
                keep.append(g)
        if not keep:
            return self.const(bool(flip))
        out = keep[0] if len(keep) == 1 else self._add((XOR, tuple(sorted(keep))))
        return self.neg(out) if flip else out

    def iff(self, a: int, b: int) -> int:
        return self.neg(self.xor([a, b]))

    # evaluation
    def eval_packed(self, packed: Sequence[Sequence[int]], nsamples: int) -> list[int]:
        """Evaluate on bit-sliced inputs.

        ``packed[arg][k]`` holds bit k of argument ``arg`` for every sample,
        one sample per bit position.  Returns one packed int per output.
        """
        full = (1 << nsamples) - 1
        vals: list[int] = [0] * len(self.gates)
        for g, (op, a) in enumerate(self.gates):
            if op == INPUT:
                col = packed[a[0]]
                vals[g] = col[a[1]] if a[1] < len(col) else 0
            elif op == CONST:
                vals[g] = full if a[0] else 0
            elif op == NOT:
                vals[g] = full ^ vals[a[0]]
            elif op == AND:
                v = full
                for h in a:
                    v &= vals[h]
                vals[g] = v
            elif op == OR:
                v = 0
                for h in a:
                    v |= vals[h]
                vals[g] = v
            else:
                v = 0
                for h in a:
                    v ^= vals[h]
                vals[g] = v
        return [vals[o] for o in self.outputs]

    def eval_batch(self, samples: Sequence[Sequence[int]]) -> list[list[int]]:
        """Evaluate on a list of argument tuples; returns per-sample output bits."""
        n = len(samples)
        packed = pack_samples(samples, self.widths)
        outs = self.eval_packed(packed, n)
        return [[(o >> s) & 1 for o in outs] for s in range(n)]

    def eval(self, args: Sequence[int]) -> list[int]:
        return self.eval_batch([args])[0]

    def size(self) -> int:
        return len(self.gates)

    def to_text(self) -> str:
        lines = [f"widths {' '.join(map(str, self.widths))}"]
        for g, (op, a) in enumerate(self.gates):
            lines.append(f"{g} {op} {' '.join(map(str, a))}")
        lines.append(f"out {' '.join(map(str, self.outputs))}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Circuit":
        rows = [ln.split() for ln in text.splitlines() if ln.strip()]
        if not rows or rows[0][0] != "widths":
            raise CircuitError("missing widths header")
        c = cls(tuple(int(t) for t in rows[0][1:]))
        for row in rows[1:]:
            if row[0] == "out":
                c.outputs = [int(t) for t in row[1:]]
                continue
            g, op, args = int(row[0]), row[1], tuple(int(t) for t in row[2:])
            if g != len(c.gates):
                raise CircuitError(f"gate ids must be consecutive, got {g}")
            if op not in (CONST, INPUT, NOT, AND, OR, XOR):
                raise CircuitError(f"unknown op {op!r}")
            if op == INPUT:
                if args[0] >= len(c.widths) or args[1] >= c.widths[args[0]]:
                    raise CircuitError(f"atom {args} outside declared widths")
            elif op != CONST and any(h >= g for h in args):
                raise CircuitError(f"gate {g} is not topologically ordered")
            c.gates.append((op, args))
            c._index[(op, args)] = g
        return c


def pack_samples(samples: Sequence[Sequence[int]], widths: Sequence[int]) -> list[list[int]]:
    packed = []
    for arg, w in enumerate(widths):
        vals = [s[arg] for s in samples]
        col = []
        for k in range(w):
            m = 0
            for idx, v in enumerate(vals):
                if (v >> k) & 1:
                    m |= 1 << idx
            col.append(m)
        packed.append(col)
    return packed


# ---------------------------------------------------------------------------
# bit-blasting helpers


def _less_prefix(c: Circuit, xa: int, ya: int, n: int, memo: dict) -> int:
    """x[0,n) < y[0,n): the highest differing bit below n has x=0, y=1."""
    key = ("lt", xa, ya, n)
    if key in memo:
        return memo[key]
    if n == 0:
        out = c.const(False)
    else:
        x, y = c.inp(xa, n - 1), c.inp(ya, n - 1)
        here = c.conj([c.neg(x), y])
        same = c.iff(x, y)
        out = c.disj([here, c.conj([same, _less_prefix(c, xa, ya, n - 1, memo)])])
    memo[key] = out
    return out


def _length_is(c: Circuit, arg: int, n: int, memo: dict) -> int:
    """|x_arg| = n."""
    key = ("len", arg, n)
    if key in memo:
        return memo[key]
    w = c.widths[arg]
    if n > w:
        out = c.const(False)
    else:
        above = [c.neg(c.inp(arg, k)) for k in range(n, w)]
        top = [c.inp(arg, n - 1)] if n > 0 else []
        out = c.conj(top + above)
    memo[key] = out
    return out


def _eq_const(c: Circuit, arg: int, value: int) -> int:
    w = c.widths[arg]
    if value.bit_length() > w:
        return c.const(False)
    return c.conj(c.inp(arg, k) if (value >> k) & 1 else c.neg(c.inp(arg, k)) for k in range(w))


def _lt_const_arg(c: Circuit, value: int, arg: int) -> int:
    """value < x_arg with value a constant."""
    w = c.widths[arg]
    if value.bit_length() > w:
        return c.const(False)
    terms = []
    for j in range(w):
        if (value >> j) & 1:
            continue
        higher = [c.iff(c.inp(arg, k), c.const(bool((value >> k) & 1))) for k in range(j + 1, w)]
        terms.append(c.conj([c.inp(arg, j)] + higher))
    return c.disj(terms)


def _add_bit(c: Circuit, i: int, memo: dict) -> int:
    """Bit i of x + y: x_i xor y_i xor (some j < i generates and all between propagate)."""
    gen_terms = []
    for j in range(i):
        prop = [c.xor([c.inp(0, k), c.inp(1, k)]) for k in range(j + 1, i)]
        gen_terms.append(c.conj([c.inp(0, j), c.inp(1, j)] + prop))
    return c.xor([c.inp(0, i), c.inp(1, i), c.disj(gen_terms)])


def _monus_bit(c: Circuit, i: int, memo: dict) -> int:
    w = max(c.widths)
    y_lt_x = _less_prefix(c, 1, 0, w, memo)
    xi, yi = c.inp(0, i), c.inp(1, i)
    borrow = _less_prefix(c, 0, 1, i, memo)
    no_borrow = c.neg(borrow)
    body = c.disj([c.conj([c.xor([xi, yi]), no_borrow]), c.conj([c.iff(xi, yi), borrow])])
    return c.conj([y_lt_x, body])


def _pad_bit(c: Circuit, i: int, memo: dict) -> int:
    wx = c.widths[0]
    terms = [c.conj([c.inp(0, j), _length_is(c, 1, i - j, memo)]) for j in range(min(wx, i + 1))]
    return c.disj(terms)


def _smash_bit(c: Circuit, i: int, memo: dict) -> int:
    wx, wy = c.widths
    terms = []
    for a in range(wx + 1):
        for b in range(wy + 1):
            if a * b == i:
                terms.append(c.conj([_length_is(c, 0, a, memo), _length_is(c, 1, b, memo)]))
    return c.disj(terms)


def _length_bit(c: Circuit, i: int, memo: dict) -> int:
    w = c.widths[0]
    return c.disj(_length_is(c, 0, n, memo) for n in range(1, w + 1) if (n >> i) & 1)


def _half_bit(c: Circuit, i: int, memo: dict) -> int:
    return c.inp(0, i + 1)


PART_VAR_MAX_WIDTH = 16


def _part_var_bit(c: Circuit, i: int, memo: dict) -> int:
    """Bit i of x[y, z] with y, z circuit inputs: some u has x_u, y + i = u, u < z."""
    wx = c.widths[0]
    terms = []
    for u in range(i, wx):
        terms.append(c.conj([c.inp(0, u), _eq_const(c, 1, u - i), _lt_const_arg(c, u, 2)]))
    return c.disj(terms)


def output_width(fn: str, widths: Sequence[int], consts: Sequence[int] = ()) -> int:
    """Number of output bits that can be nonzero for inputs within ``widths``."""
    if fn == "add":
        return max(widths) + 1
    if fn == "monus":
        return widths[0]
    if fn == "half":
        return max(widths[0] - 1, 0)
    if fn == "pad":
        return widths[0] + widths[1]
    if fn == "smash":
        return widths[0] * widths[1] + 1
    if fn == "length":
        return widths[0].bit_length()
    if fn == "part":
        if len(widths) == 3:
            return widths[0]
        i, j = consts
        return max(min(j, widths[0]) - i, 0)
    raise BaseFunctionError(f"cannot blast {fn!r}")


_BIT_BUILDERS = {
    "add": (_add_bit, 2),
    "monus": (_monus_bit, 2),
    "half": (_half_bit, 1),
    "pad": (_pad_bit, 2),
    "smash": (_smash_bit, 2),
    "length": (_length_bit, 1),
}

BLASTABLE = ("add", "monus", "half", "part", "pad", "smash", "length")


def _new_circuit(fn: str, widths: Sequence[int], consts: Sequence[int]):
    widths = tuple(int(w) for w in widths)
    if any(w <= 0 for w in widths):
        raise CircuitError("widths must be positive")
    if fn == "part":
        if len(widths) == 3:
            if max(widths) > PART_VAR_MAX_WIDTH:
                raise CircuitError(
                    f"part with variable bounds is limited to widths <= {PART_VAR_MAX_WIDTH}"
                )
            return Circuit(widths), _part_var_bit
        if len(widths) != 1 or len(consts) != 2:
            raise CircuitError("part needs one width plus constant bounds (i, j)")
        i0, j0 = consts

        def part_bit(c, k, memo):
            return c.inp(0, i0 + k) if i0 + k < j0 else c.const(False)

        return Circuit(widths), part_bit
    if fn not in _BIT_BUILDERS:
        raise BaseFunctionError(f"cannot blast {fn!r}")
    builder, arity = _BIT_BUILDERS[fn]
    if len(widths) != arity:
        raise CircuitError(f"{fn} takes {arity} widths")
    return Circuit(widths), builder


def blast_function(fn: str, out_bit: int, widths: Sequence[int], consts: Sequence[int] = ()) -> Circuit:
    """Circuit for Bit(out_bit, fn(inputs)); ``consts`` are the (i, j) of a constant part."""
    c, builder = _new_circuit(fn, widths, consts)
    if out_bit < 0:
        raise CircuitError("negative output bit")
    c.outputs = [builder(c, out_bit, {})]
    return c


def blast_all(fn: str, widths: Sequence[int], consts: Sequence[int] = ()) -> Circuit:
    """One shared circuit whose outputs are every bit of fn below its output width."""
    c, builder = _new_circuit(fn, widths, consts)
    memo: dict = {}
    c.outputs = [builder(c, k, memo) for k in range(output_width(fn, c.widths, consts))]
    return c


def blast_compare(rel: str, widths: Sequence[int]) -> Circuit:
    c = Circuit(tuple(widths))
    if len(c.widths) != 2 or min(c.widths) <= 0:
        raise CircuitError("compare needs two positive widths")
    z = max(c.widths)
    if rel == "eq":
        out = c.conj(c.iff(c.inp(0, k), c.inp(1, k)) for k in range(z))
    elif rel == "lt":
        terms = []
        for j in range(z):
            higher = [c.iff(c.inp(0, k), c.inp(1, k)) for k in range(j + 1, z)]
            terms.append(c.conj([c.neg(c.inp(0, j)), c.inp(1, j)] + higher))
        out = c.disj(terms)
    else:
        raise CircuitError(f"unknown relation {rel!r}")
    c.outputs = [out]
    return c
