"""Array front end to the compiled formula kernels."""
from __future__ import annotations

import numpy as np

from . import _plof_kernels as K
from . import plof as P

_KIND = {"var": K.K_VAR, "not": K.K_NOT, "bin": K.K_BIN}


class TooManyVariables(P.PlofError):
    pass


def word_arrays(x: P.SymbolWord, renumber: bool = False):
    """(kind, data, n, variable indices) over positions 1..n of a postfix word.

    With ``renumber`` variables are mapped to 0..v-1 in order of first use."""
    syms = x.logical()
    n = len(syms)
    kind = np.zeros(n + 2, np.int8)
    data = np.zeros(n + 2, np.int32)
    names: dict[int, int] = {}
    for pos, (k, d) in enumerate(syms, start=1):
        if k == "const":
            kind[pos] = K.K_TOP if d else K.K_BOT
        elif k in _KIND:
            kind[pos] = _KIND[k]
            if k == "var":
                d = names.setdefault(d, len(names)) if renumber else d
            data[pos] = d if d is not None else 0
        else:
            raise P.PlofError(f"symbol {k!r} cannot occur in a formula")
    return kind, data, n, list(names)


def sigma_array(sigma, size: int) -> np.ndarray:
    out = np.zeros(max(size, 1), np.int8)
    for v, b in (sigma or {}).items():
        if 0 <= v < size and b:
            out[v] = 1
    return out


def naive(kind, data, n, sigma) -> bool:
    return bool(K.naive(kind, data, n, sigma))


def balanced(kind, data, n, sigma, m: int = 0, u: int | None = None, shortcut: bool = True):
    """(value, deepest level) of the whole formula in window (m, m + Delta_{u+1}]."""
    if u is None:
        u = P.least_u(n)
    pair, level, err = K.balanced(kind, data, n, sigma, m, u, shortcut)
    if err:
        raise P.PlofError("balanced evaluator hit an invalid piece")
    if pair not in (0, 3):
        raise P.PlofError("whole formula evaluated as scarred")
    return bool(pair & 1), int(level)


def true_plof(x: P.SymbolWord, sigma=None) -> bool:
    if not P.is_postfix_formula(x):
        raise P.PlofError("not a postfix formula")
    kind, data, n, _ = word_arrays(x)
    top = int(data[1:n + 1][kind[1:n + 1] == K.K_VAR].max(initial=0)) + 1
    return balanced(kind, data, n, sigma_array(sigma, top))[0]


def random_arrays(n: int, nvars: int, p_unary: float = 0.15, p_const: float = 0.05, plof_order: bool = True):
    """Random formula with n logical symbols (numpy RNG, seed with ``seed``)."""
    kind, data = K.gen_postfix(n, nvars, p_unary, p_const)
    if plof_order:
        kind, data = K.to_plof_order(kind, data, n)
    return kind, data


def seed(s: int) -> None:
    K.seed(s)


def falsifying_mask(x: P.SymbolWord, max_vars: int = 20, algo: str = "balanced"):
    """(first falsifying valuation or None, variable indices in mask order)."""
    if not P.is_postfix_formula(x):
        raise P.PlofError("not a postfix formula")
    kind, data, n, names = word_arrays(x, renumber=True)
    if len(names) > max_vars:
        raise TooManyVariables(f"{len(names)} variables exceed the limit of {max_vars}")
    r = K.falsifier(kind, data, n, len(names), P.least_u(n), algo == "balanced")
    if r == -2 or r == -3:
        raise P.PlofError("balanced evaluator failed")
    if r == -1:
        return None, names
    return {names[v]: bool((r >> v) & 1) for v in range(len(names))}, names


def taut_check(x: P.SymbolWord, max_vars: int = 20, algo: str = "balanced") -> bool:
    """True iff the formula holds under every valuation of its variables."""
    return falsifying_mask(x, max_vars, algo)[0] is None
