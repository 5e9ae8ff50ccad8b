"""Compiled kernels for bulk formula work: generation, naive evaluation and
the windowed breakpoint evaluator.  They mirror the reference code in
``plof`` on flat arrays (positions 1..n, kinds K_VAR..K_BIN)."""
from __future__ import annotations

import numpy as np
from numba import njit

# The recursive evaluator (and its callers) is compiled per process: loading a
# cached recursive kernel from disk crashes numba.

K_VAR, K_TOP, K_BOT, K_NOT, K_BIN = 0, 1, 2, 3, 4
_TABLES = np.array([1, 2, 4, 6, 7, 8, 9, 11, 13, 14], dtype=np.int32)
ERR_LONE_BINOP = 1
ERR_WIDE_PIECE = 2


@njit(cache=True)
def _converse(tt):
    return (tt & 9) | ((tt & 2) << 1) | ((tt & 4) >> 1)


@njit(cache=True)
def seed(s):
    np.random.seed(s)


@njit(cache=True)
def gen_postfix(n, nvars, p_unary, p_const):
    """Uniform random shape via the cycle lemma; returns (kind, data) over 1..n."""
    unary = 0
    for _ in range(n - 1):
        if np.random.random() < p_unary:
            unary += 1
    if (n - unary) % 2 == 0:
        if unary < n - 1:
            unary += 1
        else:
            unary -= 1
    binary = (n - unary - 1) // 2
    atoms = binary + 1
    seq = np.empty(n, np.int8)
    seq[:atoms] = 1
    seq[atoms:atoms + unary] = 0
    seq[atoms + unary:] = -1
    np.random.shuffle(seq)
    total = 0
    low = 0
    cut = 0
    for pos in range(n):
        total += seq[pos]
        if total <= low:
            low = total
            cut = pos + 1
    kind = np.empty(n + 2, np.int8)
    data = np.zeros(n + 2, np.int32)
    kind[0] = K_VAR
    kind[n + 1] = K_VAR
    for q in range(n):
        w = seq[(cut + q) % n]
        pos = q + 1
        if w == 1:
            if np.random.random() < p_const:
                kind[pos] = K_TOP if np.random.random() < 0.5 else K_BOT
            else:
                kind[pos] = K_VAR
                data[pos] = np.random.randint(0, nvars)
        elif w == 0:
            kind[pos] = K_NOT
        else:
            kind[pos] = K_BIN
            data[pos] = _TABLES[np.random.randint(0, 10)]
    return kind, data


@njit(cache=True)
def starts(kind, n):
    start = np.arange(n + 2).astype(np.int32)
    parent = np.full(n + 2, n + 1, np.int32)
    stack = np.empty(n + 1, np.int32)
    sp = 0
    for pos in range(1, n + 1):
        kd = kind[pos]
        if kd == K_NOT:
            c = stack[sp - 1]
            parent[c] = pos
            start[pos] = start[c]
            stack[sp - 1] = pos
        elif kd == K_BIN:
            b = stack[sp - 1]
            a = stack[sp - 2]
            parent[a] = pos
            parent[b] = pos
            start[pos] = start[a]
            sp -= 1
            stack[sp - 1] = pos
        else:
            stack[sp] = pos
            sp += 1
    return start, parent


@njit(cache=True)
def to_plof_order(kind, data, n):
    """Reorder a postfix formula so each binary node lists its longer operand first."""
    start, parent = starts(kind, n)
    ok = np.empty(n + 2, np.int8)
    od = np.zeros(n + 2, np.int32)
    ok[0] = K_VAR
    ok[n + 1] = K_VAR
    # explicit stack of (node, state): state 0 = expand, 1 = emit
    nodes = np.empty(2 * n + 2, np.int32)
    states = np.empty(2 * n + 2, np.int32)
    tables = np.empty(2 * n + 2, np.int32)
    sp = 0
    nodes[0] = n
    states[0] = 0
    tables[0] = 0
    sp = 1
    out = 1
    while sp > 0:
        sp -= 1
        node = nodes[sp]
        st = states[sp]
        kd = kind[node]
        if st == 1:
            ok[out] = kd
            od[out] = tables[sp]
            out += 1
            continue
        if kd == K_NOT:
            nodes[sp] = node
            states[sp] = 1
            tables[sp] = 0
            sp += 1
            nodes[sp] = node - 1
            states[sp] = 0
            sp += 1
        elif kd == K_BIN:
            right = node - 1
            left = start[right] - 1
            lsize = left - start[left] + 1
            rsize = right - start[right] + 1
            tt = data[node]
            first = left
            second = right
            if rsize > lsize:
                first = right
                second = left
                tt = _converse(tt)
            nodes[sp] = node
            states[sp] = 1
            tables[sp] = tt
            sp += 1
            nodes[sp] = second
            states[sp] = 0
            sp += 1
            nodes[sp] = first
            states[sp] = 0
            sp += 1
        else:
            ok[out] = kd
            od[out] = data[node]
            out += 1
    return ok, od


@njit(cache=True)
def naive(kind, data, n, sigma):
    stack = np.empty(n + 1, np.int8)
    sp = 0
    for pos in range(1, n + 1):
        kd = kind[pos]
        if kd == K_VAR:
            stack[sp] = sigma[data[pos]]
            sp += 1
        elif kd == K_TOP:
            stack[sp] = 1
            sp += 1
        elif kd == K_BOT:
            stack[sp] = 0
            sp += 1
        elif kd == K_NOT:
            stack[sp - 1] = 1 - stack[sp - 1]
        else:
            b = stack[sp - 1]
            a = stack[sp - 2]
            sp -= 1
            stack[sp - 1] = (data[pos] >> (2 * a + b)) & 1
    return stack[0]


@njit(cache=True)
def lift_table(parent, n):
    levels = 1
    span = 1
    while span < n:
        span *= 2
        levels += 1
    up = np.empty((levels, n + 2), np.int32)
    up[0, :] = parent
    for t in range(1, levels):
        for k in range(n + 2):
            w = up[t - 1, k]
            up[t, k] = up[t - 1, w] if w <= n else n + 1
    return up


@njit(cache=True)
def _max_ancestor(up, v, bound):
    for t in range(up.shape[0] - 1, -1, -1):
        w = up[t, v]
        if w <= bound:
            v = w
    return v


@njit(cache=True)
def _lca(up, start, parent, n, a, b):
    if a > b:
        a, b = b, a
    if a < 1:
        return n + 1
    if start[b] <= a:
        return b
    for t in range(up.shape[0] - 1, -1, -1):
        w = up[t, b]
        if w <= n and start[w] > a:
            b = w
    return parent[b]


@njit(cache=True)
def _bp(up, i, j, l, r):
    bound = min(r, j)
    best = i - 1
    if i <= bound:
        best = max(best, _max_ancestor(up, i, bound))
    if i < l + 1 and l + 1 <= bound:
        best = max(best, _max_ancestor(up, l + 1, bound))
    return best


@njit(cache=True)
def _comp(s, t):
    t1 = t & 1
    t2 = (t >> 1) & 1
    r1 = t1 if (s & 1) else t2
    r2 = t1 if ((s >> 1) & 1) else t2
    return r1 | (r2 << 1)


@njit(cache=True)
def _fbin(tt, s, t):
    r1 = (tt >> (2 * (s & 1) + (t & 1))) & 1
    r2 = (tt >> (2 * ((s >> 1) & 1) + ((t >> 1) & 1))) & 1
    return r1 | (r2 << 1)


@njit(cache=True)
def _leaf(kind, data, sigma, pos, hole, info):
    if pos == hole:
        return 1
    kd = kind[pos]
    if kd == K_NOT:
        return 2
    if kd == K_TOP:
        return 3
    if kd == K_BOT:
        return 0
    if kd == K_VAR:
        return 3 if sigma[data[pos]] else 0
    info[1] = ERR_LONE_BINOP
    return 1


@njit
def _value(kind, data, sigma, start, parent, up, n, i, j, hole, u, k, mk, c, d,
           deltas, epss, info, shortcut):
    if k > info[0]:
        info[0] = k
    if c > d:
        return 1
    if k == u + 1:
        if c != d:
            info[1] = ERR_WIDE_PIECE
        return _leaf(kind, data, sigma, c, hole, info)
    if shortcut and c == d:
        return _leaf(kind, data, sigma, c, hole, info)
    uk = u - k
    e = epss[uk]
    nk = mk + deltas[uk + 1]
    a1 = _bp(up, i, j, mk, mk + e)
    a2 = _bp(up, i, j, mk + e, nk - e)
    a4 = _lca(up, start, parent, n, a1, a2)
    a3 = a4 - 1
    v1 = _value(kind, data, sigma, start, parent, up, n, i, j, hole, u, k + 1, mk,
                max(c, i), min(d, a1), deltas, epss, info, shortcut)
    v2 = _value(kind, data, sigma, start, parent, up, n, i, j, hole, u, k + 1, mk,
                max(c, a1 + 1), min(d, a2), deltas, epss, info, shortcut)
    v3 = _value(kind, data, sigma, start, parent, up, n, i, j, hole, u, k + 1, mk + e,
                max(c, a2 + 1), min(d, a3), deltas, epss, info, shortcut)
    v4 = _value(kind, data, sigma, start, parent, up, n, i, j, hole, u, k + 1, mk + e,
                max(c, a4 + 1), min(d, j), deltas, epss, info, shortcut)
    if a2 != a4 and c <= a4 and a4 <= d:
        return _comp(_fbin(data[a4], v1, _comp(v2, v3)), v4)
    return _comp(_comp(_comp(v1, v2), v3), v4)


@njit(cache=True)
def schedule(levels):
    deltas = np.empty(levels + 2, np.int64)
    epss = np.empty(levels + 2, np.int64)
    d = 2
    for u in range(levels + 2):
        deltas[u] = d
        epss[u] = d // 2
        d = d + d // 2
    return deltas, epss


@njit
def balanced(kind, data, n, sigma, m, u, shortcut):
    """Value_0 of the whole formula [1, n] in window (m, m + Delta_{u+1}].

    Returns (pair, deepest level reached, error code)."""
    start, parent = starts(kind, n)
    up = lift_table(parent, n)
    deltas, epss = schedule(u + 2)
    info = np.zeros(2, np.int64)
    v = _value(kind, data, sigma, start, parent, up, n, 1, n, -1, u, 0, m, 1, n,
               deltas, epss, info, shortcut)
    return v, info[0], info[1]


@njit
def falsifier(kind, data, n, nvars, u, use_balanced):
    """First valuation mask (variables 0..nvars-1) making the formula false, or -1.

    Returns -2 on an evaluator error and -3 on a scarred whole-formula value."""
    start, parent = starts(kind, n)
    up = lift_table(parent, n)
    deltas, epss = schedule(u + 2)
    info = np.zeros(2, np.int64)
    sigma = np.zeros(max(nvars, 1), np.int8)
    for mask in range(1 << nvars):
        for v in range(nvars):
            sigma[v] = (mask >> v) & 1
        if use_balanced:
            r = _value(kind, data, sigma, start, parent, up, n, 1, n, -1, u, 0, 0, 1, n,
                       deltas, epss, info, True)
            if info[1] != 0:
                return -2
            if r != 0 and r != 3:
                return -3
            val = r & 1
        else:
            val = naive(kind, data, n, sigma)
        if val == 0:
            return mask
    return -1
