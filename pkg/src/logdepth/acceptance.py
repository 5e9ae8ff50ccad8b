"""The ten acceptance properties as callable checks.

Each check takes a seed and a scale in (0, 1] (1 = full corpus sizes) and
returns a ``Outcome``.  The pytest suite runs them at full scale; ``logdepth
selftest`` runs them too, optionally scaled down with ``--quick``."""
from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import bits as B
from . import fastplof as FP
from . import frege as FR
from . import idefs as I
from . import plof as P
from . import sigma as S


@dataclass
class Outcome:
    ok: bool
    detail: str


def _n(full: int, scale: float, floor: int = 1) -> int:
    return max(floor, int(round(full * scale)))


def _log_uniform(rng, hi_exp: int) -> int:
    return max(1, min(1 << hi_exp, int(2 ** rng.uniform(0, hi_exp))))


def _sigma(rng, nvars):
    return np.array([rng.random() < 0.5 for _ in range(nvars)], np.int8)


def dual_evaluator(seed: int = 0, scale: float = 1.0) -> Outcome:
    """Balanced evaluator equals naive evaluation on random formulas."""
    rng = random.Random(seed)
    FP.seed(seed)
    count = _n(10_000, scale)
    nvars = 32
    FP.balanced(*FP.random_arrays(3, 2)[:2], 3, np.zeros(2, np.int8))  # compile outside the clock
    t0 = time.perf_counter()
    bad = 0
    for _ in range(count):
        n = _log_uniform(rng, 14)
        kind, data = FP.random_arrays(n, nvars)
        sig = _sigma(rng, nvars)
        if FP.balanced(kind, data, n, sig)[0] != FP.naive(kind, data, n, sig):
            bad += 1
    dt = time.perf_counter() - t0
    return Outcome(bad == 0 and dt < 60, f"{count} formulas, {bad} mismatches, {dt:.1f}s (limit 60s)")


def schedule_bound(seed: int = 0, scale: float = 1.0) -> Outcome:
    """Delta_u < (3/2)^(u+2) for u <= 64, and the evaluator depth stays within
    the least u + 1 whose window covers the formula."""
    sched_ok = all(P.delta(u) < Fraction(3, 2) ** (u + 2) for u in range(65))
    rng = random.Random(seed)
    FP.seed(seed)
    count = _n(10_000, scale)
    bad = 0
    for _ in range(count):
        n = _log_uniform(rng, 14)
        kind, data = FP.random_arrays(n, 32)
        _, level = FP.balanced(kind, data, n, _sigma(rng, 32))
        bound = P.recursion_bound(n)
        if level > bound:
            bad += 1
    return Outcome(sched_ok and bad == 0,
                   f"schedule bound {'holds' if sched_ok else 'fails'}; {bad}/{count} formulas over the depth bound")


def window_independence(seed: int = 0, scale: float = 1.0) -> Outcome:
    """value_0 is the same in distinct windows covering the formula."""
    rng = random.Random(seed)
    FP.seed(seed + 1)
    count = _n(1000, scale)
    bad = 0
    for k in range(count):
        n = _log_uniform(rng, 12)
        kind, data = FP.random_arrays(n, 16)
        sig = _sigma(rng, 16)
        u0 = P.least_u(n)
        shift = rng.randrange(1, 8)
        u1 = P.least_u(n + shift)
        wins = [(0, u0), (0, u0 + 1), (-shift, u1)]
        vals = {FP.balanced(kind, data, n, sig, m, u)[0] for m, u in wins}
        if len(vals) != 1 or vals != {FP.naive(kind, data, n, sig)}:
            bad += 1
        if k % 20 == 0 and n <= 400:
            # the reference implementation on the same windows
            word = P.to_plof(_ast(kind, data, n))
            smap = {v: bool(sig[v]) for v in range(16)}
            ref = set()
            for m, u in wins:
                pair = P.value_k(word, (1, n), (m, m + P.delta(u + 1)), (), smap)
                ref.add(pair[0] if pair[0] == pair[1] else None)
            if ref != vals:
                bad += 1
    return Outcome(bad == 0, f"{count} formulas x 3 windows, {bad} disagreements")


def _ast(kind, data, n):
    stack = []
    for pos in range(1, n + 1):
        k = kind[pos]
        if k == 0:
            stack.append(P.Var(int(data[pos])))
        elif k == 1:
            stack.append(P.Top)
        elif k == 2:
            stack.append(P.Bot)
        elif k == 3:
            stack.append(P.Not(stack.pop()))
        else:
            b = stack.pop()
            a = stack.pop()
            stack.append(P.Bin(int(data[pos]), a, b))
    return stack[0]


def vector_summation(seed: int = 0, scale: float = 1.0) -> Outcome:
    """vector_sum equals direct summation and g(x) = g(x // 2) + f(|x| - 1)."""
    rng = random.Random(seed)
    count = _n(1000, scale)
    bad = 0
    for _ in range(count):
        width = rng.randrange(1, 9)
        table = [rng.getrandbits(width) for _ in range(256)]
        f = I.BitPredicate(lambda j, i, ys, t=table: bool((t[i] >> j) & 1), width)
        x = rng.getrandbits(rng.randrange(1, 257)) | 1
        g = I.vector_sum(f, x)
        if g != sum(table[:x.bit_length()]):
            bad += 1
        if g != I.vector_sum(f, x >> 1) + f.value(x.bit_length() - 1, ()):
            bad += 1
    return Outcome(bad == 0, f"{count} predicates, {bad} failures")


def reductions(seed: int = 0, scale: float = 1.0) -> Outcome:
    """Quadtree, simultaneous and iterated reductions agree with direct evaluation."""
    rng = random.Random(seed)
    per = _n(25, scale)
    bad = 0
    checked = 0
    for t in range(per):
        q = I.random_quad(rng, ell=1 + t % 2)
        R = I.reduce_quad(q)
        for x in range(4):
            L = q.bound((x,))
            for p in range(1, 1 << L):
                if p.bit_length() % 2:
                    checked += 1
                    bad += I.eval_quad(q, (x,), p) != I.eval_id(R, (x,), I.quad_embed(p))
    for t in range(per):
        K = t % 3
        ell = 2 if K == 2 else 3
        s = I.random_sim(rng, ell=ell, K=K, top=3)
        R = I.reduce_sim(s)
        for x in range(3):
            for lam in range(5):
                for q in range(1, 1 << ell):
                    offs = [rng.randrange(K + 1) for _ in range(q.bit_length() - 1)]
                    checked += 1
                    bad += I.eval_sim(s, (x,), lam + sum(offs), q) != I.eval_id(R, (x, lam), I.sim_clock(R, q, offs))
    for t in range(per):
        A = I.random_nested(rng, ell_outer=2 + t % 2, ell_inner=2, nested_params=t % 3)
        F = I.flatten_iterated(A)
        for x in range(5):
            L = A.bound((x,))
            for q in range(1, 1 << L):
                checked += 1
                bad += I.eval_id(A, (x,), q) != I.eval_id(F, (x,), F.clock_of(q))
    return Outcome(bad == 0, f"3 x {per} definitions, {checked} clocks, {bad} disagreements")


def tree_gadget(seed: int = 0, scale: float = 1.0) -> Outcome:
    """tree(g^1) = A and tree(g^1) xor tree(g^0) = 1."""
    rng = random.Random(seed)
    count = _n(200, scale)
    bad = 0
    for t in range(count):
        ell = 1 + t % 7
        spec = I.random_spec(rng, ell=ell, m=rng.randrange(0, 3))
        x = rng.getrandbits(rng.randrange(0, 10))
        clocks = {1, rng.randrange(1, 1 << ell)}
        for p in clocks:
            g1 = I.compile_tree_gadget(spec, (x,), p, 1, bit_budget=1 << 24)
            g0 = I.compile_tree_gadget(spec, (x,), p, 0, bit_budget=1 << 24)
            t1, t0 = I.tree_fn(g1), I.tree_fn(g0)
            if bool(t1) != I.eval_id(spec, (x,), p) or t1 ^ t0 != 1:
                bad += 1
    return Outcome(bad == 0, f"{count} definitions, {bad} failures")


def tree_recursion(seed: int = 0, scale: float = 1.0) -> Outcome:
    rng = random.Random(seed)
    count = _n(1000, scale)
    bad = sum(I.tree_fn(x) != (x & 1) for x in range(16))
    for _ in range(count):
        x = rng.getrandbits(rng.randrange(5, 4097)) | 16
        if x < 16:
            x += 16
        bad += I.tree_fn(x) != I.tree_fn(I.or_fn(I.and_fn(x)))
    return Outcome(bad == 0, f"16 small + {count} random words, {bad} failures")


def bit_blasting(seed: int = 0, scale: float = 1.0) -> Outcome:
    """Every output bit of each blasted primitive at width 64 matches the integers."""
    rng = random.Random(seed)
    count = _n(10_000, scale)
    cases = [("add", 2, ()), ("monus", 2, ()), ("half", 1, ()), ("pad", 2, ()),
             ("smash", 2, ()), ("length", 1, ()), ("part", 1, (5, 40))]
    bad = 0
    for fn, arity, consts in cases:
        c = B.blast_all(fn, [64] * arity, consts)
        samples = [tuple(rng.getrandbits(rng.randrange(1, 65)) for _ in range(arity)) for _ in range(count)]
        outs = c.eval_packed(B.pack_samples(samples, c.widths), count)
        for s_i, s in enumerate(samples):
            v = B.part(s[0], *consts) if fn == "part" else B.eval_base(fn, s)
            got = sum(((o >> s_i) & 1) << k for k, o in enumerate(outs))
            bad += got != v
    return Outcome(bad == 0, f"{len(cases)} primitives x {count} inputs, {bad} mismatches")


def translation(seed: int = 0, scale: float = 1.0) -> Outcome:
    """eval_sb0 equals the translated sentence under valuation(x)."""
    rng = random.Random(seed)
    count = _n(1000, scale)
    bad = 0
    live = 0
    W = ["x", "y"]
    for _ in range(count):
        phi = S.random_stratified(rng, W, depth=4, word_bias=0.5)
        xs = [rng.getrandbits(rng.randrange(0, 16)) for _ in W]
        direct = S.eval_sb0(phi, dict(zip(W, xs)))
        sent = S.translate_bool(phi, W, xs)
        live += any(node[0] == "atom" for node in sent.nodes)
        bad += sent.evaluate(S.valuation(xs)) != direct
    return Outcome(bad == 0, f"{count} formulas ({live} translate to sentences with atoms), {bad} mismatches")


def frege_reflection(seed: int = 0, scale: float = 1.0) -> Outcome:
    """Generated proofs check, their lines are tautologies, and every
    single-line mutation is rejected."""
    rng = random.Random(seed)
    system = FR.FregeSystem.default()
    count = _n(100, scale)
    bad = 0
    lines = 0
    for _ in range(count):
        proof = FR.generate_proof(rng, system, nvars=rng.randrange(1, 17), steps=6)
        target = proof.lines[-1]
        bad += not FR.check_proof(proof, system, target)
        for line in proof.lines:
            bad += not FP.taut_check(line, max_vars=16)
        sig = {v: rng.random() < 0.5 for v in range(16)}
        bad += not FR.reflection_check(proof, system, sig)
        for k, line in enumerate(proof.lines):
            mutated = FR.FregeProof(list(proof.lines))
            mutated.lines[k] = FR.mutate_line(rng, line)
            bad += bool(FR.check_proof(mutated, system, target))
        lines += len(proof.lines)
    return Outcome(bad == 0, f"{count} proofs, {lines} lines and mutations, {bad} failures")


CRITERIA = [
    (1, "dual-evaluator equivalence", dual_evaluator),
    (2, "schedule and depth bound", schedule_bound),
    (3, "window independence", window_independence),
    (4, "vector summation", vector_summation),
    (5, "reduction equivalences", reductions),
    (6, "tree gadget", tree_gadget),
    (7, "tree recursion", tree_recursion),
    (8, "bit-blasting", bit_blasting),
    (9, "translation soundness", translation),
    (10, "Frege reflection harness", frege_reflection),
]


def run_all(seed: int = 0, scale: float = 1.0, out=print) -> bool:
    ok = True
    for num, title, check in CRITERIA:
        r = check(seed, scale)
        ok &= r.ok
        out(f"criterion {num:2d} {'PASS' if r.ok else 'FAIL'}  {title}: {r.detail}")
    return ok
