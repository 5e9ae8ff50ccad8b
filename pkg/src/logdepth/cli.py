"""Command-line front end: ``logdepth <command> ...``.

Exit codes: 0 success, 1 verification failure, 2 usage or input error."""
from __future__ import annotations

import argparse
import json
import os
import random
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from . import acceptance
from . import bits as B
from . import fastplof as FP
from . import frege as FR
from . import idefs as I
from . import plof as P
from . import sigma as S


class UsageError(Exception):
    pass


@dataclass
class Config:
    seed: int = 0
    gate_budget: int = S.DEFAULT_NODE_BUDGET
    bit_budget: int = 1 << 20
    enum_limit: int = S.DEFAULT_ENUM_LIMIT
    fmt: Optional[str] = None

    def __post_init__(self):
        for name in ("gate_budget", "bit_budget", "enum_limit"):
            if getattr(self, name) <= 0:
                raise UsageError(f"--{name.replace('_', '-')} must be positive")


def _int(text: str) -> int:
    try:
        return int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None


def _read_text(arg: str) -> str:
    path = Path(arg)
    if path.is_file():
        return path.read_text(encoding="utf-8")
    return arg


def read_word(arg: str) -> P.SymbolWord:
    """A formula from a .plof file (hex or postfix tokens), another file of
    infix text, or infix text given directly."""
    path = Path(arg)
    if path.is_file() and path.suffix == ".plof":
        text = path.read_text(encoding="utf-8").strip()
        if text and all(c in "0123456789abcdefABCDEF" for c in text):
            return P.SymbolWord.from_hex(text)
        return P.word_from_postfix_text(text)
    return P.to_plof(P.parse_infix(_read_text(arg).strip()))


def read_sigma(arg: Optional[str]) -> dict:
    """JSON valuation: {"p0": true, "p101": false}, {"0": true} or [true, false, ...]."""
    if arg is None:
        return {}
    raw = json.loads(_read_text(arg))
    if isinstance(raw, list):
        return {k: bool(v) for k, v in enumerate(raw)}
    if not isinstance(raw, dict):
        raise UsageError("valuation must be a JSON object or list")
    out = {}
    for k, v in raw.items():
        if k.startswith("p") and len(k) > 1:
            out[int(k[1:], 2)] = bool(v)
        else:
            out[int(k)] = bool(v)
    return out


def _var_name(v: int) -> str:
    return "p" + format(v, "b")


def _words(pairs: Sequence[str]) -> tuple[list[str], list[int]]:
    names, vals = [], []
    for item in pairs:
        if "=" not in item:
            raise UsageError(f"expected name=value, got {item!r}")
        k, v = item.split("=", 1)
        names.append(k)
        vals.append(_int(v))
    return names, vals


def _load_spec(path: str, name: Optional[str]):
    specs = I.parse_specs(_read_text(path))
    if not specs:
        raise UsageError("no definitions in file")
    if name is None:
        return list(specs.values())[-1]
    if name not in specs:
        raise UsageError(f"no definition named {name!r}")
    return specs[name]


# ---------------------------------------------------------------------------
# commands


def cmd_plof(a, cfg: Config) -> int:
    word = read_word(a.formula)
    fmt = cfg.fmt or "hex"
    if fmt == "hex":
        print(word.to_hex())
    elif fmt == "text":
        print(P.format_infix(P.from_plof(word)))
    else:
        raise UsageError("plof prints hex or text")
    return 0


def cmd_eval(a, cfg: Config) -> int:
    word = read_word(a.formula)
    sigma = read_sigma(a.sigma)
    if not P.is_postfix_formula(word):
        raise UsageError("not a postfix formula")
    v = FP.true_plof(word, sigma) if a.algo == "balanced" else P.naive_eval(word, sigma)
    print("true" if v else "false")
    return 0


def cmd_taut(a, cfg: Config) -> int:
    word = read_word(a.formula)
    if not P.is_postfix_formula(word):
        raise UsageError("not a postfix formula")
    mask, _ = FP.falsifying_mask(word, a.max_vars, a.algo)
    if mask is None:
        print("tautology")
        return 0
    print(json.dumps({_var_name(v): b for v, b in sorted(mask.items())}))
    return 1


def cmd_check_proof(a, cfg: Config) -> int:
    proof = FR.FregeProof.from_fpf(_read_text(a.proof))
    system = FR.FregeSystem.from_text(_read_text(a.axioms)) if a.axioms else FR.FregeSystem.default()
    target = read_word(a.target) if a.target else None
    r = FR.check_proof(proof, system, target)
    print(json.dumps(r.report(), indent=None if cfg.fmt == "text" else 2))
    return 0 if r else 1


def cmd_id_eval(a, cfg: Config) -> int:
    spec = _load_spec(a.spec, a.name)
    xs = [_int(v) for v in a.args]
    if isinstance(spec, I.SimIdSpec):
        if a.lam is None:
            raise UsageError("simultaneous definitions need --lambda")
        v = I.eval_sim(spec, xs, a.lam, a.clock)
    elif isinstance(spec, I.QuadIdSpec):
        v = I.eval_quad(spec, xs, a.clock)
    else:
        v = I.eval_id(spec, xs, a.clock, limit=cfg.enum_limit)
    print("true" if v else "false")
    return 0


def _all_clocks(L: int, odd_only: bool = False):
    for p in range(1, 1 << L):
        if not odd_only or p.bit_length() % 2:
            yield p


def cmd_id_reduce(a, cfg: Config) -> int:
    spec = _load_spec(a.spec, a.name)
    kind = a.kind
    if kind == "quad":
        if not isinstance(spec, I.QuadIdSpec):
            raise UsageError("quad reduction needs a (quadspec ...)")
        R = I.reduce_quad(spec)
    elif kind == "sim":
        if not isinstance(spec, I.SimIdSpec):
            raise UsageError("sim reduction needs a (simspec ...)")
        R = I.reduce_sim(spec)
    else:
        if type(spec) is not I.IdSpec:
            raise UsageError("iterated flattening needs an (idspec ...)")
        R = I.flatten_iterated(spec)
    sys.stdout.write(I.format_specs([R]))
    if a.check is None:
        return 0
    xs = [_int(v) for v in a.check]
    bad = 0
    n = 0
    if kind == "quad":
        for p in _all_clocks(spec.bound(xs), True):
            n += 1
            bad += I.eval_quad(spec, xs, p) != I.eval_id(R, xs, I.quad_embed(p))
    elif kind == "sim":
        lam = a.lam or 0
        for q in _all_clocks(S.eval_term(spec.ell, dict(zip(spec.vars, xs)))):
            n += 1
            bad += I.eval_sim(spec, xs, lam, q) != I.eval_id(R, list(xs) + [lam], I.sim_clock(R, q))
    else:
        for q in _all_clocks(spec.bound(xs)):
            n += 1
            bad += I.eval_id(spec, xs, q) != I.eval_id(R, xs, R.clock_of(q))
    print(f"checked {n} clocks, {bad} disagreements", file=sys.stderr)
    return 1 if bad else 0


def cmd_count(a, cfg: Config) -> int:
    if a.phi is None:
        print(I.count_bits(lambda i: (a.x >> i) & 1, a.x))
        return 0
    names, vals = _words(a.words)
    phi = S.subst_many(S.parse_formula(_read_text(a.phi)), {k: S.C(v) for k, v in zip(names, vals)})
    c = I.count_bits(phi, a.x)
    if c > a.x.bit_length():
        print(f"count {c} exceeds |x| = {a.x.bit_length()}", file=sys.stderr)
        return 1
    print(c)
    return 0


def cmd_vsum(a, cfg: Config) -> int:
    names, vals = _words(a.words)
    phi = S.parse_formula(_read_text(a.phi))
    f = I.BitPredicate.from_formula(phi, a.width, word_vars=names)
    g = I.vector_sum(f, a.x, vals)
    direct = sum(f.value(i, vals) for i in range(a.x.bit_length()))
    print(g)
    if g != direct:
        print(f"direct summation gives {direct}", file=sys.stderr)
        return 1
    return 0


def cmd_tree(a, cfg: Config) -> int:
    print(I.tree_fn(a.x))
    return 0


def cmd_gadget(a, cfg: Config) -> int:
    spec = _load_spec(a.spec, a.name)
    xs = [_int(v) for v in a.args]
    if a.bit is not None:
        print(int(I.gadget_bit(spec, xs, a.clock, a.xi, a.bit)))
        return 0
    g = I.compile_tree_gadget(spec, xs, a.clock, a.xi, bit_budget=cfg.bit_budget)
    if cfg.fmt == "text":
        print(format(g, "b"))
    else:
        print(format(g, "x"))
    t = I.tree_fn(g)
    want = I.id_atom_value(spec, xs, a.clock)
    if bool(t) != (want if a.xi else not want):
        print("tree value disagrees with the definition", file=sys.stderr)
        return 1
    return 0


def cmd_translate(a, cfg: Config) -> int:
    names, vals = _words(a.words)
    phi = S.parse_formula(_read_text(a.phi))
    sent = S.translate_bool(phi, names, vals, budget=cfg.gate_budget, limit=cfg.enum_limit)
    print(sent.to_sexpr())
    direct = S.eval_sb0(phi, dict(zip(names, vals)))
    value = sent.evaluate(S.valuation(vals))
    print("true" if value else "false", file=sys.stderr)
    return 0 if value == direct else 1


def cmd_blast(a, cfg: Config) -> int:
    consts = tuple(a.consts or ())
    if a.bit is None:
        c = B.blast_all(a.fn, a.widths, consts)
    else:
        c = B.blast_function(a.fn, a.bit, a.widths, consts)
    if c.size() > cfg.gate_budget:
        print(f"circuit has {c.size()} gates, budget is {cfg.gate_budget}", file=sys.stderr)
        return 1
    sys.stdout.write(c.to_text())
    if a.check:
        rng = random.Random(cfg.seed)
        samples = [tuple(rng.getrandbits(w) for w in c.widths) for _ in range(a.check)]
        outs = c.eval_packed(B.pack_samples(samples, c.widths), len(samples))
        bad = 0
        for s_i, s in enumerate(samples):
            v = B.part(s[0], *consts) if a.fn == "part" and consts else B.eval_base(a.fn, s)
            got = sum(((o >> s_i) & 1) << k for k, o in enumerate(outs))
            want = v if a.bit is None else (v >> a.bit) & 1
            bad += got != want
        print(f"checked {len(samples)} inputs, {bad} mismatches", file=sys.stderr)
        return 1 if bad else 0
    return 0


def cmd_selftest(a, cfg: Config) -> int:
    ok = acceptance.run_all(cfg.seed, 0.1 if a.quick else 1.0)
    return 0 if ok else 1


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    common.add_argument("--gate-budget", type=int, default=argparse.SUPPRESS)
    common.add_argument("--bit-budget", type=int, default=argparse.SUPPRESS)
    common.add_argument("--enum-limit", type=int, default=argparse.SUPPRESS)
    common.add_argument("--format", choices=("text", "hex", "sexpr"), default=argparse.SUPPRESS)

    ap = argparse.ArgumentParser(prog="logdepth", parents=[common],
                                 description="Log-depth formula evaluation, inductive definitions and Frege checking.")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.set_defaults(func=fn)
        return p

    p = add("plof", cmd_plof, "infix formula to packed PLOF hex")
    p.add_argument("formula")
    p = add("eval", cmd_eval, "evaluate a formula under a valuation")
    p.add_argument("formula")
    p.add_argument("--algo", choices=("naive", "balanced"), default="balanced")
    p.add_argument("--sigma")
    p = add("taut", cmd_taut, "decide tautology by exhaustive valuation")
    p.add_argument("formula")
    p.add_argument("--algo", choices=("naive", "balanced"), default="balanced")
    p.add_argument("--max-vars", type=int, default=20)
    p = add("check-proof", cmd_check_proof, "check a .fpf Frege proof")
    p.add_argument("proof")
    p.add_argument("--target")
    p.add_argument("--axioms")
    p = add("id-eval", cmd_id_eval, "evaluate an inductive definition")
    p.add_argument("spec")
    p.add_argument("args", nargs="*")
    p.add_argument("--name")
    p.add_argument("--clock", type=_int, default=1)
    p.add_argument("--lambda", dest="lam", type=_int)
    p = add("id-reduce", cmd_id_reduce, "reduce a quadtree, iterated or simultaneous definition")
    p.add_argument("kind", choices=("quad", "iter", "sim"))
    p.add_argument("spec")
    p.add_argument("--name")
    p.add_argument("--check", nargs="*", metavar="X")
    p.add_argument("--lambda", dest="lam", type=_int)
    p = add("count", cmd_count, "count i < |x| satisfying a formula")
    p.add_argument("x", type=_int)
    p.add_argument("--phi")
    p.add_argument("--words", nargs="*", default=[])
    p = add("vsum", cmd_vsum, "vector sum of f(i) over i < |x|")
    p.add_argument("x", type=_int)
    p.add_argument("--phi", required=True)
    p.add_argument("--width", type=int, required=True)
    p.add_argument("--words", nargs="*", default=[])
    p = add("tree", cmd_tree, "the and/or tree function")
    p.add_argument("x", type=_int)
    p = add("gadget", cmd_gadget, "compile a definition into a tree-function word")
    p.add_argument("spec")
    p.add_argument("args", nargs="*")
    p.add_argument("--name")
    p.add_argument("--clock", type=_int, default=1)
    p.add_argument("--xi", type=int, choices=(0, 1), default=1)
    p.add_argument("--bit", type=_int)
    p = add("translate", cmd_translate, "propositional translation of a stratified formula")
    p.add_argument("phi")
    p.add_argument("--words", nargs="*", default=[])
    p = add("blast", cmd_blast, "bit-blast a primitive into a circuit")
    p.add_argument("fn", choices=B.BLASTABLE)
    p.add_argument("--widths", type=int, nargs="+", required=True)
    p.add_argument("--consts", type=int, nargs=2)
    p.add_argument("--bit", type=int)
    p.add_argument("--check", type=int, default=0, metavar="N")
    p = add("selftest", cmd_selftest, "run the acceptance properties")
    p.add_argument("--quick", action="store_true")
    return ap


def _threads() -> None:
    n = os.environ.get("LOGDEPTH_EVAL_THREADS")
    if n:
        import numba
        numba.set_num_threads(max(1, min(int(n), numba.config.NUMBA_NUM_THREADS)))


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    a = ap.parse_args(argv)
    try:
        cfg = Config(getattr(a, "seed", 0), getattr(a, "gate_budget", S.DEFAULT_NODE_BUDGET),
                     getattr(a, "bit_budget", 1 << 20), getattr(a, "enum_limit", S.DEFAULT_ENUM_LIMIT),
                     getattr(a, "format", None))
        _threads()
        return a.func(a, cfg)
    except (UsageError, P.PlofError, S.SigmaError, I.IdError, B.CircuitError, B.BaseFunctionError,
            FR.FregeError, json.JSONDecodeError, argparse.ArgumentTypeError, OSError, ValueError) as e:
        print(f"logdepth: error: {e}", file=sys.stderr)
        return 1 if isinstance(e, (I.BudgetError, S.NodeBudgetExceeded, S.EnumerationLimit)) else 2


if __name__ == "__main__":
    sys.exit(main())
