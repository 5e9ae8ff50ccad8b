import json
import random

import pytest

from logdepth import frege as FR
from logdepth import idefs as I
from logdepth import plof as P
from logdepth.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_plof_hex(capsys):
    code, out, _ = run(capsys, "plof", "p0 & (p1 | p10)")
    assert code == 0
    word = P.SymbolWord.from_hex(out.strip())
    assert str(word) == "p1 p10 ∨ p0 ∧"
    code, out, _ = run(capsys, "plof", "p0 & (p1 | p10)", "--format", "text")
    assert out.strip() == "((p1 ∨ p10) ∧ p0)"


def test_eval_dual_run(capsys, tmp_path, rng):
    for _ in range(20):
        f = P.random_formula(rng, rng.randrange(1, 60), 4)
        path = tmp_path / "f.plof"
        path.write_text(P.to_plof(f).to_hex() + "\n")
        sigma = P.random_sigma(rng, 4)
        spath = tmp_path / "s.json"
        spath.write_text(json.dumps({"p" + format(v, "b"): b for v, b in sigma.items()}))
        _, a, _ = run(capsys, "eval", str(path), "--sigma", str(spath), "--algo", "balanced")
        _, b, _ = run(capsys, "eval", str(path), "--sigma", str(spath), "--algo", "naive")
        assert a == b == ("true\n" if P.naive_eval(f, sigma) else "false\n")


def test_eval_postfix_text_file(capsys, tmp_path):
    path = tmp_path / "g.plof"
    path.write_text("p0 p1 ∧\n")
    code, out, _ = run(capsys, "eval", str(path), "--sigma", "[true, true]")
    assert (code, out) == (0, "true\n")


def test_taut_exit_codes(capsys):
    assert run(capsys, "taut", "p0 | ~p0")[:2] == (0, "tautology\n")
    code, out, _ = run(capsys, "taut", "p0 -> p1")
    assert code == 1 and json.loads(out) == {"p0": True, "p1": False}


def test_check_proof(capsys, tmp_path, rng):
    system = FR.FregeSystem.default()
    proof = FR.generate_proof(rng, system, nvars=4, steps=3)
    path = tmp_path / "p.fpf"
    path.write_text(proof.to_fpf())
    tpath = tmp_path / "t.plof"
    tpath.write_text(proof.lines[-1].to_hex())
    code, out, _ = run(capsys, "check-proof", str(path), "--target", str(tpath))
    assert code == 0 and json.loads(out)["accepted"]
    bad = FR.FregeProof(list(proof.lines))
    bad.lines[0] = FR.mutate_line(rng, bad.lines[0])
    path.write_text(bad.to_fpf())
    code, out, _ = run(capsys, "check-proof", str(path))
    rep = json.loads(out)
    assert code == 1 and not rep["accepted"] and rep["line"] == 0
    axioms = tmp_path / "x.axioms"
    axioms.write_text(system.to_text())
    assert run(capsys, "check-proof", str(path), "--axioms", str(axioms))[0] == 1


@pytest.fixture
def spec_files(tmp_path):
    rng = random.Random(4)
    files = {}
    for name, specs in [("a", [I.random_spec(rng, ell=3)]), ("q", [I.random_quad(rng, ell=1)]),
                        ("s", [I.random_sim(rng, ell=2, K=1)])]:
        files[name] = tmp_path / f"{name}.ids"
        files[name].write_text(I.format_specs(specs))
    A = I.random_nested(rng, 2, 2, 1)
    files["n"] = tmp_path / "n.ids"
    files["n"].write_text(I.format_specs(I.nested_specs(A) + [A]))
    return files


def test_id_commands(capsys, spec_files):
    spec = list(I.parse_specs(spec_files["a"].read_text()).values())[0]
    code, out, _ = run(capsys, "id-eval", str(spec_files["a"]), "5", "--clock", "0b101")
    assert code == 0 and out.strip() == str(I.eval_id(spec, (5,), 5)).lower()
    assert run(capsys, "id-eval", str(spec_files["a"]), "5", "--clock", "0")[0] == 2
    for kind, f, extra in (("quad", "q", []), ("sim", "s", ["--lambda", "1"]), ("iter", "n", [])):
        code, out, err = run(capsys, "id-reduce", kind, str(spec_files[f]), "--check", "3", *extra)
        assert code == 0, err
        assert "0 disagreements" in err
        assert I.parse_specs(out)
    assert run(capsys, "id-reduce", "quad", str(spec_files["a"]))[0] == 2
    assert run(capsys, "id-eval", str(spec_files["s"]), "2", "--lambda", "1", "--clock", "2")[0] == 0


def test_gadget(capsys, spec_files):
    code, out, _ = run(capsys, "gadget", str(spec_files["a"]), "5", "--clock", "1")
    assert code == 0
    g = int(out, 16)
    _, bit, _ = run(capsys, "gadget", str(spec_files["a"]), "5", "--clock", "1", "--bit", "3")
    assert int(bit) == (g >> 3) & 1
    assert run(capsys, "gadget", str(spec_files["a"]), "5", "--bit-budget", "8")[0] == 1


def test_numeric_commands(capsys):
    assert run(capsys, "tree", "5")[1] == "1\n"
    assert run(capsys, "count", "53")[1] == "4\n"
    assert run(capsys, "count", "255", "--phi", "(exists (k 3) (= i (lin index (k 2) 0)))")[1] == "3\n"
    code, out, _ = run(capsys, "vsum", "0b1111", "--width", "3", "--phi", "(Bit j (lin index (i 1) 0))")
    assert (code, out) == (0, "6\n")
    code, out, err = run(capsys, "translate", "(Bit 1 x)", "--words", "x=6")
    assert (code, out, err) == (0, "(p 1 1)\n", "true\n")


def test_blast(capsys):
    code, out, err = run(capsys, "blast", "add", "--widths", "4", "4", "--check", "50", "--seed", "3")
    assert code == 0 and "0 mismatches" in err
    code2, out2, _ = run(capsys, "blast", "add", "--widths", "4", "4", "--check", "50", "--seed", "3")
    assert out2 == out
    assert run(capsys, "blast", "smash", "--widths", "8", "8", "--gate-budget", "5")[0] == 1
    assert run(capsys, "blast", "part", "--widths", "8", "--consts", "2", "5", "--check", "20")[0] == 0


def test_usage_errors(capsys):
    with pytest.raises(SystemExit) as e:
        main(["bogus"])
    assert e.value.code == 2
    capsys.readouterr()
    assert run(capsys, "eval", "(p0 &")[0] == 2
    assert run(capsys, "tree", "5", "--bit-budget", "0")[0] == 2


def test_selftest_quick(capsys):
    code, out, _ = run(capsys, "selftest", "--seed", "42", "--quick")
    assert code == 0
    assert out.count("PASS") == 10
