import pytest

from logdepth import fastplof as FP
from logdepth import frege as FR
from logdepth import plof as P

SYSTEM = FR.FregeSystem.default()


def w(text: str) -> P.SymbolWord:
    return P.to_plof(P.parse_infix(text))


K_INSTANCE = "p0 -> (p1 -> p0)"


def mp_proof():
    a = f"({K_INSTANCE})"
    return FR.FregeProof([w(f"{a} -> (p10 -> {a})"), w(a), w(f"p10 -> {a}")])


def test_default_system():
    assert len(SYSTEM.schemes) >= 3
    again = FR.FregeSystem.from_text(SYSTEM.to_text())
    assert [s.name for s in again.schemes] == [s.name for s in SYSTEM.schemes]


def test_non_tautological_scheme_rejected():
    with pytest.raises(FR.FregeError):
        FR.FregeSystem.from_text("(scheme bad (-> A B))")
    with pytest.raises(Exception):
        FR.FregeSystem.from_text("(axiom K (-> A A))")


def test_match_modulo_converse():
    f = P.from_plof(w("p0 -> (p1 -> p0)"))
    assert SYSTEM.match(f) == "K"
    g = P.from_plof(w("(p1 | p10) -> (p0 -> (p1 | p10))"))
    assert SYSTEM.match(g) == "K"
    assert SYSTEM.match(P.from_plof(w("p0 -> p1"))) is None


def test_mp_example():
    r = FR.check_proof(mp_proof(), SYSTEM, w(f"p10 -> ({K_INSTANCE})"))
    assert r
    assert r.justification[2][0] == "mp"
    broken = FR.FregeProof([mp_proof().lines[0], mp_proof().lines[2]])
    r = FR.check_proof(broken, SYSTEM)
    assert not r and r.line == 1


def test_target_mismatch_and_bad_lines():
    r = FR.check_proof(mp_proof(), SYSTEM, w("p0"))
    assert not r and "target" in r.reason
    assert not FR.check_proof(FR.FregeProof([]), SYSTEM)
    junk = P.word_from_postfix_text("∧ p0")
    assert not FR.check_proof(FR.FregeProof([junk]), SYSTEM)


def test_beta_and_fpf():
    proof = mp_proof()
    word = proof.to_word()
    assert FR.beta(0, word) == proof.lines[0]
    assert FR.beta(2, word) == proof.lines[2]
    assert FR.beta(0, proof.lines[0]) == proof.lines[0]
    with pytest.raises(IndexError):
        FR.beta(3, word)
    assert FR.FregeProof.from_fpf(proof.to_fpf()).lines == proof.lines
    assert FR.FregeProof.from_word(word).lines == proof.lines


def test_reflection(rng):
    proof = mp_proof()
    for _ in range(20):
        assert FR.reflection_check(proof, SYSTEM, P.random_sigma(rng, 3))
    bogus = FR.FregeProof([w("p0")])
    assert FR.reflection_check(bogus, SYSTEM, {0: False})


def test_taut():
    assert FR.taut_check(P.word_from_postfix_text("p0 p0 ¬ ∨"))
    assert not FR.taut_check(w("p0"))


def test_generated_proofs(rng):
    for _ in range(25):
        proof = FR.generate_proof(rng, SYSTEM, nvars=rng.randrange(1, 17), steps=rng.randrange(1, 7))
        target = proof.lines[-1]
        r = FR.check_proof(proof, SYSTEM, target)
        assert r, r.report()
        for line in proof.lines:
            assert FP.taut_check(line, max_vars=16)
        for k, line in enumerate(proof.lines):
            m = FR.mutate_line(rng, line)
            assert not FP.taut_check(m, max_vars=20, algo="naive")
            bad = FR.FregeProof(list(proof.lines))
            bad.lines[k] = m
            assert not FR.check_proof(bad, SYSTEM, target)


def test_report_shape():
    rep = FR.check_proof(mp_proof(), SYSTEM).report()
    assert set(rep) == {"accepted", "line", "reason", "justification"}
