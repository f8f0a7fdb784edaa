import pytest

from entcon.fidelity import mcre
from entcon.oracle import (
    OracleGuardError,
    brute_concentration_error,
    brute_mcre,
    brute_spectrum,
)
from entcon.schmidt import validate_schmidt


def test_brute_spectrum_examples(binary, ternary):
    assert brute_spectrum(binary, 2).eigenvalues == pytest.approx([0.64, 0.16, 0.16, 0.04], abs=1e-15)
    assert brute_spectrum(validate_schmidt([1.0]), 5).eigenvalues == (1.0,)
    expected = [0.25, 0.15, 0.15, 0.10, 0.10, 0.09, 0.06, 0.06, 0.04]
    assert brute_spectrum(ternary, 2).eigenvalues == pytest.approx(expected, abs=1e-15)


def test_brute_concentration_examples(binary, ternary):
    assert brute_concentration_error(brute_spectrum(binary, 1), 2) == pytest.approx(0.1, abs=1e-15)
    assert brute_concentration_error(brute_spectrum(validate_schmidt([0.5, 0.5]), 1), 2) == pytest.approx(0.0, abs=1e-15)
    assert brute_concentration_error(brute_spectrum(ternary, 1), 2) == pytest.approx(0.0, abs=1e-15)


def test_brute_mcre_examples(binary):
    r = brute_mcre(validate_schmidt([0.5, 0.5]), 2, 2)
    assert (r.ell_star, r.delta) == (2, 0.0)
    r = brute_mcre(binary, 1, 1)
    assert r.ell_star == 1 and r.delta == pytest.approx(0.1, abs=1e-15)


def test_brute_mcre_matches_engine_golden(binary):
    ref = brute_mcre(binary, 3, 2)
    got = mcre(binary, 3, 2)
    assert (got.ell_star, ref.ell_star) == (2, 2)
    assert got.delta == pytest.approx(ref.delta, abs=1e-12)
    assert ref.delta == pytest.approx(0.073112023729002, abs=1e-12)


def test_guards(binary):
    with pytest.raises(OracleGuardError):
        brute_spectrum(binary, 21)
    with pytest.raises(OracleGuardError):
        brute_mcre(binary, 3, 4)
    with pytest.raises(OracleGuardError):
        brute_concentration_error(brute_spectrum(binary, 1), 10**7)


@pytest.mark.parametrize("probs", [[0.8, 0.2], [0.5, 0.5], [0.5, 0.3, 0.2], [0.6, 0.3, 0.1]])
def test_mcre_grid(probs):
    p = validate_schmidt(probs)
    for n in range(1, 9):
        if p.rank**n > 10**5:
            continue
        for M in range(1, n + 1):
            ref = brute_mcre(p, n, M)
            got = mcre(p, n, M)
            assert got.ell_star == ref.ell_star, (n, M)
            assert abs(got.delta - ref.delta) <= 1e-12
