import math

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from entcon.schmidt import (
    AsymptoticProfile,
    StateError,
    entropy,
    gaussian_cdf,
    gaussian_quantile,
    schmidt_overlap_fidelity,
    validate_schmidt,
    varentropy,
)

mpmath.mp.dps = 40


def mp_entropy(p):
    return -sum(mpmath.mpf(x) * mpmath.log(mpmath.mpf(x), 2) for x in p)


def mp_varentropy(p):
    h = mp_entropy(p)
    return sum(mpmath.mpf(x) * (-mpmath.log(mpmath.mpf(x), 2) - h) ** 2 for x in p)


# probability vectors built from positive weights
weights = st.lists(st.floats(min_value=1e-3, max_value=1.0), min_size=1, max_size=6)


def normalized(ws):
    total = math.fsum(ws)
    return [w / total for w in ws]


class TestValidate:
    def test_sorts(self):
        assert validate_schmidt([0.2, 0.8]).probs == (0.8, 0.2)

    def test_strips_zeros(self):
        p = validate_schmidt([0.5, 0.5, 0.0])
        assert p.probs == (0.5, 0.5)
        assert p.rank == 2

    def test_rejects_unnormalized(self):
        with pytest.raises(StateError, match="not normalized"):
            validate_schmidt([0.5, 0.6])

    @pytest.mark.parametrize("raw", [[], [0.0, 0.0], [1.2, -0.2], [float("nan"), 1.0]])
    def test_rejects_malformed(self, raw):
        with pytest.raises(StateError):
            validate_schmidt(raw)

    def test_accepts_within_tolerance_without_renormalizing(self):
        p = validate_schmidt([0.7, 0.3 + 5e-11])
        assert p.probs[1] == 0.3 + 5e-11


class TestEntropy:
    def test_ebit(self):
        assert entropy(validate_schmidt([0.5, 0.5])) == 1.0

    def test_product(self):
        assert entropy(validate_schmidt([1.0])) == 0.0

    def test_binary_against_high_precision(self):
        expected = float(mp_entropy([0.8, 0.2]))
        assert expected == pytest.approx(0.7219280948873623, abs=1e-15)
        assert entropy(validate_schmidt([0.8, 0.2])) == pytest.approx(expected, abs=1e-15)

    def test_varentropy_values(self):
        assert varentropy(validate_schmidt([0.5, 0.5])) == 0.0
        assert varentropy(validate_schmidt([1.0])) == 0.0
        expected = float(mp_varentropy([0.8, 0.2]))
        assert expected == pytest.approx(0.64, abs=1e-15)
        assert varentropy(validate_schmidt([0.8, 0.2])) == pytest.approx(expected, abs=1e-14)

    @given(weights, st.randoms(use_true_random=False))
    def test_permutation_invariance(self, ws, rnd):
        p = normalized(ws)
        q = list(p)
        rnd.shuffle(q)
        assert entropy(q) == pytest.approx(entropy(p), abs=1e-13)
        assert varentropy(q) == pytest.approx(varentropy(p), abs=1e-13)

    @given(weights)
    def test_matches_high_precision(self, ws):
        p = normalized(ws)
        assert entropy(p) == pytest.approx(float(mp_entropy(p)), abs=1e-12)
        assert varentropy(p) == pytest.approx(float(mp_varentropy(p)), abs=1e-12)

    @given(st.integers(min_value=1, max_value=12))
    def test_uniform_has_zero_varentropy(self, m):
        prof = AsymptoticProfile.of(validate_schmidt([1.0 / m] * m))
        assert prof.varentropy_V == 0.0
        assert prof.entropy_H == pytest.approx(math.log2(m), abs=1e-12)

    @given(weights)
    def test_entropy_range(self, ws):
        p = validate_schmidt(normalized(ws))
        h = entropy(p)
        assert -1e-15 <= h <= math.log2(p.rank) + 1e-12
        assert (varentropy(p) == 0.0) == p.is_uniform


class TestGaussian:
    def test_median(self):
        assert gaussian_cdf(0.0) == 0.5

    def test_saturation(self):
        assert gaussian_cdf(40.0) == 1.0
        assert gaussian_cdf(1e6) == 1.0

    def test_against_quadrature(self):
        x = 1.6448536269514722
        ref = mpmath.quad(lambda t: mpmath.exp(-t * t / 2) / mpmath.sqrt(2 * mpmath.pi), [-mpmath.inf, x])
        assert abs(gaussian_cdf(x) - float(ref)) <= 1e-12
        assert gaussian_cdf(x) == pytest.approx(0.95, abs=1e-10)

    @pytest.mark.parametrize("x", [-8.0, -3.3, -1.0, 0.25, 2.0, 5.5])
    def test_accuracy_grid(self, x):
        ref = mpmath.ncdf(x)
        assert abs(gaussian_cdf(x) - float(ref)) <= 1e-12

    def test_quantile_against_bisection(self):
        lo, hi = 0.0, 5.0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if gaussian_cdf(mid) < 0.975:
                lo = mid
            else:
                hi = mid
        x = gaussian_quantile(0.975)
        assert x == pytest.approx(1.959964, abs=1e-6)
        assert x == pytest.approx(0.5 * (lo + hi), abs=1e-12)

    def test_quantile_median(self):
        assert gaussian_quantile(0.5) == 0.0

    @pytest.mark.parametrize("q", [0.0, 1.0, -0.1, 1.5])
    def test_quantile_domain(self, q):
        with pytest.raises(ValueError):
            gaussian_quantile(q)

    @given(st.floats(min_value=-10, max_value=10))
    def test_symmetry(self, x):
        assert abs(gaussian_cdf(-x) + gaussian_cdf(x) - 1.0) <= 2e-12

    @given(st.floats(min_value=-10, max_value=10), st.floats(min_value=0, max_value=3))
    def test_monotone(self, x, dx):
        assert gaussian_cdf(x + dx) >= gaussian_cdf(x)

    @given(st.floats(min_value=-6, max_value=6))
    def test_quantile_inverts_cdf(self, x):
        assert gaussian_quantile(gaussian_cdf(x)) == pytest.approx(x, abs=1e-8)

    @given(st.floats(min_value=1e-12, max_value=1 - 1e-12))
    def test_quantile_residual(self, q):
        assert abs(gaussian_cdf(gaussian_quantile(q)) - q) <= 1e-10


class TestOverlap:
    def test_identical(self):
        assert schmidt_overlap_fidelity([0.5, 0.5], [0.5, 0.5]) == 1.0

    def test_orthogonal_padded(self):
        assert schmidt_overlap_fidelity([1.0], [0.0, 1.0]) == 0.0

    def test_direct_sum(self):
        expected = math.sqrt(0.4) + math.sqrt(0.1)
        assert schmidt_overlap_fidelity([0.8, 0.2], [0.5, 0.5]) == pytest.approx(expected, abs=1e-15)
        assert expected == pytest.approx(0.948683, abs=1e-6)

    def test_rejects_unnormalized(self):
        with pytest.raises(ValueError):
            schmidt_overlap_fidelity([0.5, 0.6], [1.0])

    @given(weights, weights)
    def test_bounds(self, a, b):
        p, q = normalized(a), normalized(b)
        assert schmidt_overlap_fidelity(p, p) == pytest.approx(1.0, abs=1e-12)
        assert 0.0 <= schmidt_overlap_fidelity(p, q) <= 1.0
