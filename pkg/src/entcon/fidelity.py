"""Optimal LOCC conversion errors and the minimum concentration-recovery error.

Conversions are parameterized by an e-bit count ``ell``; the maximally
entangled target then has Schmidt rank ``L = 2**ell``.  The error of a
conversion is ``1 - F**2`` for the optimal fidelity ``F``.

Concentration ``psi^{(x)n} -> Phi^{(x)ell}`` is optimal through the
flattened state whose largest ``J - 1`` coefficients are kept and the rest
of the mass is spread evenly over the remaining ``L + 1 - J`` slots.
Dilution ``Phi^{(x)ell} -> psi^{(x)M}`` keeps the ``L`` largest coefficients
of the target.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .schmidt import SchmidtVector, AsymptoticProfile
from .spectrum import TypeClassSpectrum, build_spectrum, top_count_sum

# Relative slack in the defining inequality of J.  At an exact tie both
# candidate J values give the same fidelity, so the slack only fixes which
# index is reported.
_J_REL_TOL = 1e-12
_LN2 = math.log(2.0)

SCAN_SIGMAS = 10.0
# Round-trip errors closer than this are treated as equal when picking ell*.
TIE_TOL = 1e-12


@dataclass(frozen=True)
class ConcentrationTarget:
    """The optimally flattened state used for concentration into rank ``size_L``.

    ``head_sqrt_log2`` is the base-2 log of the sum of square roots of the
    ``J - 1`` kept coefficients (``-inf`` when ``J == 1``); ``tail_mass`` is
    the probability spread over the last ``size_L + 1 - J`` slots.
    """

    J: int
    head_sqrt_log2: float
    tail_mass: float
    tail_log2: float
    size_L: int

    @property
    def head_sqrt_sum(self) -> float:
        if self.head_sqrt_log2 > 1000:
            return math.inf
        return 2.0**self.head_sqrt_log2

    @property
    def flat_coefficient(self) -> float:
        return self.tail_mass / (self.size_L + 1 - self.J)

    def log2_fidelity(self) -> float:
        """log2 of the fidelity with the maximally entangled state of size ``size_L``."""
        slots = self.size_L + 1 - self.J
        if self.tail_log2 == -math.inf or slots <= 0:
            flat = -math.inf
        else:
            flat = 0.5 * (math.log2(slots) + self.tail_log2)
        return float(np.logaddexp2(self.head_sqrt_log2, flat)) - 0.5 * math.log2(self.size_L)


def _flat_condition(spec: TypeClassSpectrum, k: int, size_L: int) -> bool:
    # Every j whose predecessor index lies in class k satisfies
    # tail_j / (L + 1 - j) < p_{j-1}  iff  S_k < (L - s_k) e_k,
    # with s_k the number of eigenvalues before class k and S_k their complement mass.
    starts = spec._starts
    if starts[k] + 2 > size_L:
        return False
    room = size_L - starts[k]
    lhs = spec.log2_suffix_mass(k)
    rhs = math.log2(room) + float(spec.log2_eig[k])
    return lhs < rhs + math.log2(1.0 - _J_REL_TOL)


def concentration_target(spec: TypeClassSpectrum, size_L: int) -> ConcentrationTarget:
    """Locate ``J`` and the flattened tail for concentration into rank ``size_L``.

    The feasible classes form a prefix (the quantity ``s_k + S_k / e_k`` is
    non-decreasing in ``k``), so the last feasible class is found by
    bisection and ``J`` is the largest index it admits.
    """
    if size_L < 1:
        raise ValueError(f"size_L must be >= 1, got {size_L}")
    starts = spec._starts
    dim = spec.total_dim
    K = spec.n_classes
    if size_L > dim:
        # beyond the support p = 0, so j = dim + 1 is the last feasible index
        return ConcentrationTarget(
            J=dim + 1,
            head_sqrt_log2=spec.log2_sqrt_prefix(K),
            tail_mass=0.0,
            tail_log2=-math.inf,
            size_L=size_L,
        )
    lo, hi = 0, K  # first infeasible class lies in [lo, hi]
    while lo < hi:
        mid = (lo + hi) // 2
        if _flat_condition(spec, mid, size_L):
            lo = mid + 1
        else:
            hi = mid
    if lo == 0:
        J = 1
    else:
        k = lo - 1
        J = min(starts[k + 1] + 1, size_L)
    # class c holds index J; kept head is indices 1..J-1
    c = spec.class_of_index(J)
    lam = float(spec.log2_eig[c])
    before = J - 1 - starts[c]
    head = spec.log2_sqrt_prefix(c)
    if before:
        head = float(np.logaddexp2(head, math.log2(before) + 0.5 * lam))
    left = starts[c + 1] - (J - 1)
    tail_log2 = float(np.logaddexp2(math.log2(left) + lam, spec.log2_suffix_mass(c + 1)))
    tail_lin = 2.0 ** (math.log2(left) + lam) + spec._suffix_mass[c + 1]
    if J == 1:
        tail_log2, tail_lin = math.log2(spec.total_mass()), spec.total_mass()
    return ConcentrationTarget(
        J=J, head_sqrt_log2=head, tail_mass=min(tail_lin, 1.0), tail_log2=tail_log2, size_L=size_L
    )


def j_index(spec: TypeClassSpectrum, size_L: int) -> int:
    """Index ``J`` of the first flattened coefficient for target rank ``size_L``."""
    return concentration_target(spec, size_L).J


def _error_from_log2_fidelity(log2_f: float) -> float:
    err = -math.expm1(2.0 * log2_f * _LN2)
    return min(1.0, max(0.0, err))


def concentration_error_for_size(spec: TypeClassSpectrum, size_L: int) -> float:
    """Minimal error of ``psi^{(x)n} -> Phi_L`` for an arbitrary integer rank ``L``."""
    return _error_from_log2_fidelity(concentration_target(spec, size_L).log2_fidelity())


def concentration_error(spec: TypeClassSpectrum, ell: int) -> float:
    """Minimal error of concentrating ``spec`` into ``ell`` e-bits."""
    if ell < 0:
        raise ValueError(f"ell must be >= 0, got {ell}")
    return concentration_error_for_size(spec, 1 << ell)


def dilution_error_for_size(spec_M: TypeClassSpectrum, size_L: int) -> float:
    """Minimal error of ``Phi_L -> psi^{(x)M}``: the mass outside the top ``L``."""
    return spec_M.mass_after(size_L)


def dilution_error(spec_M: TypeClassSpectrum, ell: int) -> float:
    """Minimal error of diluting ``ell`` e-bits into the target spectrum.

    Equal to ``1 - top_count_sum(spec_M, 2**ell)``; evaluated from the small
    end of the spectrum so that tiny errors keep their relative precision.
    """
    if ell < 0:
        raise ValueError(f"ell must be >= 0, got {ell}")
    return dilution_error_for_size(spec_M, 1 << ell)


@dataclass(frozen=True)
class MCREResult:
    """Optimal round trip ``psi^{(x)n} -> Phi^{(x)ell*} -> psi^{(x)M}``."""

    ell_star: int
    e_C: float
    e_R: float
    delta: float
    scan_window: tuple[int, int]
    n: int = 0
    M: int = 0


class _RoundTrip:
    """Caches both error curves for one (source, target) pair of spectra."""

    def __init__(self, source: TypeClassSpectrum, target: TypeClassSpectrum):
        self.source = source
        self.target = target
        self.conc = lru_cache(maxsize=None)(lambda ell: concentration_error(source, ell))
        self.dil = lru_cache(maxsize=None)(lambda ell: dilution_error(target, ell))

    def delta(self, ell: int) -> float:
        return self.conc(ell) + self.dil(ell)


def _initial_window(prof: AsymptoticProfile, n: int) -> tuple[int, int]:
    H, V = prof.entropy_H, prof.varentropy_V
    if V == 0.0:
        return math.floor(H * n) - 2, math.ceil(H * n) + 2
    spread = SCAN_SIGMAS * math.sqrt(V * n)
    return math.floor(H * n - spread), math.ceil(H * n + spread)


def _full_range(p: SchmidtVector, n: int) -> int:
    # smallest ell with 2**ell >= rank**n
    return ((p.rank**n) - 1).bit_length()


def argmin_with_ties(values) -> int:
    """Index of the minimum; entries within ``TIE_TOL`` of it count as ties
    and the first one wins."""
    best = min(values)
    for i, v in enumerate(values):
        if v <= best + TIE_TOL:
            return i
    raise ValueError("empty sequence")


def _scan(trip: _RoundTrip, lo: int, hi: int) -> tuple[int, float]:
    values = [trip.delta(ell) for ell in range(lo, hi + 1)]
    return lo + argmin_with_ties(values), min(values)


def _mcre_from_trip(trip: _RoundTrip, prof: AsymptoticProfile, n: int, M: int) -> MCREResult:
    full_hi = _full_range(trip.source.base, n)
    c_lo, c_hi = _initial_window(prof, n)
    center = 0.5 * (c_lo + c_hi)
    half = 0.5 * (c_hi - c_lo)
    while True:
        lo = max(0, math.floor(center - half))
        hi = min(full_hi, math.ceil(center + half))
        if lo > hi:
            lo, hi = 0, full_hi
        ell, best = _scan(trip, lo, hi)
        lo_ok = lo == 0 or trip.delta(lo) > best
        hi_ok = hi == full_hi or trip.delta(hi) > best
        if (lo_ok and hi_ok) or (lo == 0 and hi == full_hi):
            break
        half *= 2.0
    return MCREResult(
        ell_star=ell,
        e_C=trip.conc(ell),
        e_R=trip.dil(ell),
        delta=trip.conc(ell) + trip.dil(ell),
        scan_window=(lo, hi),
        n=n,
        M=M,
    )


def mcre(
    p: SchmidtVector,
    n: int,
    M: int,
    *,
    source: TypeClassSpectrum | None = None,
    target: TypeClassSpectrum | None = None,
) -> MCREResult:
    """Minimum concentration-recovery error for ``n`` copies recovered as ``M``.

    Minimizes concentration error plus dilution error over the e-bit count.
    The scan starts ``10`` standard deviations around ``H n`` and doubles
    until both window endpoints are strictly worse than the interior
    minimum (or the window covers ``[0, ceil(n log2 rank)]``).  Ties go to
    the smaller ``ell``.

    Raises
    ------
    ValueError
        If ``M > n`` or either count is below 1.
    """
    if n < 1 or M < 1:
        raise ValueError(f"need n >= 1 and M >= 1, got n={n}, M={M}")
    if M > n:
        raise ValueError(f"recovery target M={M} exceeds source copies n={n}")
    source = source if source is not None else build_spectrum(p, n)
    target = target if target is not None else build_spectrum(p, M)
    return _mcre_from_trip(_RoundTrip(source, target), AsymptoticProfile.of(p), n, M)


@dataclass(frozen=True)
class LossResult:
    """Smallest copy loss ``n - M`` whose MCRE is at most ``epsilon``."""

    loss: int
    result: MCREResult
    achieved: bool


def min_loss_for_epsilon(p: SchmidtVector, n: int, epsilon: float) -> LossResult:
    """Smallest ``n - M`` with ``mcre(p, n, M).delta <= epsilon``.

    Bisects over ``M`` using that the MCRE does not increase as ``M``
    decreases.  If even ``M = 1`` misses ``epsilon`` the loss ``n - 1`` is
    returned with ``achieved=False``.
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon!r}")
    prof = AsymptoticProfile.of(p)
    source = build_spectrum(p, n)
    conc = lru_cache(maxsize=None)(lambda ell: concentration_error(source, ell))
    results: dict[int, MCREResult] = {}

    def at(M: int) -> MCREResult:
        if M not in results:
            trip = _RoundTrip(source, source if M == n else build_spectrum(p, M))
            trip.conc = conc
            results[M] = _mcre_from_trip(trip, prof, n, M)
        return results[M]

    if at(n).delta <= epsilon:
        return LossResult(0, at(n), True)
    if at(1).delta > epsilon:
        return LossResult(n - 1, at(1), False)
    good, bad = 1, n  # delta(good) <= epsilon < delta(bad)
    while bad - good > 1:
        mid = (good + bad) // 2
        if at(mid).delta <= epsilon:
            good = mid
        else:
            bad = mid
    return LossResult(n - good, at(good), True)


__all__ = [
    "ConcentrationTarget",
    "LossResult",
    "MCREResult",
    "concentration_error",
    "concentration_error_for_size",
    "concentration_target",
    "dilution_error",
    "dilution_error_for_size",
    "j_index",
    "mcre",
    "min_loss_for_epsilon",
    "top_count_sum",
]
