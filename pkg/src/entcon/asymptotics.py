"""Closed-form large-n limits for concentration, dilution and recovery.

E-bit counts are written ``ell_n = a n + b sqrt(n)`` and recovered copy
counts ``M_n = n + b' sqrt(n)`` (or ``n + beta sqrt(n)`` for the recovery
rate).  At the critical first-order rate ``a = H`` the limits are Gaussian
in the second-order rate; for a maximally entangled state (``V = 0``) the
Gaussian is replaced by a step: 0 for non-positive arguments, 1 otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .schmidt import AsymptoticProfile, gaussian_cdf, gaussian_quantile

# First-order rates closer than this to H count as critical.
RATE_TOL = 1e-12


@dataclass(frozen=True)
class RateParams:
    """Rate coefficients: ``a`` (bits/copy), ``b`` (bits/sqrt copy),
    ``b_prime`` and ``beta`` (copies/sqrt copy)."""

    a: float
    b: float = 0.0
    b_prime: float = 0.0
    beta: float = 0.0

    def __post_init__(self):
        for name in ("a", "b", "b_prime", "beta"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.a < 0:
            raise ValueError(f"first-order rate must be >= 0, got {self.a}")


def _scaled_gaussian(x: float, V: float) -> float:
    """``G(x / sqrt(V))`` with the step extension at ``V = 0``."""
    if V == 0.0:
        return 0.0 if x <= 0.0 else 1.0
    return gaussian_cdf(x / math.sqrt(V))


def _regime(a: float, H: float) -> int:
    if abs(a - H) <= RATE_TOL * max(1.0, H):
        return 0
    return -1 if a < H else 1


def concentration_limit(r: RateParams, prof: AsymptoticProfile) -> float:
    """Limit of the optimal error of ``psi^{(x)n} -> Phi^{(x)(a n + b sqrt n)}``."""
    regime = _regime(r.a, prof.entropy_H)
    if regime < 0:
        return 0.0
    if regime > 0:
        return 1.0
    return _scaled_gaussian(r.b, prof.varentropy_V)


def dilution_limit(r: RateParams, prof: AsymptoticProfile) -> float:
    """Limit of the optimal error of ``Phi^{(x)(a n + b sqrt n)} -> psi^{(x)(n + b' sqrt n)}``."""
    regime = _regime(r.a, prof.entropy_H)
    if regime < 0:
        return 1.0
    if regime > 0:
        return 0.0
    return 1.0 - _scaled_gaussian(r.b - prof.entropy_H * r.b_prime, prof.varentropy_V)


def mcre_limit_predictor(beta: float, prof: AsymptoticProfile) -> float:
    """Limit of the MCRE for ``M_n = n + beta sqrt(n)`` after optimizing ``b``.

    Raises ``ValueError`` for a maximally entangled profile (``V = 0``).
    """
    V = prof.varentropy_V
    if V <= 0.0:
        raise ValueError("MCRE limit predictor needs V > 0")
    x = prof.entropy_H * beta / (2.0 * math.sqrt(V))
    # 1 - G(-x) is evaluated as G(x) so the deep tail keeps its precision
    return min(1.0, gaussian_cdf(x) + gaussian_cdf(x))


def recovery_rate(prof: AsymptoticProfile, epsilon: float) -> float:
    """Minimal copy loss per ``sqrt(n)`` for a round-trip error of ``epsilon``.

    ``2 sqrt(V) / H * G^{-1}(1 - epsilon / 2)``; zero when ``V = 0``.

    Raises
    ------
    ValueError
        If ``epsilon`` is outside ``(0, 1)`` (the rate diverges as
        ``epsilon -> 0``) or ``H = 0``.
    """
    if not 0.0 < epsilon < 1.0:
        if epsilon <= 0.0:
            raise ValueError(f"recovery rate diverges as epsilon -> 0; got epsilon={epsilon!r}")
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon!r}")
    H, V = prof.entropy_H, prof.varentropy_V
    if H <= 0.0:
        raise ValueError("recovery rate undefined for a product state (H = 0)")
    if V == 0.0:
        return 0.0
    return 2.0 * math.sqrt(V) / H * gaussian_quantile(1.0 - epsilon / 2.0)
