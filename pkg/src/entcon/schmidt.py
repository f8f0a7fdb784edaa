"""Schmidt-coefficient vectors, entropy statistics and Gaussian helpers.

All logarithms are base 2, so entropies are in bits and varentropies in
bits squared.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from statistics import NormalDist
from typing import Iterable, Sequence

NORM_TOL = 1e-10
_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


class StateError(ValueError):
    """Raised for malformed Schmidt-coefficient input."""


@dataclass(frozen=True)
class SchmidtVector:
    """Sorted, normalized Schmidt-coefficient probabilities of a pure state.

    Build instances through :func:`validate_schmidt`; the constructor does
    not re-check its input.
    """

    probs: tuple[float, ...]

    @property
    def rank(self) -> int:
        return len(self.probs)

    def __len__(self) -> int:
        return len(self.probs)

    def __iter__(self):
        return iter(self.probs)

    def __getitem__(self, i):
        return self.probs[i]

    @property
    def is_uniform(self) -> bool:
        return self.probs[0] - self.probs[-1] <= 1e-12


@dataclass(frozen=True)
class AsymptoticProfile:
    """Entropy ``H`` (bits) and varentropy ``V`` (bits^2) of one copy."""

    entropy_H: float
    varentropy_V: float

    @classmethod
    def of(cls, p: SchmidtVector) -> "AsymptoticProfile":
        return cls(entropy(p), varentropy(p))


def validate_schmidt(raw: Iterable[float]) -> SchmidtVector:
    """Sort, strip zeros and check normalization of a coefficient list.

    The input is accepted as-is when it sums to one within ``1e-10``; it is
    never silently renormalized.

    Raises
    ------
    StateError
        On empty input, negative or non-finite entries, an all-zero vector,
        or a sum that is off by more than ``1e-10``.
    """
    values = [float(v) for v in raw]
    if not values:
        raise StateError("empty Schmidt vector")
    for v in values:
        if not math.isfinite(v):
            raise StateError(f"non-finite Schmidt coefficient {v!r}")
        if v < 0:
            raise StateError(f"negative Schmidt coefficient {v!r}")
    kept = sorted((v for v in values if v > 0), reverse=True)
    if not kept:
        raise StateError("Schmidt vector has no positive entry")
    total = math.fsum(kept)
    if abs(total - 1.0) > NORM_TOL:
        raise StateError(f"Schmidt vector not normalized: sum = {total!r}")
    return SchmidtVector(tuple(kept))


def entropy(p: Sequence[float]) -> float:
    """Shannon entropy ``-sum p log2 p`` in bits."""
    return math.fsum(-x * math.log2(x) for x in p if x > 0)


def varentropy(p: Sequence[float]) -> float:
    """Variance of the surprisal ``-log2 p`` under ``p``, in bits^2."""
    probs = [x for x in p if x > 0]
    if max(probs) - min(probs) <= 1e-12:
        return 0.0
    h = entropy(probs)
    return math.fsum(x * (-math.log2(x) - h) ** 2 for x in probs)


def gaussian_cdf(x: float) -> float:
    """Standard normal CDF, saturating to exactly 1 for ``x >= 40``."""
    if x >= 40.0:
        return 1.0
    if x <= -40.0:
        return 0.0
    return 0.5 * math.erfc(-x / _SQRT2)


def gaussian_quantile(q: float) -> float:
    """Inverse of :func:`gaussian_cdf` on the open interval ``(0, 1)``."""
    if not 0.0 < q < 1.0:
        raise ValueError(f"Gaussian quantile undefined for q = {q!r}; need 0 < q < 1")
    x = NormalDist().inv_cdf(q)
    # Newton polish against our own CDF; the starting point is already ~1 ulp off.
    for _ in range(3):
        dens = _INV_SQRT_2PI * math.exp(-0.5 * x * x)
        if dens == 0.0:
            break
        step = (gaussian_cdf(x) - q) / dens
        x -= step
        if abs(step) <= 1e-16 * max(1.0, abs(x)):
            break
    return x


def schmidt_overlap_fidelity(p: Sequence[float], q: Sequence[float]) -> float:
    """Fidelity of two pure states that share a Schmidt basis.

    Reduces to ``sum_i sqrt(p_i q_i)``; the shorter list is zero-padded.
    """
    for name, vec in (("p", p), ("q", q)):
        if any(v < 0 for v in vec):
            raise StateError(f"{name} has a negative entry")
        if abs(math.fsum(vec) - 1.0) > NORM_TOL:
            raise StateError(f"{name} is not normalized")
    f = math.fsum(math.sqrt(a * b) for a, b in zip(p, q))
    return min(max(f, 0.0), 1.0)
