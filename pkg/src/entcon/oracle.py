"""Brute-force reference computations for tiny instances.

Everything here works on the fully materialized eigenvalue list and follows
the defining formulas literally, without log-domain shortcuts.  It exists to
certify the type-class engine, so keep it slow and obvious.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

from .fidelity import MCREResult, argmin_with_ties
from .schmidt import SchmidtVector, schmidt_overlap_fidelity

MAX_DENSE = 10**6
MAX_SIZE_L = 10**6
MAX_MCRE_DIM = 10**5


class OracleGuardError(ValueError):
    """Instance too large for brute force."""


@dataclass(frozen=True)
class DenseSpectrum:
    eigenvalues: tuple[float, ...]

    def __len__(self) -> int:
        return len(self.eigenvalues)


def brute_spectrum(p: SchmidtVector, n: int) -> DenseSpectrum:
    """All ``M**n`` tensor-product eigenvalues, sorted non-increasing."""
    if p.rank**n > MAX_DENSE:
        raise OracleGuardError(f"{p.rank}**{n} eigenvalues exceed {MAX_DENSE}")
    values = [math.prod(t) for t in itertools.product(p.probs, repeat=n)]
    values.sort(reverse=True)
    return DenseSpectrum(tuple(values))


def brute_j_index(dense: DenseSpectrum, size_L: int) -> int:
    L = size_L
    p = list(dense.eigenvalues) + [0.0] * max(0, L - len(dense))
    tails = [0.0] * (len(p) + 1)
    for i in range(len(p) - 1, -1, -1):
        tails[i] = tails[i + 1] + p[i]
    J = 1
    for j in range(2, L + 1):
        # 1-based: sum_{i>=j} p_i / (L + 1 - j) < p_{j-1}
        if tails[j - 1] / (L + 1 - j) < p[j - 2]:
            J = j
    return J


def brute_eta(dense: DenseSpectrum, size_L: int) -> list[float]:
    """Schmidt coefficients of the optimal flattened state of rank ``size_L``."""
    L = size_L
    J = brute_j_index(dense, L)
    p = list(dense.eigenvalues) + [0.0] * max(0, L - len(dense))
    flat = sum(p[J - 1 :]) / (L + 1 - J)
    return p[: J - 1] + [flat] * (L + 1 - J)


def brute_concentration_error(dense: DenseSpectrum, size_L: int) -> float:
    if size_L > MAX_SIZE_L:
        raise OracleGuardError(f"size_L={size_L} exceeds {MAX_SIZE_L}")
    eta = brute_eta(dense, size_L)
    uniform = [1.0 / size_L] * size_L
    f = schmidt_overlap_fidelity(eta, uniform)
    return 1.0 - f * f


def brute_dilution_error(dense: DenseSpectrum, size_L: int) -> float:
    return max(0.0, 1.0 - sum(dense.eigenvalues[:size_L]))


def brute_mcre(p: SchmidtVector, n: int, M: int) -> MCREResult:
    """Exhaustive e-bit scan over ``[0, ceil(n log2 rank)]`` on dense spectra."""
    if M > n:
        raise OracleGuardError(f"M={M} exceeds n={n}")
    if p.rank**n > MAX_MCRE_DIM:
        raise OracleGuardError(f"{p.rank}**{n} exceeds {MAX_MCRE_DIM}")
    source = brute_spectrum(p, n)
    target = brute_spectrum(p, M)
    top = math.ceil(n * math.log2(p.rank) - 1e-12) if p.rank > 1 else 0
    pairs = [
        (brute_concentration_error(source, 2**ell), brute_dilution_error(target, 2**ell))
        for ell in range(top + 1)
    ]
    ell = argmin_with_ties([a + b for a, b in pairs])
    e_c, e_r = pairs[ell]
    delta = e_c + e_r
    return MCREResult(ell_star=ell, e_C=e_c, e_R=e_r, delta=delta, scan_window=(0, top), n=n, M=M)
