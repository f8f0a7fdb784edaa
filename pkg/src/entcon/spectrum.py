"""Exact type-class spectrum of ``rho^{(x)n}`` for a Schmidt vector ``rho``.

The ``M^n`` eigenvalues of the n-fold tensor power collapse into classes
indexed by compositions of ``n``.  Each class carries its base-2 log
eigenvalue and an exact integer multiplicity, so index thresholds such as
``2**7219`` are compared without rounding.  Probability sums are formed from
per-class masses with compensated accumulation; sums of astronomically
large quantities (square-root sums) are kept in the log domain.
"""

from __future__ import annotations

import bisect
import math
import os
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .schmidt import SchmidtVector

DEFAULT_CLASS_BUDGET = 5_000_000
BUDGET_ENV = "ENTCON_CLASS_BUDGET"
MERGE_TOL = 1e-12
SATURATION_LOG2 = 1000.0

# Masses below this fraction of the running total are dropped from linear sums;
# with at most 5e6 classes the total dropped mass stays below 5e-24.
_DROP_REL = 1e-30


class ClassBudgetError(RuntimeError):
    """The number of type classes exceeds the configured budget."""

    def __init__(self, n_classes: int, budget: int):
        super().__init__(
            f"type-class enumeration needs {n_classes} classes, budget is {budget}"
            f" (raise it with {BUDGET_ENV})"
        )
        self.n_classes = n_classes
        self.budget = budget


def class_budget() -> int:
    raw = os.environ.get(BUDGET_ENV)
    if raw is None or raw.strip() == "":
        return DEFAULT_CLASS_BUDGET
    return int(float(raw))


def _neumaier_cumsum(values) -> list[float]:
    """Running compensated sums ``[0, v0, v0+v1, ...]``."""
    out = [0.0]
    s = 0.0
    c = 0.0
    for v in values:
        v = float(v)
        if s != 0.0 and abs(v) < _DROP_REL * abs(s):
            out.append(s + c)
            continue
        t = s + v
        if abs(s) >= abs(v):
            c += (s - t) + v
        else:
            c += (v - t) + s
        s = t
        out.append(s + c)
    return out


def _log2_int(k: int) -> float:
    return math.log2(k) if k > 0 else -math.inf


@dataclass(frozen=True, eq=False)
class TypeClassSpectrum:
    """Grouped eigenvalue spectrum of ``(Tr_B psi)^{(x)n}``.

    Attributes
    ----------
    base : SchmidtVector
        Single-copy Schmidt coefficients.
    copies : int
        Number of tensor copies ``n``.
    log2_eig : numpy.ndarray
        Base-2 log eigenvalue of each class, strictly decreasing.
    mult : tuple of int
        Exact multiplicity of each class.
    total_dim : int
        ``M**n``.
    """

    base: SchmidtVector
    copies: int
    log2_eig: np.ndarray
    mult: tuple[int, ...]
    total_dim: int
    # derived lookup tables, filled in __post_init__
    _starts: list = field(init=False, repr=False)
    _log2_mult: np.ndarray = field(init=False, repr=False)
    _mass: np.ndarray = field(init=False, repr=False)
    _prefix_mass: list = field(init=False, repr=False)
    _suffix_mass: list = field(init=False, repr=False)
    _log2_suffix_mass: np.ndarray = field(init=False, repr=False)
    _log2_sqrt_prefix: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        set_ = object.__setattr__
        starts = [0]
        for m in self.mult:
            starts.append(starts[-1] + m)
        log2_mult = np.array([_log2_int(m) for m in self.mult], dtype=float)
        log2_mass = log2_mult + self.log2_eig
        mass = np.exp2(log2_mass)
        set_(self, "_starts", starts)
        set_(self, "_log2_mult", log2_mult)
        set_(self, "_mass", mass)
        set_(self, "_prefix_mass", _neumaier_cumsum(mass))
        suffix = _neumaier_cumsum(mass[::-1])[::-1]
        set_(self, "_suffix_mass", suffix)
        log2_suffix = np.empty(len(self.mult) + 1)
        log2_suffix[-1] = -np.inf
        log2_suffix[:-1] = np.logaddexp2.accumulate(log2_mass[::-1])[::-1]
        set_(self, "_log2_suffix_mass", log2_suffix)
        sqrt_terms = log2_mult + 0.5 * self.log2_eig
        log2_sqrt = np.empty(len(self.mult) + 1)
        log2_sqrt[0] = -np.inf
        log2_sqrt[1:] = np.logaddexp2.accumulate(sqrt_terms)
        set_(self, "_log2_sqrt_prefix", log2_sqrt)

    # -- basic views ---------------------------------------------------------

    @property
    def n_classes(self) -> int:
        return len(self.mult)

    @property
    def eigenvalues(self) -> np.ndarray:
        """Class eigenvalues (may underflow to 0 for very large ``copies``)."""
        return np.exp2(self.log2_eig)

    @property
    def class_masses(self) -> np.ndarray:
        return self._mass.copy()

    def class_starts(self) -> list[int]:
        """Number of sorted eigenvalues preceding each class (plus total)."""
        return list(self._starts)

    def total_mass(self) -> float:
        return self._prefix_mass[-1]

    def classes(self) -> Iterator[tuple[float, int]]:
        return zip(self.log2_eig.tolist(), self.mult)

    def expand(self) -> list[float]:
        """Materialize the full sorted eigenvalue list (small cases only)."""
        if self.total_dim > 10**7:
            raise ClassBudgetError(self.total_dim, 10**7)
        out: list[float] = []
        for lam, m in self.classes():
            out.extend([2.0**lam] * m)
        return out

    # -- index helpers -------------------------------------------------------

    def class_of_index(self, i: int) -> int:
        """Class holding the ``i``-th (1-based) largest eigenvalue."""
        if not 1 <= i <= self.total_dim:
            raise IndexError(i)
        return bisect.bisect_left(self._starts, i) - 1

    def _n_full_classes(self, count: int) -> int:
        return bisect.bisect_right(self._starts, count) - 1

    def _n_classes_geq(self, log2_threshold: float) -> int:
        # log2_eig is strictly decreasing; count entries >= threshold
        return int(np.searchsorted(-self.log2_eig, -log2_threshold, side="right"))

    def head_mass(self, count: int) -> float:
        """Sum of the ``count`` largest eigenvalues (alias of :func:`top_count_sum`)."""
        return top_count_sum(self, count)

    def mass_after(self, count: int) -> float:
        """Mass of all eigenvalues ranked below the ``count`` largest.

        Accumulated from the small end, so it stays accurate when tiny.
        """
        if count >= self.total_dim:
            return 0.0
        if count <= 0:
            return 1.0
        k = self._n_full_classes(count)
        rem = self._starts[k + 1] - count
        partial = 2.0 ** (_log2_int(rem) + float(self.log2_eig[k]))
        return min(1.0, max(0.0, partial + self._suffix_mass[k + 1]))

    def log2_suffix_mass(self, k: int) -> float:
        return float(self._log2_suffix_mass[k])

    def log2_sqrt_prefix(self, k: int) -> float:
        return float(self._log2_sqrt_prefix[k])


def _bounded_heads(n: int, parts: int) -> Iterator[tuple[int, ...]]:
    """Tuples of ``parts`` non-negative ints with sum <= n, lexicographic."""
    if parts == 0:
        yield ()
        return
    for first in range(n + 1):
        for rest in _bounded_heads(n - first, parts - 1):
            yield (first,) + rest


def _group_levels(p: SchmidtVector) -> tuple[list[float], list[int]]:
    """Collapse equal Schmidt coefficients into (value, group size) pairs."""
    values: list[float] = []
    sizes: list[int] = []
    for x in p.probs:
        if values and abs(values[-1] - x) <= 1e-15 * values[-1]:
            sizes[-1] += 1
        else:
            values.append(x)
            sizes.append(1)
    return values, sizes


def build_spectrum(p: SchmidtVector, n: int, budget: int | None = None) -> TypeClassSpectrum:
    """Enumerate the type classes of ``p^{(x)n}``.

    Coefficients with equal value are grouped first, so a class is a
    composition of ``n`` over the distinct levels; its multiplicity is the
    multinomial coefficient times ``size_g ** count_g`` for each level.
    Multinomials are produced with an exact integer recurrence along the
    last coordinate.  Classes whose log eigenvalues differ by less than
    ``1e-12`` are merged.

    Raises
    ------
    ClassBudgetError
        If the composition count exceeds ``budget`` (default from
        ``ENTCON_CLASS_BUDGET`` or 5e6).
    """
    if n < 1:
        raise ValueError(f"copies must be >= 1, got {n}")
    budget = class_budget() if budget is None else budget
    values, sizes = _group_levels(p)
    g = len(values)
    n_comp = math.comb(n + g - 1, g - 1)
    if n_comp > budget:
        raise ClassBudgetError(n_comp, budget)

    logs = [math.log2(v) for v in values]
    counts: list[tuple[int, ...]] = []
    mults: list[int] = []
    if g == 1:
        counts.append((n,))
        mults.append(sizes[0] ** n)
    else:
        s_prev, s_last = sizes[-2], sizes[-1]
        for head in _bounded_heads(n, g - 2):
            r = n
            factor = 1
            for gi, k in enumerate(head):
                factor *= math.comb(r, k) * sizes[gi] ** k
                r -= k
            # last two coordinates (j, r - j); C(r, j) by exact recurrence
            binom = 1
            for j in range(r + 1):
                m = factor * binom
                if s_prev != 1 or s_last != 1:
                    m *= s_prev**j * s_last ** (r - j)
                counts.append(head + (j, r - j))
                mults.append(m)
                binom = binom * (r - j) // (j + 1)
    lam = np.asarray(counts, dtype=float) @ np.asarray(logs)
    order = np.argsort(-lam, kind="stable")
    log2_eig: list[float] = []
    merged: list[int] = []
    for idx in order:
        value = float(lam[idx])
        if log2_eig and abs(log2_eig[-1] - value) < MERGE_TOL:
            merged[-1] += mults[idx]
        else:
            log2_eig.append(value)
            merged.append(mults[idx])
    return TypeClassSpectrum(
        base=p,
        copies=n,
        log2_eig=np.asarray(log2_eig, dtype=float),
        mult=tuple(merged),
        total_dim=p.rank**n,
    )


def tail_probability_geq(spec: TypeClassSpectrum, log2_threshold: float) -> float:
    """``Tr rho_n {rho_n >= 2**log2_threshold}`` (inclusive)."""
    k = spec._n_classes_geq(log2_threshold)
    return min(1.0, max(0.0, spec._prefix_mass[k]))


def k_statistic(spec: TypeClassSpectrum, a: float, b: float) -> float:
    """``Tr rho_n {-log2 rho_n <= a n + b sqrt(n)}``."""
    n = spec.copies
    return tail_probability_geq(spec, -(a * n + b * math.sqrt(n)))


def top_count_sum(spec: TypeClassSpectrum, count: int) -> float:
    """Sum of the ``count`` largest eigenvalues; exactly 1 once ``count >= M**n``."""
    if count >= spec.total_dim:
        return 1.0
    if count <= 0:
        return 0.0
    k = spec._n_full_classes(count)
    rem = count - spec._starts[k]
    partial = 0.0
    if rem:
        partial = 2.0 ** (_log2_int(rem) + float(spec.log2_eig[k]))
    return min(1.0, max(0.0, spec._prefix_mass[k] + partial))


@dataclass(frozen=True)
class SqrtSum:
    """A possibly astronomical non-negative sum, kept with its base-2 log."""

    value: float
    log2: float


def top_count_sqrt_sum(spec: TypeClassSpectrum, count: int) -> SqrtSum:
    """Sum of square roots of the ``count`` largest eigenvalues.

    ``value`` saturates to ``inf`` when the log exceeds 1000; ``log2`` is
    always finite for ``count >= 1``.
    """
    if count <= 0:
        return SqrtSum(0.0, -math.inf)
    count = min(count, spec.total_dim)
    k = spec._n_full_classes(count)
    log2_total = float(spec._log2_sqrt_prefix[k])
    rem = count - spec._starts[k]
    if rem:
        log2_part = _log2_int(rem) + 0.5 * float(spec.log2_eig[k])
        log2_total = float(np.logaddexp2(log2_total, log2_part))
    if log2_total > SATURATION_LOG2:
        return SqrtSum(math.inf, log2_total)
    return SqrtSum(2.0**log2_total, log2_total)


def h_statistic(spec: TypeClassSpectrum, x: float) -> float:
    """``Tr (rho_n - x){rho_n - x >= 0}`` for ``0 < x <= 1``."""
    if not 0.0 < x <= 1.0:
        raise ValueError(f"h statistic needs 0 < x <= 1, got {x!r}")
    log2_x = math.log2(x)
    k = spec._n_classes_geq(log2_x)
    if k == 0:
        return 0.0
    gap = (log2_x - spec.log2_eig[:k]) * math.log(2.0)
    terms = spec._mass[:k] * -np.expm1(gap)
    return max(0.0, math.fsum(terms.tolist()))
