"""Exact finite-n and asymptotic analysis of entanglement concentration and recovery
for pure bipartite states."""

__version__ = "0.1.0"

from .schmidt import (
    AsymptoticProfile,
    SchmidtVector,
    StateError,
    entropy,
    gaussian_cdf,
    gaussian_quantile,
    schmidt_overlap_fidelity,
    validate_schmidt,
    varentropy,
)
from .spectrum import (
    ClassBudgetError,
    TypeClassSpectrum,
    build_spectrum,
    h_statistic,
    k_statistic,
    tail_probability_geq,
    top_count_sqrt_sum,
    top_count_sum,
)
from .fidelity import (
    MCREResult,
    concentration_error,
    dilution_error,
    j_index,
    mcre,
    min_loss_for_epsilon,
)
from .asymptotics import (
    RateParams,
    concentration_limit,
    dilution_limit,
    mcre_limit_predictor,
    recovery_rate,
)
