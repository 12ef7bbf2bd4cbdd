"""The bimodal beta distribution on [0, 1].

Density ``[rho + (1 - delta x)^2] x^(a-1) (1-x)^(b-1) / (Z B(a, b))``.
With ``delta = 0`` it is the ordinary Beta(a, b) law.
"""

from .entropy import TsallisBound, quadratic_entropy, shannon_entropy, tsallis_bound
from .functions import cdf, cdf_arrays, hazard, logpdf, pdf, quantile, sf
from .modes import (
    BimodalityConditions,
    ModeAnalysis,
    ModeClass,
    check_bimodality_conditions,
    critical_polynomial,
    mode_analysis,
)
from .moments import (
    DomainFallbackWarning,
    SummaryStats,
    integer_moment,
    log_moment,
    mean_residual_life,
    mgf_numeric,
    raw_moment,
    summary_stats,
    truncated_moment,
)
from .params import (
    BBetaParams,
    DegenerateParameterError,
    MixtureWeights,
    mixture_weights,
    normalizer,
)
from .sampling import draw, make_rng, sample, spawn_seeds

__all__ = [
    "BBetaParams",
    "BimodalityConditions",
    "DegenerateParameterError",
    "DomainFallbackWarning",
    "MixtureWeights",
    "ModeAnalysis",
    "ModeClass",
    "SummaryStats",
    "TsallisBound",
    "cdf",
    "cdf_arrays",
    "check_bimodality_conditions",
    "critical_polynomial",
    "draw",
    "hazard",
    "integer_moment",
    "log_moment",
    "logpdf",
    "make_rng",
    "mean_residual_life",
    "mgf_numeric",
    "mixture_weights",
    "mode_analysis",
    "normalizer",
    "pdf",
    "quadratic_entropy",
    "quantile",
    "raw_moment",
    "sample",
    "sf",
    "shannon_entropy",
    "spawn_seeds",
    "summary_stats",
    "tsallis_bound",
    "truncated_moment",
]
