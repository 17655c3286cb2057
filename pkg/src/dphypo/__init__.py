"""Adaptive differentially private hyperparameter optimization.

Subpackages cover the truncated negative binomial stopping-time
distribution, Renyi/pure DP accounting for adaptive hyperparameter
search, bounded-density projection, a Gaussian-process proposal
strategy, synthetic score landscapes, an exact-distribution privacy
audit, and benchmarking utilities.
"""

from .accountant import (
    AdaptivityBounds,
    RdpCurve,
    RdpPoint,
    hypo_curve,
    hypo_pure_dp,
    hypo_rdp,
    hypo_rdp_best,
    rdp_to_dp,
    solve_base_budget,
    total_cost,
)
from .core import (
    GpStrategy,
    Transcript,
    Trial,
    UniformStrategy,
    derive_rng,
    run_fixed_t,
    run_hypo,
)
from .landscape import DimSpec, GridSpec, Landscape, synth_landscape
from .negbin import NegBinParams
from .projection import (
    DiscreteDensity,
    InfeasibleBoundsError,
    Prior,
    project_kl_penalized,
    project_l2,
    uniform_density,
)
from .surrogate import GpConfig, ObservationSet, posterior, scores, softmax_density

__version__ = "0.1.0"

__all__ = [
    "AdaptivityBounds",
    "DimSpec",
    "DiscreteDensity",
    "GpConfig",
    "GpStrategy",
    "GridSpec",
    "InfeasibleBoundsError",
    "Landscape",
    "NegBinParams",
    "ObservationSet",
    "Prior",
    "RdpCurve",
    "RdpPoint",
    "Transcript",
    "Trial",
    "UniformStrategy",
    "derive_rng",
    "hypo_curve",
    "hypo_pure_dp",
    "hypo_rdp",
    "hypo_rdp_best",
    "posterior",
    "project_kl_penalized",
    "project_l2",
    "rdp_to_dp",
    "run_fixed_t",
    "run_hypo",
    "scores",
    "softmax_density",
    "solve_base_budget",
    "synth_landscape",
    "total_cost",
    "uniform_density",
]
