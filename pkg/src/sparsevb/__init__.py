"""Spike-and-slab variational Bayes for sparse high-dimensional linear regression."""

from ._backend import BACKEND
from .bench import MetricsReport, ScenarioSpec, run_scenario
from .cavi import FitConfig, FitSummary, cavi_fit, negative_elbo, update_order
from .core import (
    GaussianSlab,
    LaplaceSlab,
    PriorConfig,
    RegressionData,
    VariationalState,
    posterior_mean,
    precompute,
    ridge_init,
)
from .diagnostics import compatibility_report, mutual_coherence, sparse_singular_value
from .noise import NoiseEstimate, estimate_noise_sd, rescale
from .scalar import BracketSpec, ScalarOptimError, minimize_scalar
from .variants import fit, gauss_batchwise_fit, gauss_componentwise_fit, qmf_fit

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BracketSpec",
    "FitConfig",
    "FitSummary",
    "GaussianSlab",
    "LaplaceSlab",
    "MetricsReport",
    "NoiseEstimate",
    "PriorConfig",
    "RegressionData",
    "ScalarOptimError",
    "ScenarioSpec",
    "VariationalState",
    "cavi_fit",
    "compatibility_report",
    "estimate_noise_sd",
    "fit",
    "gauss_batchwise_fit",
    "gauss_componentwise_fit",
    "minimize_scalar",
    "mutual_coherence",
    "negative_elbo",
    "posterior_mean",
    "precompute",
    "qmf_fit",
    "rescale",
    "ridge_init",
    "run_scenario",
    "sparse_singular_value",
    "update_order",
]
