"""Convergence rate and asymptotic variance of random-scan Gibbs samplers
as functions of the coordinate selection probabilities."""

__version__ = "0.1.0"

from .diagnostics import batch_means_avar, empirical_autocov, tv_distance_exact
from .discrete import (
    DiscreteJointModel,
    ScanTransitionMatrix,
    assemble_scan_matrix,
    autocov_series_avar,
    build_binomial_model,
    build_custom_model,
    discrete_scan_rate,
    function_on_states,
    peskun_avar,
)
from .gaussian import (
    BivariateGaussianSpec,
    GaussianTarget,
    bivariate_avar_sum,
    bivariate_rate_closed_form,
    equal_alpha,
    exchangeable_sigma,
    gaussian_scan_rate,
)
from .optimize import OptimizationResult, optimize_1d, optimize_simplex, relative_gain
from .sampler import RngStream, run_chain, tune_pilot, two_phase_run
