"""Monte-Carlo experiments, statistics and the verification battery."""

from .experiments import (
    RunConfig,
    build_id,
    length_scale,
    run_density_experiment,
    run_gap_experiment,
    run_stability_experiment,
    sample_eigenvalues,
    stability_sample,
)
from .stats import RadialHistogram, binomial_stderr, ks_critical, ks_distance
from .verify import SUITES, run_verify

__all__ = [
    "RadialHistogram",
    "RunConfig",
    "SUITES",
    "binomial_stderr",
    "build_id",
    "ks_critical",
    "ks_distance",
    "length_scale",
    "run_density_experiment",
    "run_gap_experiment",
    "run_stability_experiment",
    "run_verify",
    "sample_eigenvalues",
    "stability_sample",
]
