"""Closed-form finite-N quantities: partition functions, densities, correlators, gaps."""

from .density import (
    alt_series_coefficients,
    density,
    density_fte_alt,
    ginibre_kernel,
    level_factor_laws,
    limiting_density,
    log_density,
    mixed_m2_kummer_density,
    product_kernel,
    radial_cdf,
)
from .gap import gap_fte, gap_fte_integer_nu, gap_ginibre
from .joint import joint_log_density, radial_joint_density
from .kpoint import kpoint
from .params import CorrelatorQuery, EnsembleKind, EnsembleParams
from .partition import log_coset_volume, log_partition, log_sphere_surface
from .stability import stability_density_finite_M, stability_peaks

__all__ = [
    "CorrelatorQuery",
    "EnsembleKind",
    "EnsembleParams",
    "alt_series_coefficients",
    "density",
    "density_fte_alt",
    "gap_fte",
    "gap_fte_integer_nu",
    "gap_ginibre",
    "ginibre_kernel",
    "joint_log_density",
    "kpoint",
    "level_factor_laws",
    "limiting_density",
    "log_coset_volume",
    "log_density",
    "log_partition",
    "log_sphere_surface",
    "mixed_m2_kummer_density",
    "product_kernel",
    "radial_cdf",
    "radial_joint_density",
    "stability_density_finite_M",
    "stability_peaks",
]
