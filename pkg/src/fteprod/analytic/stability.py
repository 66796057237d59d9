"""Stability exponents mu = ln|z| / M of products of M matrices."""

from __future__ import annotations

import math

import numpy as np
from scipy import special

from ..errors import ParameterError
from ..transforms import ContourConfig
from .density import log_density
from .params import EnsembleKind, EnsembleParams


def stability_peaks(N: int) -> list[float]:
    """Large-M locations psi(k+1)/2, k = 0..N-1, ascending."""
    if int(N) != N or N < 1:
        raise ParameterError(f"N must be a positive integer, got {N}")
    return [float(v) for v in 0.5 * special.digamma(np.arange(1, N + 1, dtype=float))]


def _kind_for(p: EnsembleParams) -> EnsembleKind:
    if p.m == 0:
        return EnsembleKind.PRODUCT_GINIBRE
    if p.M == 1:
        return EnsembleKind.GINIBRE_FTE
    return EnsembleKind.MIXED_PRODUCT


def stability_density_finite_M(
    p: EnsembleParams, mu, normalized: bool = False, cfg: ContourConfig | None = None
):
    """Density of mu where |z| = exp(M mu), angle integrated.

    rho(mu) = 2 pi M e^{2 M mu} R(e^{M mu}), which integrates to N; with
    ``normalized`` it is divided by N and integrates to one.
    """
    if any(v != 0 for v in p.nu):
        raise ParameterError("stability densities are defined for nu_j = 0")
    if any(v != 1 for v in p.s + p.t):
        raise ParameterError("stability densities assume all s_j = t_j = 1")
    kind = _kind_for(p)
    p.validate_for(kind)
    mu_arr = np.asarray(mu, dtype=float)
    M = p.M
    z = np.exp(M * mu_arr)
    ld = np.asarray(log_density(kind, p, z, cfg), dtype=float)
    out = np.exp(math.log(2.0 * math.pi * M) + 2.0 * M * mu_arr + ld)
    if normalized:
        out = out / p.N
    return float(out) if mu_arr.ndim == 0 else out
