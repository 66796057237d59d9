"""Log partition functions of the single and product ensembles."""

from __future__ import annotations

import math

import numpy as np
from scipy import special

from .params import EnsembleKind, EnsembleParams

LOG_PI = math.log(math.pi)


def log_coset_volume(N: int) -> float:
    """ln V_N with V_N = pi^{N(N-1)/2} / prod_{j=0}^{N} j!."""
    j = np.arange(N + 1)
    return N * (N - 1) / 2.0 * LOG_PI - special.gammaln(j + 1.0).sum()


def log_sphere_surface(n: int) -> float:
    """ln of the surface 2 pi^{n/2} / Gamma(n/2) of the unit sphere in n real dimensions."""
    return math.log(2.0) + 0.5 * n * LOG_PI - special.gammaln(0.5 * n)


def _log_norm_gammas(N: int, nu: float) -> float:
    """ln prod_{j=0}^{N-1} Gamma(j + 1 + nu)."""
    return float(special.gammaln(np.arange(N) + 1.0 + nu).sum())


def log_partition_normal(N: int, nu: float, t: float) -> float:
    """ln of the unconstrained induced Gaussian normal partition function."""
    E = N * (N + 1) / 2.0 + N * nu
    return (log_coset_volume(N) + N * LOG_PI - E * math.log(t)
            + special.gammaln(N + 1.0) + _log_norm_gammas(N, nu))


def log_partition(kind: EnsembleKind | str, p: EnsembleParams) -> float:
    """Natural log of the partition function of the given ensemble."""
    kind = EnsembleKind.parse(kind)
    p.validate_for(kind)
    N = p.N
    lv = log_coset_volume(N)
    lfact = special.gammaln(N + 1.0)
    if kind is EnsembleKind.INDUCED_GINIBRE:
        nu, t = p.nu[0], p.t[0]
        E = p.exponent(0)
        return lv + N * (N + 1) / 2.0 * LOG_PI - E * math.log(t) + lfact + _log_norm_gammas(N, nu)
    if kind is EnsembleKind.GINIBRE_FTE:
        nu, s = p.nu[0], p.s[0]
        E = p.exponent(0)
        return (lv + N * (N + 1) / 2.0 * LOG_PI + lfact + _log_norm_gammas(N, nu)
                + (E - 1.0) * math.log(s) - special.gammaln(E))
    if kind is EnsembleKind.NORMAL_FTE:
        nu, s = p.nu[0], p.s[0]
        E = p.exponent(0, normal=True)
        return (lv + N * LOG_PI + lfact + _log_norm_gammas(N, nu)
                + (E - 1.0) * math.log(s) - special.gammaln(E))
    # product ensembles: the first m factors are constrained
    total = p.M * (lv + lfact) + p.M * N * (N + 1) / 2.0 * LOG_PI
    total += sum(_log_norm_gammas(N, nu) for nu in p.nu)
    for j in range(p.M):
        E = p.exponent(j)
        if j < p.m:
            total += (E - 1.0) * math.log(p.s[j]) - special.gammaln(E)
        else:
            total -= E * math.log(p.t[j - p.m])
    return float(total)
