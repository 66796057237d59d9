"""Joint eigenvalue densities (Coulomb-gas form) and joint densities of the radii."""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np
from scipy import special

from ..errors import BudgetError, ParameterError
from ..specfun import LogReal, permanent
from .params import EnsembleKind, EnsembleParams
from .partition import log_coset_volume

LOG_PI = math.log(math.pi)
RADIAL_MAX_N = 6


def _log_prefactor(kind: EnsembleKind, p: EnsembleParams) -> float:
    """ln of the constant left over after integrating out U and the strictly upper part T."""
    N = p.N
    lv = log_coset_volume(N)
    half = N * (N - 1) / 2.0
    if kind is EnsembleKind.INDUCED_GINIBRE:
        return lv + half * (LOG_PI - math.log(p.t[0]))
    if kind is EnsembleKind.GINIBRE_FTE:
        return lv + half * LOG_PI - special.gammaln(half)
    return lv


def _check_kind(kind) -> EnsembleKind:
    kind = EnsembleKind.parse(kind)
    if kind not in (EnsembleKind.GINIBRE_FTE, EnsembleKind.NORMAL_FTE, EnsembleKind.INDUCED_GINIBRE):
        raise ParameterError(f"joint densities are available for single-matrix ensembles, not {kind.value}")
    return kind


def joint_log_density(
    kind: EnsembleKind | str, p: EnsembleParams, zs: Sequence[complex], include_constants: bool = False
) -> LogReal:
    """Unnormalised joint density of all N eigenvalues as a LogReal.

    The log value is 2 nu sum ln|z_i| + sum_{i != j} ln|z_i - z_j| plus
    ``(N(N-1)/2 - 1) ln(s - sum |z|^2)`` for GinibreFTE or ``-t sum |z|^2`` for
    InducedGinibre.  NormalFTE carries a delta function on the sphere
    sum |z|^2 = s which has no pointwise value; it is dropped and the remaining
    factor is returned for points on that sphere.  With ``include_constants``
    the U and T integration constants are added, so that integrating over C^N
    gives the partition function.
    """
    kind = _check_kind(kind)
    p.validate_for(kind)
    z = np.asarray(zs, dtype=complex).ravel()
    if z.size != p.N:
        raise ParameterError(f"need {p.N} eigenvalues, got {z.size}")
    r2 = np.abs(z) ** 2
    nu = p.nu[0]
    if kind is EnsembleKind.GINIBRE_FTE and r2.sum() >= p.s[0]:
        return LogReal.zero()
    if nu > 0 and np.any(r2 == 0):
        return LogReal.zero()
    diff = np.abs(z[:, None] - z[None, :])[np.triu_indices(z.size, 1)]
    if np.any(diff == 0):
        return LogReal.zero()
    val = 2.0 * float(np.log(diff).sum())
    if nu != 0:
        val += nu * float(np.log(r2).sum())
    if kind is EnsembleKind.GINIBRE_FTE:
        expo = p.N * (p.N - 1) / 2.0 - 1.0
        if expo != 0:
            val += expo * math.log(p.s[0] - r2.sum())
    elif kind is EnsembleKind.INDUCED_GINIBRE:
        val -= p.t[0] * float(r2.sum())
    if include_constants:
        val += _log_prefactor(kind, p)
    return LogReal(float(val), 1)


def radial_joint_density(kind: EnsembleKind | str, p: EnsembleParams, radii: Sequence[float]) -> float:
    """Joint density of the moduli r_1..r_N after integrating out all angles.

    The density is with respect to dr_1 ... dr_N, so it includes the Jacobian
    prod r_k of d^2 z = r dr dphi next to the permanent of r_k^{2(l + nu - 1)}.
    Constants are those of ``joint_log_density(..., include_constants=True)``;
    NormalFTE again drops its delta factor and is meant for radii on the sphere.
    """
    kind = _check_kind(kind)
    p.validate_for(kind)
    r = np.asarray(radii, dtype=float).ravel()
    N = p.N
    if r.size != N:
        raise ParameterError(f"need {N} radii, got {r.size}")
    if N > RADIAL_MAX_N:
        raise BudgetError(f"radial joint density limited to N <= {RADIAL_MAX_N}")
    if np.any(r < 0):
        raise ParameterError("radii must be non-negative")
    nu = p.nu[0]
    r2 = r * r
    if kind is EnsembleKind.GINIBRE_FTE and r2.sum() >= p.s[0]:
        return 0.0
    if nu > 0 and np.any(r == 0):
        return 0.0
    # rows k, columns l = 1..N; 0^0 = 1
    powers = 2.0 * (np.arange(1, N + 1) + nu - 1.0)
    with np.errstate(divide="ignore"):
        mat = np.where(powers[None, :] == 0, 1.0, r[:, None] ** powers[None, :])
    per = float(permanent(mat))
    logc = _log_prefactor(kind, p) + N * math.log(2.0 * math.pi)
    if kind is EnsembleKind.GINIBRE_FTE:
        expo = N * (N - 1) / 2.0 - 1.0
        if expo != 0:
            logc += expo * math.log(p.s[0] - r2.sum())
    elif kind is EnsembleKind.INDUCED_GINIBRE:
        logc -= p.t[0] * float(r2.sum())
    return math.exp(logc) * per * float(np.prod(r))
