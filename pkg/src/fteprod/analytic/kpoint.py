"""k-point correlation functions.

Unconstrained ensembles are determinantal (k x k determinant of the kernel).
For the fixed-trace ensembles the permutation sum is enumerated explicitly over
all index tuples (l_1, ..., l_k); the reciprocal Gamma function that couples the
l_j is what destroys the determinantal structure.
"""

from __future__ import annotations

import math
from itertools import permutations

import numpy as np
from scipy import special

from ..errors import BudgetError, ParameterError
from ..specfun import log_abs_rgamma
from ..transforms import ContourConfig
from .density import density, ginibre_kernel, product_kernel
from .params import CorrelatorQuery, EnsembleKind, EnsembleParams

LOG_PI = math.log(math.pi)
FTE_MAX_K = 4
FTE_MAX_N = 30


def _perm_sign(perm: tuple[int, ...]) -> int:
    sign, seen = 1, [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def fte_kpoint(points, s: float, N: int, nu: float, E: float) -> float:
    """k-point function of the fixed-trace family with effective exponent E.

    Every index tuple (l_1..l_k) and every permutation is summed explicitly; the
    magnitudes are handled in log space relative to the largest summand.
    """
    z = np.asarray(points, dtype=complex)
    k = z.size
    if k > FTE_MAX_K or N > FTE_MAX_N:
        raise BudgetError(f"fixed-trace k-point limited to k <= {FTE_MAX_K}, N <= {FTE_MAX_N}")
    r2 = np.abs(z) ** 2
    w = s - r2.sum()
    if w <= 0 or (nu > 0 and np.any(r2 == 0)):
        return 0.0
    logw = math.log(w)
    ls = np.arange(N)
    # 1 / (pi Gamma(l+1+nu) w^{l+1+nu}) per point
    lfac = -LOG_PI - special.gammaln(ls + 1.0 + nu) - (ls + 1.0 + nu) * logw
    grid = np.indices((N,) * k).reshape(k, -1)
    lrg, srg = log_abs_rgamma(E - grid.sum(axis=0) - k * (nu + 1.0))
    common = lfac[grid].sum(axis=0) + lrg
    nz = r2 > 0
    logz = np.log(np.where(nz, z, 1.0))
    pos_r2 = np.where(nz, r2, 1.0)
    base = (special.gammaln(E) + (1.0 - E) * math.log(s) + (E - 1.0) * logw
            + nu * np.log(pos_r2).sum())

    terms = []
    for perm in permutations(range(k)):
        ph = np.zeros(grid.shape[1], dtype=complex)
        keep = srg != 0
        for j in range(k):
            ph += grid[j] * (logz[j] + np.conj(logz[perm[j]]))
            # (z_j conj z_perm(j))^{l_j} vanishes for l_j > 0 if either point is 0
            if not (nz[j] and nz[perm[j]]):
                keep = keep & (grid[j] == 0)
        terms.append((_perm_sign(perm), common + ph.real, ph.imag, keep))
    live = [t for t in terms if t[3].any()]
    if not live:
        return 0.0
    top = max(float(t[1][t[3]].max()) for t in live)
    acc = 0.0 + 0.0j
    for sgn, lmag, phase, keep in live:
        acc += sgn * np.sum(srg[keep] * np.exp(lmag[keep] - top + 1j * phase[keep]))
    return float(acc.real * math.exp(top + base))


def kpoint(kind: EnsembleKind | str, p: EnsembleParams, q: CorrelatorQuery | list,
           cfg: ContourConfig | None = None) -> float:
    """k-point correlation function R^{(k)}(z_1, ..., z_k)."""
    kind = EnsembleKind.parse(kind)
    p.validate_for(kind)
    if not isinstance(q, CorrelatorQuery):
        q = CorrelatorQuery(tuple(q))
    q.validate_for(kind, p)
    pts = q.points
    if q.k == 1:
        return float(density(kind, p, pts[0], cfg))
    if kind is EnsembleKind.MIXED_PRODUCT:
        raise ParameterError("no closed form for k >= 2 correlations of mixed products")
    if kind.is_fixed_trace:
        E = p.exponent(0, normal=kind is EnsembleKind.NORMAL_FTE)
        return fte_kpoint(pts, p.s[0], p.N, p.nu[0], E)
    k = q.k
    mat = np.empty((k, k), dtype=complex)
    for i in range(k):
        for j in range(k):
            if kind is EnsembleKind.INDUCED_GINIBRE or p.M == 1:
                mat[i, j] = ginibre_kernel(pts[i], pts[j], p.t[0], p.nu[0], p.N)
            else:
                mat[i, j] = product_kernel(pts[i], pts[j], p, cfg)
    return float(np.linalg.det(mat).real)
