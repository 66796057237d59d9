"""Spectral densities (one-point functions), kernels and radial distribution functions.

Every density is normalised so that its integral over the complex plane is N.
Internally the densities are evaluated as logarithms; ``log_density`` returns
``-inf`` where the density vanishes.
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy import integrate, interpolate, special

from ..errors import DomainError, ParameterError
from ..specfun import log_gamma_ratio
from ..transforms import ContourConfig, MeijerSpec, log_meijer_g
from .params import EnsembleKind, EnsembleParams

LOG_PI = math.log(math.pi)
_CDF_GRID = 400

__all__ = [
    "density",
    "log_density",
    "density_fte_alt",
    "alt_series_coefficients",
    "fte_log_density",
    "induced_log_density",
    "product_log_density",
    "mixed_product_log_density",
    "mixed_m2_kummer_density",
    "ginibre_kernel",
    "product_kernel",
    "radial_cdf",
    "level_factor_laws",
    "limiting_density",
]


def _abs2(z) -> np.ndarray:
    z = np.asarray(z)
    return (z.real**2 + z.imag**2) if np.iscomplexobj(z) else z.astype(float) ** 2


def _finish(logv: np.ndarray, like):
    out = np.exp(logv)
    return float(np.reshape(out, -1)[0]) if np.ndim(like) == 0 else out


# ---------------------------------------------------------------- fixed trace


@lru_cache(maxsize=256)
def _fte_coeffs(N: int, nu: float, E: float) -> np.ndarray:
    """ln[Gamma(E) / (pi Gamma(l+1+nu) Gamma(E-l-nu-1))] for l = 0..N-1."""
    ls = np.arange(N)
    ratio = np.array([log_gamma_ratio(E, E - l - nu - 1.0) for l in ls])
    return ratio - special.gammaln(ls + 1.0 + nu) - LOG_PI


def fte_log_density(r2, s: float, N: int, nu: float, E: float) -> np.ndarray:
    """ln R for the fixed-trace family with effective exponent E, at squared radii r2.

    ``E = N^2 + N nu`` gives the fixed-trace Ginibre ensemble and
    ``E = N(N+1)/2 + N nu`` its normal-matrix counterpart; the two densities
    share this single implementation.
    """
    u = np.atleast_1d(np.asarray(r2, dtype=float)) / s
    out = np.full(u.shape, -np.inf)
    inside = u < 1.0
    if np.any(inside):
        uu = u[inside][:, None]
        ls = np.arange(N)[None, :]
        logs = (_fte_coeffs(N, float(nu), float(E))[None, :]
                + special.xlogy(ls + nu, uu)
                + (E - ls - nu - 2.0) * np.log1p(-uu))
        out[inside] = special.logsumexp(logs, axis=1) - math.log(s)
    return out


def alt_series_coefficients(N: int, nu: int) -> list[int]:
    """Exact integer coefficients c_m, m = 0..N-1, of the power series in u = |z|^2/s.

    c_m = sum_{l<=m} C(E-2, l+nu) (-1)^{m-l} C(N-1-l, m-l) with E = N^2 + N nu.
    At nu = 0 this reduces to C(N^2-N-2+m, m).
    """
    E = N * N + N * nu
    return [
        sum(math.comb(E - 2, l + nu) * (-1) ** (m - l) * math.comb(N - 1 - l, m - l) for l in range(m + 1))
        for m in range(N)
    ]


def density_fte_alt(p: EnsembleParams, z) -> float | np.ndarray:
    """Fixed-trace Ginibre density as a single power series in u = |z|^2/s.

    R = (E-1)/(pi s) (1-u)^{E-N-nu-1} sum_m c_m u^{m+nu}, see
    :func:`alt_series_coefficients`.  Requires a non-negative integer nu; the
    alternating inner sums are done in exact integer arithmetic, so this is an
    evaluation path independent of the Gamma-function form.
    """
    p.validate_for(EnsembleKind.GINIBRE_FTE)
    nu = p.nu[0]
    if nu < 0 or not float(nu).is_integer():
        raise DomainError("the power-series form needs a non-negative integer nu")
    N, s, nu = p.N, p.s[0], int(nu)
    E = N * N + N * nu
    coeffs = alt_series_coefficients(N, nu)
    logc = np.array([math.log(abs(c)) if c else -np.inf for c in coeffs])
    sgn = np.array([np.sign(c) for c in coeffs], dtype=float)
    u = np.atleast_1d(_abs2(z)) / s
    out = np.zeros(u.shape)
    inside = u < 1.0
    if np.any(inside):
        uu = u[inside][:, None]
        ms = np.arange(N)[None, :]
        logs = logc[None, :] + special.xlogy(ms + nu, uu)
        val, vsgn = special.logsumexp(logs, b=np.broadcast_to(sgn, logs.shape), axis=1, return_sign=True)
        logpre = math.log(E - 1.0) - LOG_PI - math.log(s) + (E - N - nu - 1.0) * np.log1p(-u[inside])
        out[inside] = vsgn * np.exp(val + logpre)
    return float(out[0]) if np.ndim(z) == 0 else out


# ---------------------------------------------------------------- induced / products


def induced_log_density(r2, t: float, N: int, nu: float) -> np.ndarray:
    """ln R for the induced Ginibre ensemble."""
    x = t * np.atleast_1d(np.asarray(r2, dtype=float))
    ls = np.arange(N)[None, :]
    logs = (special.xlogy(ls + nu, x[:, None]) - x[:, None] + math.log(t)
            - special.gammaln(ls + 1.0 + nu) - LOG_PI)
    return special.logsumexp(logs, axis=1)


def _log_meijer_or_origin(a: Sequence[float], b: Sequence[float], x: float, cfg: ContourConfig | None,
                          method: str = "auto") -> float:
    """ln G^{q,0}_{p,q}(a; b | x), including the limit x -> 0."""
    if x > 0:
        g = log_meijer_g(MeijerSpec(tuple(a), tuple(b)), x, cfg, method)
        return g.log_magnitude if g.sign > 0 else -np.inf
    bmin = min(b)
    if bmin > 0:
        return -np.inf
    if bmin < 0 or list(b).count(bmin) > 1:
        return np.inf
    rest_b = [v - bmin for v in b]
    rest_b.remove(0.0)
    return float(special.gammaln(rest_b).sum() - special.gammaln(np.asarray(a) - bmin).sum())


def product_log_density(r2, p: EnsembleParams, cfg: ContourConfig | None = None, method: str = "auto") -> np.ndarray:
    """ln R for the product of M unconstrained induced Ginibre matrices (weight times kernel sum).

    ``method`` is passed to :func:`log_meijer_g`; ``"contour"`` bypasses the closed forms.
    """
    tau = p.tau
    nu = np.asarray(p.nu)
    r2 = np.atleast_1d(np.asarray(r2, dtype=float))
    ks = np.arange(p.N)
    lcoef = (ks + 1.0) * math.log(tau) - LOG_PI - special.gammaln(nu[None, :] + ks[:, None] + 1.0).sum(axis=1)
    out = np.empty(r2.shape)
    for i, v in enumerate(r2):
        x = tau * v
        lg = _log_meijer_or_origin((), nu, x, cfg, method)
        if not np.isfinite(lg):
            out[i] = lg
            continue
        poly = special.logsumexp(lcoef + special.xlogy(ks, v))
        out[i] = lg + poly
    return out


def mixed_product_log_density(r2, p: EnsembleParams, cfg: ContourConfig | None = None,
                              method: str = "auto") -> np.ndarray:
    """ln R for m fixed-trace times M-m induced Ginibre factors (any 0 <= m <= M).

    Uses the shifted Meijer form: one ``G^{M,0}_{m,M}`` per level k with top row
    ``N^2 + N nu_j - 1`` (constrained factors) and bottom row ``nu_j + k``.
    ``method`` is passed to :func:`log_meijer_g`.
    """
    N, M, m = p.N, p.M, p.m
    nu = np.asarray(p.nu)
    top = tuple(p.exponent(j) - 1.0 for j in range(m))
    lpre = math.log(p.tau) - math.log(p.s_prod) + sum(special.gammaln(p.exponent(j)) for j in range(m))
    ks = np.arange(N)
    lden = LOG_PI + special.gammaln(nu[None, :] + ks[:, None] + 1.0).sum(axis=1)
    r2 = np.atleast_1d(np.asarray(r2, dtype=float))
    out = np.empty(r2.shape)
    scale = p.tau / p.s_prod
    for i, v in enumerate(r2):
        x = scale * v
        logs = np.array([_log_meijer_or_origin(top, tuple(nu + k), x, cfg, method) for k in ks]) - lden
        out[i] = np.inf if np.any(logs == np.inf) else lpre + special.logsumexp(logs)
    return out


def mixed_m2_kummer_density(z, p: EnsembleParams) -> float | np.ndarray:
    """Density of one fixed-trace times one induced Ginibre factor via Kummer's U.

    Independent of the Meijer machinery: U is evaluated by quadrature of its
    integral representation.
    """
    from ..specfun import log_kummer_u

    if p.M != 2 or p.m != 1:
        raise ParameterError("the Kummer form applies to M = 2, m = 1 only")
    N = p.N
    nu1, nu2 = p.nu
    s1, t2 = p.s[0], p.t[0]
    E1 = p.exponent(0)
    r2 = np.atleast_1d(_abs2(z))
    out = np.empty(r2.shape)
    for i, v in enumerate(r2):
        x = t2 * v / s1
        if x == 0:
            out[i] = math.exp(mixed_product_log_density(0.0, p)[0])
            continue
        terms = [
            (k + nu2) * math.log(x)
            + log_kummer_u(N * (N + nu1) - nu1 - k - 1.0, 1.0 - nu1 + nu2, x)
            - special.gammaln(k + 1.0 + nu1) - special.gammaln(k + 1.0 + nu2)
            for k in range(N)
        ]
        out[i] = math.exp(math.log(t2 / s1) + special.gammaln(E1) - x - LOG_PI + special.logsumexp(terms))
    return float(out[0]) if np.ndim(z) == 0 else out


# ---------------------------------------------------------------- dispatch


def log_density(kind: EnsembleKind | str, p: EnsembleParams, z, cfg: ContourConfig | None = None):
    """Vectorised ln R^{(1)}(z) for any ensemble kind (``-inf`` where it vanishes).

    A scalar ``z`` gives a float; array input gives an array of the same shape.
    """
    kind = EnsembleKind.parse(kind)
    p.validate_for(kind)
    out = _log_density_r2(kind, p, np.atleast_1d(_abs2(z)), cfg)
    return float(np.reshape(out, -1)[0]) if np.ndim(z) == 0 else out


def _log_density_r2(kind: EnsembleKind, p: EnsembleParams, r2: np.ndarray, cfg) -> np.ndarray:
    if kind is EnsembleKind.GINIBRE_FTE:
        return fte_log_density(r2, p.s[0], p.N, p.nu[0], p.exponent(0))
    if kind is EnsembleKind.NORMAL_FTE:
        return fte_log_density(r2, p.s[0], p.N, p.nu[0], p.exponent(0, normal=True))
    if kind is EnsembleKind.INDUCED_GINIBRE:
        return induced_log_density(r2, p.t[0], p.N, p.nu[0])
    if kind is EnsembleKind.PRODUCT_GINIBRE:
        if p.M == 1:
            return induced_log_density(r2, p.t[0], p.N, p.nu[0])
        return product_log_density(r2, p, cfg)
    return mixed_product_log_density(r2, p, cfg)


def density(kind: EnsembleKind | str, p: EnsembleParams, z, cfg: ContourConfig | None = None):
    """Spectral density R^{(1)}(z), normalised to N over the plane."""
    return _finish(log_density(kind, p, z, cfg), z)


# ---------------------------------------------------------------- kernels


def ginibre_kernel(z: complex, u: complex, t: float, nu: float, N: int) -> complex:
    """Induced Ginibre kernel K(z, u*) including the weight factors."""
    z, u = complex(z), complex(u)
    az, au = abs(z), abs(u)
    ls = np.arange(N)
    lw = -0.5 * t * (az * az + au * au)
    if az == 0 or au == 0:
        # only the l = 0 term survives, and only when nu = 0
        if nu != 0:
            return 0j
        return complex(math.exp(lw + math.log(t) - LOG_PI - special.gammaln(1.0 + nu)))
    logs = (nu * math.log(az * au) + lw + special.xlogy(ls, az * au)
            + (ls + 1.0 + nu) * math.log(t) - LOG_PI - special.gammaln(ls + 1.0 + nu))
    phase = np.exp(1j * ls * (np.angle(z) - np.angle(u)))
    top = logs.max()
    return complex(np.exp(top) * np.sum(np.exp(logs - top) * phase))


def product_kernel(z: complex, u: complex, p: EnsembleParams, cfg: ContourConfig | None = None) -> complex:
    """Kernel of the product of unconstrained induced Ginibre matrices."""
    z, u = complex(z), complex(u)
    nu = np.asarray(p.nu)
    tau = p.tau
    lgz = _log_meijer_or_origin((), nu, tau * abs(z) ** 2, cfg)
    lgu = _log_meijer_or_origin((), nu, tau * abs(u) ** 2, cfg)
    ks = np.arange(p.N)
    lcoef = (ks + 1.0) * math.log(tau) - LOG_PI - special.gammaln(nu[None, :] + ks[:, None] + 1.0).sum(axis=1)
    w = z * u.conjugate()
    if w == 0:
        series = complex(math.exp(lcoef[0]))
        return complex(math.exp(0.5 * (lgz + lgu))) * series if np.isfinite(lgz + lgu) else 0j
    logs = lcoef + ks * math.log(abs(w))
    top = logs.max()
    series = np.sum(np.exp(logs - top) * np.exp(1j * ks * np.angle(w)))
    return complex(np.exp(0.5 * (lgz + lgu) + top) * series)


# ---------------------------------------------------------------- radial laws


def level_factor_laws(p: EnsembleParams, k: int) -> list[tuple[str, float, float, float]]:
    """Independent factors whose product has the law of |z|^2 at level k.

    Returns tuples ``(family, shape_a, shape_b, scale)``: ``("beta", a, b, s_j)``
    for constrained factors and ``("gamma", a, 0, 1/t_j)`` for unconstrained ones.
    The radial density of a uniformly chosen eigenvalue is the equal-weight
    mixture of these laws over k = 0..N-1.
    """
    laws = []
    for j in range(p.M):
        a = p.nu[j] + k + 1.0
        if j < p.m:
            laws.append(("beta", a, p.exponent(j) - a, p.s[j]))
        else:
            laws.append(("gamma", a, 0.0, 1.0 / p.t[j - p.m]))
    return laws


def _law_cdf(law, v):
    fam, a, b, scale = law
    if fam == "beta":
        return special.betainc(a, b, np.clip(np.asarray(v) / scale, 0.0, 1.0))
    return special.gammainc(a, np.maximum(np.asarray(v), 0.0) / scale)


def _law_pdf(law, v):
    fam, a, b, scale = law
    y = v / scale
    if fam == "beta":
        if not 0 < y < 1:
            return 0.0
        return math.exp(special.xlogy(a - 1, y) + special.xlog1py(b - 1, -y) - special.betaln(a, b)) / scale
    if y <= 0:
        return 0.0
    return math.exp(special.xlogy(a - 1, y) - y - special.gammaln(a)) / scale


def _law_support(law) -> tuple[float, float]:
    fam, a, b, scale = law
    if fam == "beta":
        return 0.0, scale
    hi = scale * (a + 40.0 * math.sqrt(a) + 40.0)
    return 0.0, hi


def radial_cdf(kind: EnsembleKind | str, p: EnsembleParams, r) -> np.ndarray:
    """P(|z| <= r) for an eigenvalue chosen uniformly among the N.

    Exact (Beta / Gamma mixtures) for single-factor ensembles; a one-dimensional
    quadrature over one factor for two-factor products; cumulative quadrature of
    the analytic density otherwise.
    """
    kind = EnsembleKind.parse(kind)
    p.validate_for(kind)
    v = np.atleast_1d(np.asarray(r, dtype=float)) ** 2
    N = p.N
    if kind.is_fixed_trace:
        E = p.exponent(0, normal=kind is EnsembleKind.NORMAL_FTE)
        nu, s = p.nu[0], p.s[0]
        ls = np.arange(N)[None, :]
        u = np.clip(v / s, 0.0, 1.0)[:, None]
        return special.betainc(ls + nu + 1.0, E - ls - nu - 1.0, u).mean(axis=1)
    if p.M == 1:
        ls = np.arange(N)[None, :]
        return special.gammainc(ls + p.nu[0] + 1.0, p.t[0] * v[:, None]).mean(axis=1)
    if v.size > _CDF_GRID:
        # evaluate on data quantiles and interpolate monotonically
        grid = np.unique(np.concatenate([[0.0], np.quantile(v, np.linspace(0.0, 1.0, _CDF_GRID))]))
        vals = radial_cdf(kind, p, np.sqrt(grid))
        return interpolate.PchipInterpolator(grid, vals)(v)
    if p.M == 2:
        out = np.zeros(v.shape)
        for k in range(N):
            l1, l2 = level_factor_laws(p, k)
            lo, hi = _law_support(l1)
            mode = (l1[1] - 1.0) / max(l1[1] + l1[2] - 2.0, 1.0) * l1[3] if l1[0] == "beta" else (l1[1] - 1) * l1[3]
            pts = [pt for pt in (mode,) if lo < pt < hi]
            for i, vi in enumerate(v):
                if vi <= 0:
                    continue
                val, _ = integrate.quad(
                    lambda y: _law_pdf(l1, y) * float(_law_cdf(l2, vi / y)) if y > 0 else 0.0,
                    lo, hi, points=pts or None, limit=400, epsabs=1e-12, epsrel=1e-10,
                )
                out[i] += val
        return out / N
    # generic: cumulative integral of pi R d(r^2) in the log variable
    grid = np.exp(np.linspace(math.log(max(v.min(), 1e-300) * 1e-6 + 1e-12), math.log(v.max() + 1e-300), 4000))
    dens = np.exp(log_density(kind, p, np.sqrt(grid)))
    cum = integrate.cumulative_trapezoid(math.pi * dens * grid, np.log(grid), initial=0.0)
    return np.interp(v, grid, cum) / N


# ---------------------------------------------------------------- limits


def limiting_density(kind: str, M: int, z) -> float | np.ndarray:
    """Large-N global density, normalised to one: circular law or its M-fold product analogue."""
    r = np.sqrt(np.atleast_1d(_abs2(z)))
    kind = str(kind).lower()
    if kind == "circular":
        out = np.where(r <= 1.0, 1.0 / math.pi, 0.0)
    elif kind in ("productm", "product"):
        if M < 1:
            raise ParameterError("M must be at least 1")
        if M >= 2 and np.any(r == 0):
            raise DomainError("the product limiting density is singular at the origin")
        with np.errstate(divide="ignore"):
            out = np.where(r <= 1.0, r ** (2.0 / M - 2.0) / (M * math.pi), 0.0)
    else:
        raise ParameterError(f"unknown limiting density {kind!r}")
    return float(out[0]) if np.ndim(z) == 0 else out
