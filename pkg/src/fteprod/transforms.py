"""Meijer G-function by Mellin-Barnes quadrature, and numerical Laplace transforms.

Only the shape ``G^{q,0}_{p,q}`` (no Gamma factors of the form Gamma(1 - a + u))
is supported.  It is evaluated as

    G(x) = (2 pi i)^{-1} int_L x^u prod_i Gamma(b_i - u) / prod_j Gamma(a_j - u) du

on a vertical line to the left of every pole of Gamma(b_i - u).  The line is put
through the real saddle of the integrand, which makes the integrand
non-oscillatory near its peak and avoids cancellation; the trapezoidal rule is
then spectrally accurate and is refined by step halving.  Everything is done in
log space because the parameters (of order N^2) make the Gamma factors
astronomically large.  For very large x the saddle moves far to the left and
the integrand is expanded about it in a polygamma series instead of differencing
two huge log-Gamma sums.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import integrate, optimize, special

from .errors import ConvergenceError, DomainError, ParameterError
from .specfun import LogReal, log_kummer_u

__all__ = [
    "MeijerSpec",
    "ContourConfig",
    "meijer_g",
    "log_meijer_g",
    "meijer_shift",
    "forward_laplace",
    "inverse_laplace_talbot",
    "log_inverse_laplace_talbot",
]


@dataclass(frozen=True)
class MeijerSpec:
    """Parameters of ``G^{m,n}_{p,q}(a_top; b_bottom | x)``; only m=q, n=0 is valid."""

    a_top: tuple[float, ...]
    b_bottom: tuple[float, ...]
    m_index: int | None = None
    n_index: int = 0

    def __post_init__(self):
        object.__setattr__(self, "a_top", tuple(float(v) for v in self.a_top))
        object.__setattr__(self, "b_bottom", tuple(float(v) for v in self.b_bottom))
        if self.m_index is None:
            object.__setattr__(self, "m_index", len(self.b_bottom))
        if not self.b_bottom:
            raise ParameterError("MeijerSpec needs a non-empty bottom row")
        if self.m_index != len(self.b_bottom) or self.n_index != 0:
            raise ParameterError(
                f"only G^(q,0)_(p,q) is supported, got m={self.m_index}, n={self.n_index}"
            )
        if len(self.a_top) > len(self.b_bottom):
            raise ParameterError("MeijerSpec requires p <= q")

    @property
    def p(self) -> int:
        return len(self.a_top)

    @property
    def q(self) -> int:
        return len(self.b_bottom)

    def shifted(self, k: float) -> "MeijerSpec":
        return MeijerSpec(tuple(a + k for a in self.a_top), tuple(b + k for b in self.b_bottom))


@dataclass(frozen=True)
class ContourConfig:
    """Contour and accuracy settings shared by the Meijer and Talbot integrators.

    For the Meijer line integral ``abscissa`` is Re u of the line, ``step`` the
    initial node spacing and ``truncation`` the half-length of the line; ``None``
    selects them automatically from the saddle point.  For Talbot inversion
    ``abscissa`` is the contour scale r and ``truncation`` the initial node count.
    """

    abscissa: float | None = None
    step: float | None = None
    truncation: float | None = None
    target_tol: float = 1e-9
    max_nodes: int = 1 << 20

    def __post_init__(self):
        if not 0 < self.target_tol <= 1e-4:
            raise ParameterError(f"target_tol must lie in (0, 1e-4], got {self.target_tol}")
        if self.step is not None and self.step <= 0:
            raise ParameterError("step must be positive")
        if self.truncation is not None and self.truncation <= 0:
            raise ParameterError("truncation must be positive")
        if self.step is not None and self.truncation is not None and self.step >= self.truncation:
            raise ParameterError("step must be smaller than truncation")


DEFAULT_MEIJER = ContourConfig(target_tol=1e-9)
DEFAULT_TALBOT = ContourConfig(target_tol=1e-8)


# ---------------------------------------------------------------- Meijer G


def _cancel_pairs(a: Sequence[float], b: Sequence[float]) -> tuple[list[float], list[float]]:
    """Remove equal (a_j, b_i) pairs; their Gamma factors cancel in the integrand."""
    a, b = list(a), list(b)
    for val in list(a):
        if val in b and len(b) > 1:
            a.remove(val)
            b.remove(val)
    return a, b


def _log_g_closed(a: list[float], b: list[float], x: float) -> LogReal | None:
    p, q = len(a), len(b)
    lx = math.log(x)
    if q == 1 and p == 0:
        return LogReal(b[0] * lx - x, 1)
    if q == 1 and p == 1:
        # x^b (1-x)^{a-b-1} / Gamma(a-b) on (0,1)
        d = a[0] - b[0]
        if x >= 1 or d <= 0:
            return None if d <= 0 else LogReal.zero()
        return LogReal(b[0] * lx + (d - 1.0) * math.log1p(-x) - special.gammaln(d), 1)
    if q == 2 and p == 0:
        nu = b[0] - b[1]
        y = 2.0 * math.sqrt(x)
        kve = special.kve(nu, y)
        if not kve > 0:
            return None
        return LogReal(math.log(2.0) + 0.5 * (b[0] + b[1]) * lx + math.log(kve) - y, 1)
    if q == 2 and p == 1:
        b1, b2 = b
        if a[0] - b1 <= 0:
            b1, b2 = b2, b1
        if a[0] - b1 <= 0:
            return None
        lu = log_kummer_u(a[0] - b1, 1.0 - b1 + b2, x)
        return LogReal(b2 * lx - x + lu, 1)
    return None


def _phi_real(c: float, a: np.ndarray, b: np.ndarray, lx: float) -> float:
    return c * lx + special.gammaln(b - c).sum() - special.gammaln(a - c).sum()


def _saddle(a: np.ndarray, b: np.ndarray, lx: float) -> float:
    """Real abscissa minimising the integrand along the real axis (capped below min(b) - 1/2)."""
    bmin = b.min()
    cap = bmin - 0.5

    def dphi(c):
        return lx - special.digamma(b - c).sum() + special.digamma(a - c).sum()

    if dphi(cap) <= 0:
        return cap
    lo, width = cap - 1.0, 1.0
    while dphi(lo) > 0:
        width *= 2.0
        lo = cap - width
        if width > 1e300:
            raise ConvergenceError("no saddle found for the Meijer contour")
    return optimize.brentq(dphi, lo, cap, xtol=1e-12, maxiter=400)


# saddles further than this from the nearest parameter use a Taylor expansion of the integrand
_FAR_SADDLE = 1e3


def _saddle_expansion(aa: np.ndarray, bb: np.ndarray, c: float, lx: float) -> Callable[[np.ndarray], np.ndarray]:
    """ln of the integrand at c + iy minus its value at c, as a power series in y.

    With every Gamma argument w far from zero, ln Gamma(w - iy) - ln Gamma(w) is
    the Taylor series with polygamma coefficients; summing the coefficients over
    parameters first avoids subtracting two huge logarithms.  The series is used
    for |y| up to the smaller of w_min / 2 and 40 Gaussian widths; further out
    the integrand is negligible relative to its peak and is set to zero.
    """
    wb, wa = bb - c, aa - c
    wmin = min(wb.min(), wa.min() if wa.size else np.inf)
    kappa = [lx - special.digamma(wb).sum() + special.digamma(wa).sum()]
    k2 = 0.5 * (special.polygamma(1, wb).sum() - special.polygamma(1, wa).sum())
    # 40 Gaussian widths puts the integrand below e^{-800}
    ylim = min(0.5 * wmin, 40.0 / math.sqrt(2.0 * k2)) if k2 > 0 else 0.5 * wmin
    lfact = 0.0
    for n in range(2, 400):
        lfact += math.log(n)
        k = (special.polygamma(n - 1, wb).sum() - special.polygamma(n - 1, wa).sum()) / math.exp(lfact)
        kappa.append(k)
        if k == 0 or math.log(abs(k)) + n * math.log(ylim) < math.log(1e-17):
            break
    kappa = np.asarray(kappa)

    def series(y: np.ndarray) -> np.ndarray:
        inside = np.abs(y) <= ylim
        yy = np.where(inside, y, 0.0)
        d = -1j * yy
        # Horner over n >= 2, then the linear term i y (lx - sum psi_b + sum psi_a)
        acc = np.zeros_like(d)
        for k in kappa[:0:-1]:
            acc = (acc + k) * d
        acc = acc * d + 1j * yy * kappa[0]
        return np.where(inside, acc, -np.inf)

    return series


def _log_g_contour(a: list[float], b: list[float], x: float, cfg: ContourConfig) -> LogReal:
    aa = np.asarray(a, dtype=float)
    bb = np.asarray(b, dtype=float)
    lx = math.log(x)
    if len(a) == len(b) and x >= 1.0:
        # G^{q,0}_{q,q} is supported on (0, 1)
        if aa.sum() - bb.sum() > 1.0 or x > 1.0:
            return LogReal.zero()
        raise DomainError("G^{q,0}_{q,q} is singular at x = 1 for these parameters")

    c = cfg.abscissa if cfg.abscissa is not None else _saddle(aa, bb, lx)
    if c >= bb.min():
        raise ParameterError("contour abscissa must lie left of min(b)")
    phi0 = _phi_real(c, aa, bb, lx)
    curv = special.polygamma(1, bb - c).sum() - special.polygamma(1, aa - c).sum()
    sigma = 1.0 / math.sqrt(curv) if curv > 0 else 1.0
    dist = bb.min() - c

    far = min(bb.min(), aa.min() if aa.size else np.inf) - c > _FAR_SADDLE
    series = _saddle_expansion(aa, bb, c, lx) if far else None

    def f(y: np.ndarray) -> np.ndarray:
        if far:
            return np.exp(series(y))
        u = c + 1j * y
        lg = u * lx + special.loggamma(bb[None, :] - u[:, None]).sum(axis=1)
        if aa.size:
            lg = lg - special.loggamma(aa[None, :] - u[:, None]).sum(axis=1)
        return np.exp(lg - phi0)

    tol = cfg.target_tol
    if cfg.truncation is not None:
        ymax = cfg.truncation
    else:
        ymax = 4.0 * sigma
        while abs(f(np.array([ymax]))[0]) > tol * 1e-3 or abs(f(np.array([1.5 * ymax]))[0]) > tol * 1e-3:
            ymax *= 1.5
            if ymax > 1e6 * max(sigma, 1.0):
                raise ConvergenceError("Meijer integrand does not decay along the contour")
    h = cfg.step if cfg.step is not None else 0.25 * min(sigma, dist)
    n = max(int(math.ceil(ymax / h)), 8)
    h = ymax / n
    if n > cfg.max_nodes:
        raise ConvergenceError("Meijer contour exceeds the node budget")
    vals = f(np.arange(n + 1) * h).real
    acc = vals[1:-1].sum() + 0.5 * (vals[0] + vals[-1])
    prev = acc * h
    while True:
        if 2 * n > cfg.max_nodes:
            raise ConvergenceError("Meijer contour quadrature did not converge within the node budget")
        mids = f((np.arange(n) + 0.5) * h).real
        acc += mids.sum()
        n *= 2
        h *= 0.5
        cur = acc * h
        if abs(cur - prev) <= tol * abs(cur):
            break
        prev = cur
    if cur == 0:
        return LogReal.zero()
    return LogReal(phi0 + math.log(abs(cur) / math.pi), 1 if cur > 0 else -1)


def log_meijer_g(
    spec: MeijerSpec, x: float, cfg: ContourConfig | None = None, method: str = "auto"
) -> LogReal:
    """G^{q,0}_{p,q}(a; b | x) as a LogReal.

    ``method="auto"`` uses a closed form where one exists (q=1, Bessel K for
    (p,q)=(0,2), Kummer U for (1,2)) and contour quadrature otherwise;
    ``"contour"`` forces the quadrature.
    """
    if not x > 0:
        raise DomainError(f"Meijer G needs x > 0, got {x}")
    cfg = cfg or DEFAULT_MEIJER
    a, b = _cancel_pairs(spec.a_top, spec.b_bottom)
    if method == "auto":
        closed = _log_g_closed(a, b, x)
        if closed is not None:
            return closed
    elif method != "contour":
        raise ParameterError(f"unknown method {method!r}")
    return _log_g_contour(list(spec.a_top), list(spec.b_bottom), x, cfg) if method == "contour" \
        else _log_g_contour(a, b, x, cfg)


def meijer_g(spec: MeijerSpec, x: float, cfg: ContourConfig | None = None, method: str = "auto") -> float:
    """Value of G^{q,0}_{p,q}(a; b | x); see :func:`log_meijer_g`."""
    return float(log_meijer_g(spec, x, cfg, method))


def meijer_shift(
    spec: MeijerSpec, k: float, x: float, cfg: ContourConfig | None = None, method: str = "auto"
) -> float:
    """G with every parameter shifted by k, which equals x^k G(x)."""
    return meijer_g(spec.shifted(k), x, cfg, method)


# ---------------------------------------------------------------- Laplace


def forward_laplace(
    f: Callable[[float], float],
    t: float,
    alpha: float = 0.0,
    lower: float = 0.0,
    scale: float | None = None,
    tol: float = 1e-8,
) -> float:
    """int_lower^inf e^{-t s} f(s) ds for f behaving like (s - lower)^alpha at the lower end.

    The first panel carries the algebraic endpoint factor as a quadrature
    weight; the rest is covered by adaptive panels around ``scale`` (the
    expected location of the bulk of the integrand, default 1/t) and a
    semi-infinite tail panel.
    """
    if not t > 0:
        raise DomainError(f"forward_laplace needs t > 0, got {t}")
    if not alpha > -1:
        raise DomainError(f"endpoint exponent must exceed -1, got {alpha}")
    scale = scale if scale is not None else 1.0 / t
    opts = dict(epsabs=0.0, epsrel=tol * 0.1, limit=500, full_output=1)
    edges = [lower + scale * r for r in (0.05, 0.25, 0.5, 1.0, 1.5, 2.0, 3.0, 5.0, 8.0)]

    def g(s):
        return math.exp(-t * s) * f(s)

    pieces = []
    first = edges[0]
    if alpha != 0.0:
        pieces.append(
            integrate.quad(
                lambda s: g(s) / (s - lower) ** alpha if s > lower else 0.0,
                lower, first, weight="alg", wvar=(alpha, 0.0), **opts,
            )
        )
    else:
        pieces.append(integrate.quad(g, lower, first, **opts))
    for lo, hi in zip(edges[:-1], edges[1:]):
        pieces.append(integrate.quad(g, lo, hi, **opts))
    pieces.append(integrate.quad(g, edges[-1], np.inf, **opts))
    total = math.fsum(p[0] for p in pieces)
    err = math.fsum(p[1] for p in pieces)
    if err > 1e3 * tol * abs(total) + 1e-300:
        raise ConvergenceError(f"forward Laplace quadrature error estimate {err:.3g} too large")
    return total


def _talbot_nodes(n: int):
    theta = np.arange(1, n) * math.pi / n
    cot = 1.0 / np.tan(theta)
    shape = theta * (cot + 1j)
    sigma = theta + (theta * cot - 1.0) * cot
    return shape, sigma


def _talbot_scale(log_f: Callable[[complex], complex], s: float) -> float:
    """Contour scale r at the real saddle of s p + log F(p)."""

    def g(eta):
        p = math.exp(eta)
        val = s * p + log_f(complex(p)).real
        return val if np.isfinite(val) else 1e300

    res = optimize.minimize_scalar(g, bounds=(-20.0, 20.0), method="bounded", options={"xatol": 1e-6})
    return math.exp(res.x)


def log_inverse_laplace_talbot(
    log_f: Callable[[complex], complex], s: float, cfg: ContourConfig | None = None
) -> LogReal:
    """Bromwich inversion of exp(log_f) at s by the fixed Talbot rule, in log form.

    ``log_f(p)`` must return the principal logarithm of the transform at
    complex p.  The node count starts at ``cfg.truncation`` (default 32) and
    doubles until two successive results agree to ``cfg.target_tol``.
    """
    if not s > 0:
        raise DomainError(f"inverse Laplace needs s > 0, got {s}")
    cfg = cfg or DEFAULT_TALBOT
    r = cfg.abscissa if cfg.abscissa is not None else _talbot_scale(log_f, s)
    n = int(cfg.truncation) if cfg.truncation is not None else 32
    l0 = s * r + log_f(complex(r)).real
    prev = None
    while n <= 4096:
        shape, sig = _talbot_nodes(n)
        p = r * shape
        lterm = np.array([s * pk + log_f(pk) for pk in p]) - l0
        terms = np.exp(lterm) * (1.0 + 1j * sig)
        # everything below is relative to exp(l0)
        cur = (r / n) * (0.5 + math.fsum(terms.real))
        floor = 100.0 * np.finfo(float).eps * (r / n) * (0.5 + float(np.abs(terms).sum()))
        if prev is not None and abs(cur - prev) <= max(cfg.target_tol * abs(cur), floor):
            res = LogReal.from_float(cur)
            return res if res.sign == 0 else LogReal(res.log_magnitude + l0, res.sign)
        prev = cur
        n *= 2
    raise ConvergenceError("Talbot inversion did not converge within 4096 nodes")


def inverse_laplace_talbot(F: Callable[[complex], complex], s: float, cfg: ContourConfig | None = None) -> float:
    """f(s) for the Laplace transform F, via the fixed Talbot contour."""

    def log_f(p):
        return np.log(complex(F(p)))

    return float(log_inverse_laplace_talbot(log_f, s, cfg))
