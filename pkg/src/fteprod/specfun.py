"""Scalar special functions in log-safe form.

Gamma-type quantities used by the ensemble formulas overflow doubles already
for moderate N (Gamma(2500) appears at N=50), so everything here either
returns logarithms or works with :class:`LogReal` values.  The heavy lifting
is delegated to ``scipy.special``; the Kummer U function is computed from its
real integral representation with a peak-aware, log-scaled quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import permutations
from typing import Iterable, Sequence

import numpy as np
from scipy import integrate, optimize, special

from .errors import BudgetError, DomainError

__all__ = [
    "LogReal",
    "log_gamma",
    "log_gamma_complex",
    "gamma_sign",
    "log_abs_rgamma",
    "digamma",
    "upper_incomplete_gamma_regularized",
    "log_upper_gamma_regularized_complex",
    "bessel_k",
    "kummer_u",
    "log_kummer_u",
    "log_gamma_ratio",
    "log_binomial",
    "permanent",
    "permanent_bruteforce",
    "log_sum_exp",
]

_CANCEL_TOL = 1e-14


@dataclass(frozen=True)
class LogReal:
    """A real number stored as ``sign * exp(log_magnitude)``.

    ``sign == 0`` encodes an exact zero; ``log_magnitude`` is then ``-inf``.
    """

    log_magnitude: float
    sign: int

    def __post_init__(self):
        object.__setattr__(self, "log_magnitude", float(self.log_magnitude))
        object.__setattr__(self, "sign", int(self.sign))
        if self.sign not in (-1, 0, 1):
            raise ValueError(f"sign must be -1, 0 or 1, got {self.sign}")
        if self.sign == 0 and self.log_magnitude != -math.inf:
            object.__setattr__(self, "log_magnitude", -math.inf)

    @classmethod
    def from_float(cls, value: float) -> "LogReal":
        if value == 0:
            return cls.zero()
        return cls(math.log(abs(value)), 1 if value > 0 else -1)

    @classmethod
    def zero(cls) -> "LogReal":
        return cls(-math.inf, 0)

    @property
    def is_zero(self) -> bool:
        return self.sign == 0

    def __mul__(self, other: "LogReal") -> "LogReal":
        if self.sign == 0 or other.sign == 0:
            return LogReal.zero()
        return LogReal(self.log_magnitude + other.log_magnitude, self.sign * other.sign)

    def __truediv__(self, other: "LogReal") -> "LogReal":
        if other.sign == 0:
            raise ZeroDivisionError("division by a zero LogReal")
        if self.sign == 0:
            return LogReal.zero()
        return LogReal(self.log_magnitude - other.log_magnitude, self.sign * other.sign)

    def __neg__(self) -> "LogReal":
        return LogReal(self.log_magnitude, -self.sign)

    def __add__(self, other: "LogReal") -> "LogReal":
        return log_sum_exp([self, other])

    def __float__(self) -> float:
        if self.sign == 0:
            return 0.0
        return self.sign * math.exp(self.log_magnitude)

    def value(self) -> float:
        return float(self)


# ---------------------------------------------------------------- gamma family


def _check_positive(name: str, x) -> None:
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0)):
        raise DomainError(f"{name} requires a positive argument, got {x!r}")


def log_gamma(x):
    """ln Gamma(x) for x > 0 (scalar or array)."""
    _check_positive("log_gamma", x)
    out = special.gammaln(x)
    return float(out) if np.ndim(out) == 0 else out


def log_gamma_complex(z):
    """Principal branch of ln Gamma(z) for complex z away from the poles."""
    zc = np.asarray(z, dtype=complex)
    re, im = zc.real, zc.imag
    at_pole = (im == 0) & (re <= 0) & (re == np.round(re))
    if np.any(at_pole):
        raise DomainError(f"Gamma has a pole at {z!r}")
    out = special.loggamma(zc)
    return complex(out) if np.ndim(out) == 0 else out


def gamma_sign(x):
    """Sign of Gamma(x) for real x; 0 at the poles (non-positive integers)."""
    x = np.asarray(x, dtype=float)
    pole = (x <= 0) & (x == np.round(x))
    sgn = np.where(pole, 0.0, special.gammasgn(np.where(pole, 0.5, x)))
    return float(sgn) if sgn.ndim == 0 else sgn


def log_abs_rgamma(x):
    """Return ``(log|1/Gamma(x)|, sign)``; at poles the reciprocal is zero.

    This is the form needed when a reciprocal Gamma argument may legitimately
    hit a non-positive integer and the corresponding term must vanish.
    """
    x = np.asarray(x, dtype=float)
    pole = (x <= 0) & (x == np.round(x))
    safe = np.where(pole, 0.5, x)
    logv = np.where(pole, -np.inf, -special.gammaln(safe))
    sgn = np.where(pole, 0.0, special.gammasgn(safe))
    if logv.ndim == 0:
        return float(logv), float(sgn)
    return logv, sgn


def digamma(x):
    """psi(x) = d/dx ln Gamma(x) for x > 0."""
    _check_positive("digamma", x)
    out = special.digamma(x)
    return float(out) if np.ndim(out) == 0 else out


def upper_incomplete_gamma_regularized(a, x):
    """Q(a, x) = Gamma(a; x) / Gamma(a) for a > 0, x >= 0."""
    _check_positive("upper_incomplete_gamma_regularized (a)", a)
    if np.any(np.asarray(x, dtype=float) < 0) or np.any(np.isnan(np.asarray(x, dtype=float))):
        raise DomainError(f"Q(a, x) requires x >= 0, got {x!r}")
    out = special.gammaincc(a, x)
    return float(out) if np.ndim(out) == 0 else out


def log_upper_gamma_regularized_complex(a: float, w: complex) -> complex:
    """ln Q(a, w) for complex w, principal branch of the finite-sum continuation.

    For integer ``a`` the exact finite form ``e^{-w} sum_{k<a} w^k / k!`` is used;
    otherwise mpmath supplies the analytic continuation.
    """
    if a <= 0:
        raise DomainError(f"log Q(a, w) requires a > 0, got {a}")
    w = complex(w)
    if float(a).is_integer():
        n = int(a)
        # truncated exponential series; a is small (at most N) wherever used
        terms = np.empty(n, dtype=complex)
        terms[0] = 1.0
        for k in range(1, n):
            terms[k] = terms[k - 1] * w / k
        total = terms.sum()
        if total == 0:
            return complex(-np.inf)
        return -w + np.log(total)
    import mpmath

    val = mpmath.gammainc(a, mpmath.mpc(w.real, w.imag), regularized=True)
    return complex(mpmath.log(val))


def bessel_k(order: float, x):
    """Modified Bessel function K_order(x) for x > 0."""
    _check_positive("bessel_k", x)
    out = special.kv(order, x)
    return float(out) if np.ndim(out) == 0 else out


_STIRLING = (1.0 / 12, -1.0 / 360, 1.0 / 1260, -1.0 / 1680, 1.0 / 1188, -691.0 / 360360, 1.0 / 156)


def _stirling_tail(x: float) -> float:
    inv = 1.0 / x
    inv2 = inv * inv
    acc = 0.0
    for c in reversed(_STIRLING):
        acc = acc * inv2 + c
    return acc * inv


def log_gamma_ratio(a: float, b: float) -> float:
    """ln[Gamma(a) / Gamma(b)] for a, b > 0 without the cancellation of two large logs.

    Integer differences use the finite product; otherwise both arguments are
    shifted above 20 and the Stirling expansions are subtracted term by term.
    """
    if not (a > 0 and b > 0):
        raise DomainError(f"log_gamma_ratio needs positive arguments, got {a}, {b}")
    d = a - b
    if d == 0:
        return 0.0
    if float(d).is_integer() and abs(d) <= 100_000:
        n = int(abs(d))
        lo = min(a, b)
        val = math.fsum(np.log(lo + np.arange(n)))
        return val if d > 0 else -val
    shift = 0.0
    while min(a, b) < 20.0:
        # Gamma(x) = Gamma(x + 1) / x
        shift += math.log(b) - math.log(a)
        a += 1.0
        b += 1.0
    d = a - b
    main = d * math.log(b) + (a - 0.5) * math.log1p(d / b) - d
    return shift + main + _stirling_tail(a) - _stirling_tail(b)


# ---------------------------------------------------------------- Kummer U


def _kummer_log_integrand(a: float, b: float, x: float):
    """ln of e^{-x e^y} e^{a y} (1 + e^y)^{b-a-1}, the U integrand after t = e^y."""

    # a y + (b-a-1) softplus(y) rewritten with y - softplus(y) = -softplus(-y) to avoid cancellation
    def logf(y):
        return -x * math.exp(y) - a * _softplus(-y) + (b - 1.0) * _softplus(y)

    def slope(y):
        return -x * math.exp(y) + a + (b - a - 1.0) * _logistic(y)

    return logf, slope


def _softplus(y: float) -> float:
    return y + math.log1p(math.exp(-y)) if y > 0 else math.log1p(math.exp(y))


def _logistic(y: float) -> float:
    return 1.0 / (1.0 + math.exp(-y)) if y > -700 else 0.0


def log_kummer_u(a: float, b: float, x: float) -> float:
    """ln U(a, b, x) for a > 0, x > 0 by quadrature of the integral representation.

    ``U(a,b,x) = Gamma(a)^{-1} int_0^inf e^{-xt} t^{a-1} (1+t)^{b-a-1} dt``.  With
    t = e^y the integrand becomes smooth and single-peaked on the real line; it
    is divided by its peak value, so parameters of order N^2 neither overflow
    nor underflow, and integrated between the points where it has dropped by
    e^{-60}.
    """
    if not a > 0:
        raise DomainError(f"kummer_u requires a > 0, got a={a}")
    if not x > 0:
        raise DomainError(f"kummer_u requires x > 0, got x={x}")
    a, b, x = float(a), float(b), float(x)
    logf, slope = _kummer_log_integrand(a, b, x)
    # slope(y) -> a > 0 as y -> -inf and -> -inf as y -> +inf; bracket a sign change
    lo, hi = -1.0, 1.0
    while slope(lo) <= 0:
        lo = 2.0 * lo - 1.0
    while slope(hi) >= 0:
        hi = 2.0 * hi + 1.0
    ypk = optimize.brentq(slope, lo, hi, xtol=1e-12, rtol=1e-14)
    top = logf(ypk)

    def f(y):
        return math.exp(logf(y) - top)

    drop = 60.0
    step = 1.0
    left = ypk - step
    while logf(left) - top > -drop:
        step *= 2.0
        left = ypk - step
    step = 1.0
    right = ypk + step
    while logf(right) - top > -drop:
        step *= 2.0
        right = ypk + step
    c = b - a - 1.0
    if c > 0:
        # not log-concave: every stationary point lies in [ln(a/x), ln((a+c)/x)]
        left = min(left, math.log(a / x) - 1.0)
        right = max(right, math.log((a + c) / x) + 1.0)
    # the integrand peaks at 1, so a tiny absolute floor only affects negligible panels
    opts = dict(epsabs=1e-17, epsrel=1e-13, limit=400)
    # panels of bounded width keep long plateaus (tiny x) well resolved
    grid = np.linspace(left, right, max(2, math.ceil((right - left) / 8.0)) + 1)
    grid = grid[np.abs(grid - ypk) > 1e-6 * (right - left)]
    edges = np.union1d(grid, [left, ypk, right])
    total = math.fsum(integrate.quad(f, lo, hi, **opts)[0] for lo, hi in zip(edges[:-1], edges[1:]))
    return top + math.log(total) - special.gammaln(a)


def kummer_u(a: float, b: float, x: float) -> float:
    """Tricomi confluent hypergeometric function U(a, b, x) for a > 0, x > 0."""
    return math.exp(log_kummer_u(a, b, x))


# ---------------------------------------------------------------- combinatorics


def log_binomial(n, k):
    """Return ``(log|C(n,k)|, sign)`` for real n, k via Gamma functions.

    Uses C(n,k) = Gamma(n+1) / (Gamma(k+1) Gamma(n-k+1)); reciprocal Gamma poles
    give an exact zero, and ``n`` may be a negative integer (upper-negation
    identity) as long as ``k`` is a non-negative integer.
    """
    n = np.asarray(n, dtype=float)
    k = np.asarray(k, dtype=float)
    neg_int = (n < 0) & (n == np.round(n))
    if np.any(neg_int):
        # C(-r, k) = (-1)^k C(r+k-1, k) for integer k >= 0
        kk = np.where(neg_int, k, 0.0)
        if np.any((kk < 0) | (kk != np.round(kk))):
            raise DomainError("C(n, k) with negative integer n needs integer k >= 0")
        r = np.where(neg_int, -n, 1.0)
        lm_neg, sg_neg = log_binomial(r + kk - 1.0, kk)
        sg_neg = sg_neg * np.where(np.mod(kk, 2) == 1, -1.0, 1.0)
        nn = np.where(neg_int, 1.0, n)
        kk2 = np.where(neg_int, 0.0, k)
        lm_pos, sg_pos = log_binomial(nn, kk2)
        lm = np.where(neg_int, lm_neg, lm_pos)
        sg = np.where(neg_int, sg_neg, sg_pos)
        return (float(lm), float(sg)) if lm.ndim == 0 else (lm, sg)
    lg_top = special.gammaln(n + 1.0)
    sg_top = special.gammasgn(n + 1.0)
    r1, s1 = log_abs_rgamma(k + 1.0)
    r2, s2 = log_abs_rgamma(n - k + 1.0)
    lm = lg_top + np.asarray(r1) + np.asarray(r2)
    sg = sg_top * np.asarray(s1) * np.asarray(s2)
    lm = np.where(sg == 0, -np.inf, lm)
    return (float(lm), float(sg)) if np.ndim(lm) == 0 else (lm, sg)


_PERMANENT_MAX = 12


def permanent(matrix) -> complex | float:
    """Permanent of a square matrix (n <= 12) by Ryser's formula with Gray-code updates."""
    a = np.asarray(matrix)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise BudgetError(f"permanent needs a square matrix, got shape {a.shape}")
    n = a.shape[0]
    if n > _PERMANENT_MAX:
        raise BudgetError(f"permanent limited to n <= {_PERMANENT_MAX}, got {n}")
    if n == 0:
        return 1.0
    dtype = complex if np.iscomplexobj(a) else float
    a = a.astype(dtype)
    rowsum = np.zeros(n, dtype=dtype)
    chosen = np.zeros(n, dtype=bool)
    total = dtype(0)
    size = 0
    for g in range(1, 1 << n):
        # column whose membership flips between consecutive Gray codes
        j = (g & -g).bit_length() - 1
        if chosen[j]:
            rowsum -= a[:, j]
            size -= 1
        else:
            rowsum += a[:, j]
            size += 1
        chosen[j] = not chosen[j]
        term = np.prod(rowsum)
        total += -term if size % 2 else term
    result = total if n % 2 == 0 else -total
    return complex(result) if dtype is complex else float(result)


def permanent_bruteforce(matrix) -> complex | float:
    """Direct n!-term permutation sum; reference implementation for small n."""
    a = np.asarray(matrix)
    n = a.shape[0]
    rows = np.arange(n)
    total = sum(np.prod(a[rows, list(p)]) for p in permutations(range(n)))
    return complex(total) if np.iscomplexobj(a) else float(total)


# ---------------------------------------------------------------- summation


def log_sum_exp(terms: Iterable[LogReal]) -> LogReal:
    """Signed sum of LogReal terms, returned as a LogReal.

    Terms are rescaled by the largest magnitude and summed with ``math.fsum``;
    a result smaller than 1e-14 times the largest term is treated as an exact
    cancellation and reported as zero.
    """
    items: Sequence[LogReal] = list(terms)
    if not items:
        raise ValueError("log_sum_exp needs at least one term")
    live = [t for t in items if t.sign != 0]
    if not live:
        return LogReal.zero()
    top = max(t.log_magnitude for t in live)
    if top == math.inf:
        raise DomainError("log_sum_exp received an infinite term")
    total = math.fsum(t.sign * math.exp(t.log_magnitude - top) for t in live)
    if abs(total) < _CANCEL_TOL:
        return LogReal.zero()
    return LogReal(top + math.log(abs(total)), 1 if total > 0 else -1)
