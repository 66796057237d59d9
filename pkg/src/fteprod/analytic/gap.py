"""Hole (gap) probabilities: no eigenvalue inside the disc |z| < x."""

from __future__ import annotations

import math

import numpy as np
from scipy import special

from ..errors import DomainError, ParameterError
from ..specfun import log_upper_gamma_regularized_complex
from ..transforms import ContourConfig, log_inverse_laplace_talbot

GAP_SLACK = 1e-6


def _check(x: float, nu: float, N: int) -> None:
    if not x >= 0:
        raise DomainError(f"gap radius must be >= 0, got {x}")
    if not nu > -1:
        raise ParameterError(f"nu must exceed -1, got {nu}")
    if int(N) != N or N < 1:
        raise ParameterError(f"N must be a positive integer, got {N}")


def gap_ginibre(x: float, t: float, nu: float, N: int) -> float:
    """E_nu(x; t) = prod_{j<N} Q(j + 1 + nu, t x^2) for the induced Ginibre ensemble.

    The radial moments r^{2(j+nu)+1} e^{-t r^2} integrated from x make the first
    argument carry nu; for nu = 0 this is the familiar prod_j Q(j+1, t x^2).
    """
    _check(x, nu, N)
    if not t > 0:
        raise ParameterError(f"t must be positive, got {t}")
    if x == 0:
        return 1.0
    a = np.arange(N) + 1.0 + nu
    return float(np.prod(special.gammaincc(a, t * x * x)))


def _gap_fte_exponent(N: int, nu: float) -> float:
    return N * N + N * nu


def gap_fte(x: float, s: float, nu: float, N: int, cfg: ContourConfig | None = None) -> float:
    """Gap probability of the fixed-trace induced Ginibre ensemble.

    Gamma(E) s^{1-E} times the inverse Laplace transform of
    t^{-E} prod_j Q(j+1+nu, t x^2) at s, with E = N^2 + N nu, computed with the
    Talbot contour.  All eigenvalues satisfy sum |z|^2 <= s, so the probability
    vanishes identically once N x^2 >= s.
    """
    _check(x, nu, N)
    if not s > 0:
        raise ParameterError(f"s must be positive, got {s}")
    if x == 0:
        return 1.0
    x2 = x * x
    if N * x2 >= s:
        return 0.0
    E = _gap_fte_exponent(N, nu)
    a = np.arange(N) + 1.0 + nu

    def log_f(p: complex) -> complex:
        w = p * x2
        return -E * np.log(p) + sum(log_upper_gamma_regularized_complex(aj, w) for aj in a)

    lr = log_inverse_laplace_talbot(log_f, s, cfg)
    if lr.sign == 0:
        val = 0.0
    else:
        val = lr.sign * math.exp(lr.log_magnitude + special.gammaln(E) + (1.0 - E) * math.log(s))
    assert -GAP_SLACK <= val <= 1.0 + GAP_SLACK, f"gap probability {val} outside [0, 1]"
    return float(val)


def gap_fte_integer_nu(x: float, s: float, nu: int, N: int) -> float:
    """Closed form of :func:`gap_fte` for integer nu >= 0.

    Each Q(n, w) = e^{-w} sum_{i<n} w^i / i! is a polynomial times e^{-w}, so the
    transform is sum_m c_m x^{2m} t^{m-E} e^{-N x^2 t} and inverts term by term to
    sum_m c_m x^{2m} (s - N x^2)^{E-m-1} / Gamma(E - m).  Every term is positive.
    """
    if int(nu) != nu or nu < 0:
        raise DomainError(f"closed-form gap needs integer nu >= 0, got {nu}")
    nu = int(nu)
    _check(x, nu, N)
    if x == 0:
        return 1.0
    x2 = x * x
    w = s - N * x2
    if w <= 0:
        return 0.0
    # polynomial coefficients of prod_j sum_{i < j+1+nu} y^i / i!
    poly = np.array([1.0])
    for j in range(N):
        n = j + 1 + nu
        factor = 1.0 / special.factorial(np.arange(n))
        poly = np.convolve(poly, factor)
    E = _gap_fte_exponent(N, nu)
    m = np.arange(poly.size)
    logs = (np.log(poly) + m * math.log(x2) + (E - m - 1.0) * math.log(w)
            - special.gammaln(E - m) + special.gammaln(E) + (1.0 - E) * math.log(s))
    return float(np.exp(special.logsumexp(logs)))
