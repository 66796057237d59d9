"""Quick invariant checks, runnable from the CLI as a release gate.

Each check returns a record ``{"name", "passed", "value", "threshold"}``; a
suite passes when every record does.  Monte-Carlo checks use small fixed-seed
samples so the whole battery runs in well under a minute.
"""

from __future__ import annotations

import math
import time
from typing import Callable

import mpmath
import numpy as np
from scipy import integrate, special

from .. import analytic as an
from .. import specfun as sf
from ..analytic.params import EnsembleParams
from ..eig import eigenvalues, eigenvalues_batch
from ..errors import ParameterError
from ..sampler import GasChains, RngState, fix_trace, ginibre_batch, sample_induced
from ..transforms import ContourConfig, MeijerSpec, forward_laplace, inverse_laplace_talbot, meijer_g, meijer_shift
from .stats import ks_critical, ks_distance

SUITES = ("specfun", "transforms", "analytic", "sampler", "eig", "all")


def _rec(name: str, value: float, threshold: float) -> dict:
    value = float(value)
    return {"name": name, "passed": bool(value <= threshold), "value": value, "threshold": threshold}


def _rel(a, b) -> float:
    a, b = float(a), float(b)
    return abs(a - b) / max(abs(b), 1e-300)


# ---------------------------------------------------------------- specfun


def _specfun() -> list[dict]:
    out = []
    with mpmath.workdps(40):
        worst = max(
            abs(sf.log_gamma_ratio(a, b) - float(mpmath.loggamma(a) - mpmath.loggamma(b)))
            for a, b in [(2500.0, 2497.5), (101.0, 3.0), (0.5, 30.25), (2.5e5, 2.5e5 - 7.0)]
        )
    out.append(_rec("log_gamma_ratio vs mpmath (abs)", worst, 1e-10))
    worst = max(_rel(sf.upper_incomplete_gamma_regularized(a, x), mpmath.gammainc(a, x, regularized=True))
                for a, x in [(1.0, 0.3), (5.5, 2.0), (20.0, 25.0)])
    out.append(_rec("regularized upper Gamma vs mpmath", worst, 1e-12))
    worst = max(abs(sf.log_kummer_u(a, b, x) - float(mpmath.log(mpmath.hyperu(a, b, x))))
                for a, b, x in [(3.0, 1.0, 0.7), (24.0, 1.0, 2.0), (99.0, 2.5, 5.0)])
    out.append(_rec("log Kummer U vs mpmath (abs)", worst, 1e-9))
    rng = np.random.default_rng(7)
    m = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
    ref = sf.permanent_bruteforce(m)
    out.append(_rec("Ryser permanent vs brute force", abs(sf.permanent(m) - ref) / abs(ref), 1e-10))
    out.append(_rec("digamma(1) = -Euler gamma", abs(sf.digamma(1.0) + float(mpmath.euler)), 1e-14))
    return out


# ---------------------------------------------------------------- transforms


def _transforms() -> list[dict]:
    out = []
    contour = ContourConfig(target_tol=1e-11)
    worst = 0.0
    for a, b, x in [((), (0.0, 0.5, 1.0), 2.0), ((7.0,), (1.0, 0.0), 0.4), ((9.0, 6.5), (0.0, 1.0, 2.0), 0.05)]:
        ref = mpmath.meijerg([[], list(a)], [list(b), []], x)
        worst = max(worst, _rel(meijer_g(MeijerSpec(a, b), x, contour, method="contour"), ref))
    out.append(_rec("Meijer contour vs mpmath", worst, 1e-9))

    # inverse Laplace identity: L{ s^{b-1} G(a, b; nu | x/s) }(t) = t^{-b} G(a; nu | t x)
    nus, top = (0.5, 1.0), ()
    worst = 0.0
    for b, t in ((1.5, 0.5), (3.0, 1.0), (4.5, 2.0)):
        for x in (0.3, 1.0, 2.5):
            spec_up = MeijerSpec(top + (b,), nus)
            f = lambda s, x=x, b=b, spec_up=spec_up: s ** (b - 1.0) * meijer_g(spec_up, x / s) if s > 0 else 0.0
            lhs = forward_laplace(f, t, scale=max(1.0 / t, x), tol=1e-10)
            rhs = t ** (-b) * meijer_g(MeijerSpec(top, nus), t * x)
            worst = max(worst, _rel(lhs, rhs))
    out.append(_rec("Laplace round trip of the Meijer inverse-transform identity (3x3 grid)", worst, 1e-6))

    spec = MeijerSpec((12.0,), (0.0, 1.0))
    worst = max(_rel(meijer_shift(spec, k, x), x**k * meijer_g(spec, x)) for k in (1, 2, 3) for x in (0.2, 1.3))
    out.append(_rec("Meijer shift by x^k", worst, 1e-9))

    worst = 0.0
    for a, bb, x in [(10.0, 0.0, 0.5), (25.0, 1.0, 2.0), (8.5, 0.5, 1.0)]:
        g = meijer_g(MeijerSpec((a,), (bb, 0.0)), x, contour, method="contour")
        worst = max(worst, _rel(g, math.exp(-x) * sf.kummer_u(a - bb, 1.0 - bb, x)))
    out.append(_rec("G^{2,0}_{1,2} vs exp(-x) U", worst, 1e-8))

    worst = 0.0
    for n1, n2, x in [(0.0, 0.0, 0.3), (1.0, 0.0, 2.0), (2.5, 1.0, 5.0)]:
        g = meijer_g(MeijerSpec((), (n1, n2)), x, contour, method="contour")
        y = math.sqrt(x)
        worst = max(worst, _rel(g, 2.0 * y ** (n1 + n2) * special.kv(n1 - n2, 2.0 * y)))
    out.append(_rec("G^{2,0}_{0,2} contour vs Bessel K", worst, 1e-9))

    val = inverse_laplace_talbot(lambda p: p ** -2, 3.0)
    out.append(_rec("Talbot inverse of 1/p^2 at 3", _rel(val, 3.0), 1e-8))
    return out


# ---------------------------------------------------------------- analytic


def _analytic() -> list[dict]:
    out = []
    worst = 0.0
    for N in (5, 10, 50):
        p = EnsembleParams.fixed_trace(N, 0.0, 1.0)
        worst = max(worst, abs(an.density("GinibreFTE", p, 0.0) / N**2 - (1 - 1 / N**2) / math.pi))
    out.append(_rec("origin value N^-2 R(0) = (1 - 1/N^2)/pi", worst, 1e-12))

    worst = 0.0
    for N in (2, 5, 10, 20):
        for nu in (0, 1, 2):
            p = EnsembleParams.fixed_trace(N, nu, 1.0)
            r = np.sqrt(np.linspace(0.0, 0.98, 50))
            a = an.density("GinibreFTE", p, r)
            b = an.density_fte_alt(p, r)
            mask = a > 1e-300
            worst = max(worst, float(np.max(np.abs(a[mask] - b[mask]) / a[mask])))
    out.append(_rec("Gamma-ratio series vs power series (50 radii x 12 cases)", worst, 1e-10))

    cases = [
        ("GinibreFTE", EnsembleParams.fixed_trace(6, 0.5, 2.0)),
        ("NormalFTE", EnsembleParams.fixed_trace(6, 1.0, 1.0)),
        ("InducedGinibre", EnsembleParams.induced(6, 1.5, 0.7)),
        ("ProductGinibre", EnsembleParams.product(3, [0.0, 1.0], [1.0, 2.0])),
        ("MixedProduct", EnsembleParams.mixed(3, [0.0, 0.0], 1)),
    ]
    worst = 0.0
    for kind, p in cases:
        f = lambda v, kind=kind, p=p: math.pi * float(an.density(kind, p, math.sqrt(v)))
        hi = p.s[0] if kind in ("GinibreFTE", "NormalFTE") else np.inf
        val = integrate.quad(f, 0.0, hi, limit=400, epsabs=0, epsrel=1e-10)[0] if hi != np.inf else \
            sum(integrate.quad(f, lo, up, limit=400, epsabs=0, epsrel=1e-10)[0]
                for lo, up in [(0.0, 1.0), (1.0, 10.0), (10.0, 60.0), (60.0, np.inf)])
        worst = max(worst, abs(val - p.N) / p.N)
    out.append(_rec("normalisation to N (all kinds)", worst, 1e-6))

    p = EnsembleParams.induced(4, 0.5, 1.3)
    z1, z2 = 0.3 + 0.2j, -0.5 + 0.4j
    k11 = an.ginibre_kernel(z1, z1, 1.3, 0.5, 4)
    k22 = an.ginibre_kernel(z2, z2, 1.3, 0.5, 4)
    k12 = an.ginibre_kernel(z1, z2, 1.3, 0.5, 4)
    ref = (k11 * k22).real - abs(k12) ** 2
    out.append(_rec("determinantal identity k = 2", _rel(an.kpoint("InducedGinibre", p, [z1, z2]), ref), 1e-12))

    p1, p3 = EnsembleParams.fixed_trace(5, 1.0, 1.0), EnsembleParams.fixed_trace(5, 1.0, 3.0)
    z = 0.4 + 0.1j
    out.append(_rec("s-scaling of the fixed-trace density",
                    _rel(an.density("GinibreFTE", p3, z * math.sqrt(3.0)) * 3.0, an.density("GinibreFTE", p1, z)), 1e-12))

    worst = max(_rel(an.gap_fte(x, 1.0, nu, N), an.gap_fte_integer_nu(x, 1.0, nu, N))
                for N, nu, x in [(2, 0, 0.5), (3, 1, 0.3), (5, 0, 0.3)])
    out.append(_rec("Talbot gap vs closed form", worst, 1e-7))
    return out


# ---------------------------------------------------------------- sampler and eig


def _sampler() -> list[dict]:
    out = []
    rng = RngState(2024, 0)
    n = 20_000
    ev = eigenvalues_batch(ginibre_batch(n, 5, 5, 1.0, rng))
    r2 = np.sort((np.abs(ev) ** 2).ravel())
    ks = ks_distance(r2, lambda v: special.gammainc(np.arange(1, 6)[None, :], v[:, None]).mean(axis=1))
    out.append(_rec("Ginibre squared radii vs Gamma union (KS)", ks, ks_critical(r2.size)))

    g = fix_trace(sample_induced(4, 1, 1.0, RngState(1, 3)), 2.5)
    out.append(_rec("fix_trace sets Tr G G^dagger", _rel(np.vdot(g.entries, g.entries).real, 2.5), 1e-12))

    a = sample_induced(3, 2, 1.0, RngState(5, 1)).entries
    b = sample_induced(3, 2, 1.0, RngState(5, 1)).entries
    out.append(_rec("replay with identical seed and stream", float(np.abs(a - b).max()), 0.0))

    p = EnsembleParams.fixed_trace(4, 1.0, 1.0)
    ch = GasChains("NormalFTE", p, 20, RngState(9, 0))
    drift = 0.0
    for _ in range(500):
        ch.step_once()
        drift = max(drift, float(np.abs((np.abs(ch.z) ** 2).sum(axis=1) - 1.0).max()))
    out.append(_rec("normal chain stays on the sphere", drift, 1e-10))
    return out


def _eig() -> list[dict]:
    out = []
    rng = np.random.default_rng(11)
    a = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
    sp = eigenvalues(a)
    out.append(_rec("sum of eigenvalues = trace", abs(sp.eigenvalues.sum() - np.trace(a)) / np.linalg.norm(a), 1e-10))
    out.append(_rec("product of eigenvalues = det", abs(np.prod(sp.eigenvalues) / np.linalg.det(a) - 1.0), 1e-8))
    p = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6)) + 4 * np.eye(6)
    sim = eigenvalues(p @ a @ np.linalg.inv(p)).eigenvalues
    d = max(np.abs(sim - lam).min() for lam in sp.eigenvalues)
    out.append(_rec("similarity invariance", d, 1e-8))
    return out


_SUITE_FUNCS: dict[str, Callable[[], list[dict]]] = {
    "specfun": _specfun,
    "transforms": _transforms,
    "analytic": _analytic,
    "sampler": _sampler,
    "eig": _eig,
}


def run_verify(suite: str = "all") -> dict:
    """Run one suite (or all of them) and return a machine-readable report."""
    if suite not in SUITES:
        raise ParameterError(f"unknown suite {suite!r}; choose from {SUITES}")
    names = list(_SUITE_FUNCS) if suite == "all" else [suite]
    checks = []
    t0 = time.perf_counter()
    for name in names:
        for rec in _SUITE_FUNCS[name]():
            rec["suite"] = name
            checks.append(rec)
    return {
        "suite": suite,
        "passed": all(c["passed"] for c in checks),
        "n_checks": len(checks),
        "n_failed": sum(not c["passed"] for c in checks),
        "seconds": time.perf_counter() - t0,
        "checks": checks,
    }
