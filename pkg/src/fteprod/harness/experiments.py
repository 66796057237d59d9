"""Monte-Carlo experiments compared against the analytic predictions.

Sampling is split into fixed-size shards; shard i always uses stream i of the
configured seed, so output does not depend on the worker count.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .. import analytic as an
from ..analytic.params import EnsembleKind, EnsembleParams
from ..eig import CONDITION_LIMIT, ConditioningWarning, eigenvalues_batch, product_log_spectra
from ..errors import ParameterError
from ..sampler import GasChains, RngState, fte_batch, induced_batch, product_batch
from .stats import RadialHistogram, binomial_stderr, ks_critical, ks_distance

EXPERIMENTS = ("density", "gap", "stability", "kpoint", "verify")
MCMC_CHAINS = 100
STABILITY_MAX_M = 60
STABILITY_MAX_N = 8

CURVE_LABELS = {
    EnsembleKind.GINIBRE_FTE: "fixed-trace induced Ginibre density (Gamma-ratio series in |z|^2/s)",
    EnsembleKind.NORMAL_FTE: "fixed-trace induced normal density (series with exponent N(N+1)/2 + N nu)",
    EnsembleKind.INDUCED_GINIBRE: "induced Ginibre density (kernel at equal arguments)",
    EnsembleKind.PRODUCT_GINIBRE: "product of induced Ginibre matrices (Meijer G weight times polynomial)",
    EnsembleKind.MIXED_PRODUCT: "fixed-trace times induced product (shifted Meijer G sum)",
}


@dataclass
class RunConfig:
    """Everything needed to reproduce one experiment."""

    kind: EnsembleKind
    params: EnsembleParams
    experiment: str = "density"
    samples: int = 10_000
    seed: int = 0
    bins: int = 40
    workers: int = 1
    output_path: str | None = None
    xmax: float | None = None
    grid: int = 12
    shard_size: int = 5_000
    thin: int = 5
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        self.kind = EnsembleKind.parse(self.kind)
        if self.experiment not in EXPERIMENTS:
            raise ParameterError(f"experiment must be one of {EXPERIMENTS}")
        if self.samples < 1:
            raise ParameterError("samples must be >= 1")
        if self.bins < 4:
            raise ParameterError("bins must be >= 4")
        if self.workers < 1:
            raise ParameterError("workers must be >= 1")
        if self.grid < 2:
            raise ParameterError("grid must be >= 2")
        if self.shard_size < 1 or self.thin < 1:
            raise ParameterError("shard_size and thin must be positive")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise ParameterError("seed must be an unsigned 64-bit integer")
        self.params.validate_for(self.kind)

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        d = dict(d)
        kind = EnsembleKind.parse(d.pop("kind", d.pop("ensemble_kind", "ginibre-fte")))
        pd = d.pop("params", None) or d.pop("ensemble", None)
        if pd is None:
            raise ParameterError("config needs an 'ensemble' object with N, M, m, nu, s, t")
        params = EnsembleParams(**pd)
        known = {f.name for f in fields(cls)} - {"kind", "params"}
        unknown = set(d) - known
        if unknown:
            raise ParameterError(f"unknown config keys: {sorted(unknown)}")
        return cls(kind=kind, params=params, **d)

    def to_dict(self) -> dict:
        out = {f.name: getattr(self, f.name) for f in fields(self)}
        out["kind"] = self.kind.value
        out["params"] = self.params.to_dict()
        return out


def build_id() -> str:
    """Short content hash of the package sources (stable across checkouts)."""
    root = Path(__file__).resolve().parents[1]
    h = hashlib.sha1()
    for f in sorted(root.rglob("*.py")):
        h.update(f.relative_to(root).as_posix().encode())
        h.update(f.read_bytes())
    return h.hexdigest()[:12]


# ---------------------------------------------------------------- sampling


def _is_int(v: float) -> bool:
    return v >= 0 and float(v).is_integer()


def uses_mcmc(kind: EnsembleKind, p: EnsembleParams) -> bool:
    return kind is EnsembleKind.NORMAL_FTE or (kind is EnsembleKind.GINIBRE_FTE and not _is_int(p.nu[0]))


def _mcmc_shard(kind, p, n, rng, thin) -> np.ndarray:
    C = min(n, MCMC_CHAINS)
    chains = GasChains(kind, p, C, rng)
    chains.tune()
    records = -(-n // C)
    zs = chains.sample(records * thin, thin=thin)
    return zs.reshape(-1, p.N)[:n]


def _shard_eigenvalues(kind: EnsembleKind, p: EnsembleParams, n: int, rng: RngState, thin: int) -> np.ndarray:
    """Eigenvalues of n samples, shape (n, N)."""
    if kind.is_fixed_trace:
        if uses_mcmc(kind, p):
            return _mcmc_shard(kind, p, n, rng, thin)
        return eigenvalues_batch(fte_batch(n, p.N, p.nu[0], p.s[0], rng))
    if kind is EnsembleKind.INDUCED_GINIBRE or p.M == 1:
        return eigenvalues_batch(induced_batch(n, p.N, p.nu[0], p.t[0], rng))
    f, ls = product_batch(n, p, rng)
    la, ph, _ = product_log_spectra(f, ls)
    return np.exp(la + 1j * ph)


def _shard_log_moduli(p: EnsembleParams, n: int, rng: RngState) -> tuple[np.ndarray, np.ndarray]:
    f, ls = product_batch(n, p, rng)
    la, _, spread = product_log_spectra(f, ls)
    return la, spread


def _run_shards(func, cfg: RunConfig, n_total: int, stream_offset: int = 0):
    sizes = [min(cfg.shard_size, n_total - i) for i in range(0, n_total, cfg.shard_size)]
    jobs = [(size, RngState(cfg.seed, stream_offset + i)) for i, size in enumerate(sizes)]
    if cfg.workers == 1 or len(jobs) == 1:
        return [func(size, rng) for size, rng in jobs]
    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        return list(pool.map(lambda job: func(*job), jobs))


def sample_eigenvalues(cfg: RunConfig) -> np.ndarray:
    """Eigenvalues of ``cfg.samples`` draws, shape (samples, N), in shard order."""
    parts = _run_shards(lambda n, rng: _shard_eigenvalues(cfg.kind, cfg.params, n, rng, cfg.thin), cfg, cfg.samples)
    return np.concatenate(parts, axis=0)


# ---------------------------------------------------------------- helpers


def length_scale(kind: EnsembleKind, p: EnsembleParams) -> float:
    """Factor lambda with z = lambda x mapping the unit-disc variable x to the eigenvalue plane.

    lambda = N^{M/2 - m} sqrt(prod s / prod t): the trace constraints shrink the
    spectrum by N^{-1/2} each and every unconstrained factor widens it by N^{1/2}.
    """
    return p.N ** (p.M / 2.0 - p.m) * math.sqrt(p.s_prod / p.tau)


def _write_csv(path: str | None, header: list[str], rows) -> None:
    if path is None:
        return
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) for v in row])


def _write_report(path: str | None, report: dict) -> None:
    if path is None:
        return
    with open(str(path) + ".json", "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True, default=float)


def _metadata(cfg: RunConfig, curves: dict) -> dict:
    return {"build_id": build_id(), "seed": int(cfg.seed), "config": cfg.to_dict(), "curves": curves}


# ---------------------------------------------------------------- experiments


def run_density_experiment(cfg: RunConfig) -> dict:
    """Radial density histogram against the analytic and limiting densities.

    CSV columns are ``r, empirical_density, analytic_density, limiting_density,
    stderr`` in the rescaled variable x = z / lambda (see :func:`length_scale`),
    with densities normalised to unit mass.  The report carries the KS distance
    of the raw moduli against the exact radial CDF.
    """
    kind, p = cfg.kind, cfg.params
    ev = sample_eigenvalues(cfg)
    r = np.abs(ev)
    lam = length_scale(kind, p)
    x_max = cfg.xmax if cfg.xmax is not None else 2.0
    hist = RadialHistogram.from_moduli(r / lam, cfg.samples, cfg.bins, x_max)
    xc = hist.centers
    emp = hist.density() / p.N
    err = hist.stderr() / p.N
    ana = lam * lam * np.exp(an.log_density(kind, p, lam * xc)) / p.N
    lim_kind = "circular" if p.M == 1 else "productM"
    lim = an.limiting_density(lim_kind, p.M, xc)
    _write_csv(cfg.output_path, ["r", "empirical_density", "analytic_density", "limiting_density", "stderr"],
               zip(xc, emp, ana, lim, err))
    rs = np.sort(r.ravel())
    ks = ks_distance(rs, lambda v: an.radial_cdf(kind, p, v))
    report = {
        "experiment": "density",
        "ks": ks,
        "ks_critical_1pct": ks_critical(rs.size),
        "n_samples": cfg.samples,
        "n_eigenvalues": int(rs.size),
        "sampler": "metropolis" if uses_mcmc(kind, p) else "matrix",
        "length_scale": lam,
        "histogram_mass": hist.total() / p.N,
        "metadata": _metadata(cfg, {
            "analytic_density": CURVE_LABELS[kind],
            "limiting_density": "circular law 1/pi on the unit disc" if p.M == 1
            else f"{p.M}-fold product law |x|^(2/M-2)/(M pi) on the unit disc",
        }),
    }
    _write_report(cfg.output_path, report)
    return report


def _gap_analytic(kind: EnsembleKind, p: EnsembleParams, x: float) -> float:
    if kind is EnsembleKind.INDUCED_GINIBRE:
        return an.gap_ginibre(x, p.t[0], p.nu[0], p.N)
    return an.gap_fte(x, p.s[0], p.nu[0], p.N)


def run_gap_experiment(cfg: RunConfig) -> dict:
    """Fraction of samples with no eigenvalue in |z| < x against the analytic gap probability.

    CSV columns ``x, empirical_gap_fraction, analytic_gap, binomial_stderr``;
    the standard error uses the analytic probability.
    """
    kind, p = cfg.kind, cfg.params
    if kind not in (EnsembleKind.INDUCED_GINIBRE, EnsembleKind.GINIBRE_FTE):
        raise ParameterError("gap experiments support induced and ginibre-fte")
    ev = sample_eigenvalues(cfg)
    rmin = np.abs(ev).min(axis=1)
    if cfg.xmax is not None:
        x_max = cfg.xmax
    elif kind is EnsembleKind.GINIBRE_FTE:
        x_max = math.sqrt(p.s[0] / p.N)
    else:
        x_max = 1.2 / math.sqrt(p.t[0])
    xs = np.linspace(0.0, x_max, cfg.grid)
    emp = np.array([(rmin > x).mean() for x in xs])
    ana = np.array([_gap_analytic(kind, p, float(x)) for x in xs])
    se = binomial_stderr(ana, cfg.samples)
    _write_csv(cfg.output_path, ["x", "empirical_gap_fraction", "analytic_gap", "binomial_stderr"],
               zip(xs, emp, ana, se))
    diff = np.abs(emp - ana)
    z = np.where(se > 0, diff / np.where(se > 0, se, 1.0), np.where(diff > 0, np.inf, 0.0))
    report = {
        "experiment": "gap",
        "max_z": float(z.max()),
        "within_3_sigma": bool(np.all(z <= 3.0)),
        "n_samples": cfg.samples,
        "x": xs.tolist(),
        "empirical": emp.tolist(),
        "analytic": ana.tolist(),
        "metadata": _metadata(cfg, {
            "analytic_gap": "product of regularized upper incomplete Gamma functions Q(j+1+nu, t x^2)"
            if kind is EnsembleKind.INDUCED_GINIBRE
            else "Talbot inversion of t^(-E) prod_j Q(j+1+nu, t x^2)",
        }),
    }
    _write_report(cfg.output_path, report)
    return report


def stability_sample(p: EnsembleParams, cfg: RunConfig, stream_offset: int = 0) -> tuple[np.ndarray, int]:
    """Sorted stability exponents mu (samples, N) and the number of ill-conditioned samples."""
    parts = _run_shards(lambda n, rng: _shard_log_moduli(p, n, rng), cfg, cfg.samples, stream_offset)
    la = np.concatenate([q[0] for q in parts], axis=0)
    spread = np.concatenate([q[1] for q in parts])
    return np.sort(la, axis=1) / p.M, int((spread > math.log(CONDITION_LIMIT)).sum())


def _check_stability_params(p: EnsembleParams) -> None:
    if p.M > STABILITY_MAX_M or p.N > STABILITY_MAX_N:
        raise ParameterError(f"stability runs limited to M <= {STABILITY_MAX_M}, N <= {STABILITY_MAX_N}")
    if any(v != 0 for v in p.nu) or any(v != 1 for v in p.s + p.t):
        raise ParameterError("stability runs use nu_j = 0 and s_j = t_j = 1")


def run_stability_experiment(cfg: RunConfig) -> dict:
    """Histogram of mu = ln|z| / M and per-peak statistics against psi(k+1)/2.

    When the configuration has m >= 1 the m = 0 product of the same (N, M) is
    sampled as well (on disjoint streams) and the peak shifts are reported.
    """
    p = cfg.params
    _check_stability_params(p)
    mu, ill = stability_sample(p, cfg)
    peaks = np.array(an.stability_peaks(p.N))
    means, variances = mu.mean(axis=0), mu.var(axis=0, ddof=1)
    lo, hi = float(mu.min()), float(mu.max())
    edges = np.linspace(lo, hi, cfg.bins + 1)
    counts, _ = np.histogram(mu.ravel(), bins=edges)
    dens = counts / (mu.size * np.diff(edges))
    _write_csv(cfg.output_path, ["mu", "empirical_density"], zip(0.5 * (edges[:-1] + edges[1:]), dens))
    report = {
        "experiment": "stability",
        "N": p.N, "M": p.M, "m": p.m,
        "predicted_peaks": peaks.tolist(),
        "peak_means": means.tolist(),
        "peak_variances": variances.tolist(),
        "max_peak_deviation": float(np.abs(means - peaks).max()),
        "ill_conditioned_samples": ill,
        "n_samples": cfg.samples,
    }
    if p.m >= 1:
        ref = EnsembleParams.product(p.N, [0.0] * p.M)
        mu0, ill0 = stability_sample(ref, cfg, stream_offset=1 << 32)
        report["reference_m0_means"] = mu0.mean(axis=0).tolist()
        report["shift_vs_m0"] = (means - mu0.mean(axis=0)).tolist()
        report["ill_conditioned_samples_m0"] = ill0
    if ill:
        warnings.warn(f"{ill} samples exceeded the eigenvalue modulus ratio {CONDITION_LIMIT:g}",
                      ConditioningWarning, stacklevel=2)
    report["metadata"] = _metadata(cfg, {"predicted_peaks": "half the digamma function at k+1"})
    _write_report(cfg.output_path, report)
    return report
