"""Empirical statistics: radial histograms, Kolmogorov-Smirnov distances, binomial errors."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..errors import ParameterError

CONVENTIONS = ("per-area", "per-radius")


@dataclass(frozen=True)
class RadialHistogram:
    """Counts of eigenvalue moduli in radial bins.

    ``n_samples`` is the number of matrices (or chain configurations) the
    moduli were pooled from, so per-area densities integrate to the mean number
    of eigenvalues per sample inside the binned range.
    """

    edges: np.ndarray
    counts: np.ndarray
    n_samples: int
    density_convention: str = "per-area"

    def __post_init__(self):
        e = np.asarray(self.edges, dtype=float)
        c = np.asarray(self.counts, dtype=np.int64)
        if e.ndim != 1 or e.size < 2 or np.any(np.diff(e) <= 0) or e[0] < 0:
            raise ParameterError("edges must be a strictly ascending list of non-negative reals")
        if c.shape != (e.size - 1,) or np.any(c < 0):
            raise ParameterError("need one non-negative count per bin")
        if self.n_samples < 1:
            raise ParameterError("n_samples must be positive")
        if self.density_convention not in CONVENTIONS:
            raise ParameterError(f"density_convention must be one of {CONVENTIONS}")
        object.__setattr__(self, "edges", e)
        object.__setattr__(self, "counts", c)

    @classmethod
    def from_moduli(cls, r, n_samples: int, bins: int, r_max: float, equal_area: bool = True,
                    density_convention: str = "per-area") -> "RadialHistogram":
        """Histogram moduli on [0, r_max]; equal-area annuli unless ``equal_area`` is False."""
        if bins < 1:
            raise ParameterError("bins must be positive")
        if equal_area:
            edges = r_max * np.sqrt(np.linspace(0.0, 1.0, bins + 1))
        else:
            edges = np.linspace(0.0, r_max, bins + 1)
        counts, _ = np.histogram(np.asarray(r, dtype=float).ravel(), bins=edges)
        return cls(edges, counts, int(n_samples), density_convention)

    @property
    def centers(self) -> np.ndarray:
        """Bin midpoints in r^2 for per-area histograms, in r otherwise."""
        e = self.edges
        if self.density_convention == "per-area":
            return np.sqrt(0.5 * (e[:-1] ** 2 + e[1:] ** 2))
        return 0.5 * (e[:-1] + e[1:])

    def _measure(self) -> np.ndarray:
        e = self.edges
        if self.density_convention == "per-area":
            return math.pi * (e[1:] ** 2 - e[:-1] ** 2)
        return np.diff(e)

    def density(self) -> np.ndarray:
        return self.counts / (self.n_samples * self._measure())

    def stderr(self) -> np.ndarray:
        """Poisson standard error of each bin density."""
        return np.sqrt(self.counts) / (self.n_samples * self._measure())

    def total(self) -> float:
        """Bin sum of density times measure (the mean count per sample)."""
        return float(self.counts.sum() / self.n_samples)


def ks_distance(empirical_sorted, cdf: Callable[[np.ndarray], np.ndarray]) -> float:
    """sup |F_n - F| for a sorted sample and a (vectorised) model CDF."""
    x = np.asarray(empirical_sorted, dtype=float).ravel()
    if x.size == 0:
        raise ParameterError("empty sample")
    if np.any(np.diff(x) < 0):
        raise ParameterError("ks_distance needs sorted input")
    n = x.size
    f = np.asarray(cdf(x), dtype=float)
    hi = np.arange(1, n + 1) / n - f
    lo = f - np.arange(n) / n
    return float(max(hi.max(), lo.max(), 0.0))


def ks_critical(n: int, alpha: float = 0.01) -> float:
    """Asymptotic Kolmogorov critical value c(alpha)/sqrt(n)."""
    c = math.sqrt(-0.5 * math.log(alpha / 2.0))
    return c / math.sqrt(n)


def binomial_stderr(p, n: int):
    p = np.asarray(p, dtype=float)
    return np.sqrt(np.clip(p * (1.0 - p), 0.0, None) / n)
