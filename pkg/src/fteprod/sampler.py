"""Monte-Carlo sampling of the matrix ensembles and Metropolis chains for the eigenvalue gases.

Matrix-level samplers cover integer nu only (rectangular construction).  Real nu
and the normal fixed-trace ensemble are reached through ``mcmc_fte``, which works
directly with the joint eigenvalue density.

Every sampler exists in a single-draw form returning :class:`MatrixSample` and a
batched form working on stacked ``(n, N, N)`` arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .analytic.joint import joint_log_density
from .analytic.params import EnsembleKind, EnsembleParams
from .errors import DomainError, ParameterError
from .specfun import LogReal

TARGET_ACCEPTANCE = 0.35


# ---------------------------------------------------------------- seeding


@dataclass
class RngState:
    """Reproducible random stream identified by ``(seed, stream)``.

    The underlying generator is created lazily and advances with every draw, so
    two states built from the same pair replay identical sequences.
    """

    seed: int
    stream: int = 0
    _gen: np.random.Generator | None = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        for name in ("seed", "stream"):
            v = getattr(self, name)
            if int(v) != v or not 0 <= v < 2**64:
                raise ParameterError(f"{name} must be an unsigned 64-bit integer, got {v}")
            setattr(self, name, int(v))

    @property
    def generator(self) -> np.random.Generator:
        if self._gen is None:
            ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream,))
            self._gen = np.random.Generator(np.random.PCG64(ss))
        return self._gen

    def spawn(self, stream: int) -> "RngState":
        """Fresh state with the same seed and another stream id."""
        return RngState(self.seed, stream)


@dataclass(frozen=True)
class MatrixSample:
    """A square complex matrix together with Tr G G^dagger."""

    entries: np.ndarray
    trace_gram: float

    @classmethod
    def from_entries(cls, entries) -> "MatrixSample":
        g = np.asarray(entries, dtype=complex)
        if g.ndim != 2 or g.shape[0] != g.shape[1]:
            raise ParameterError(f"expected a square matrix, got shape {g.shape}")
        return cls(g, float(np.vdot(g, g).real))

    @property
    def N(self) -> int:
        return self.entries.shape[0]


def _check_N(N: int) -> None:
    if int(N) != N or N < 1:
        raise ParameterError(f"N must be a positive integer, got {N}")


def _check_t(t: float) -> None:
    if not t > 0:
        raise ParameterError(f"t must be positive, got {t}")


def _integer_nu(nu) -> int:
    if nu < 0 or not float(nu).is_integer():
        raise DomainError(f"matrix-level sampling needs integer nu >= 0, got {nu}; use mcmc_fte for real nu")
    return int(nu)


# ---------------------------------------------------------------- batched samplers


def ginibre_batch(n: int, rows: int, cols: int, t: float, rng: RngState) -> np.ndarray:
    """``n`` complex Gaussian matrices with density proportional to exp(-t Tr G G^dagger)."""
    _check_t(t)
    g = rng.generator.standard_normal((n, rows, cols, 2))
    return (g[..., 0] + 1j * g[..., 1]) * math.sqrt(0.5 / t)


def haar_batch(n: int, N: int, rng: RngState) -> np.ndarray:
    """``n`` Haar unitaries from QR of Ginibre draws with the diagonal of R made positive."""
    q, r = np.linalg.qr(ginibre_batch(n, N, N, 1.0, rng))
    d = np.diagonal(r, axis1=-2, axis2=-1)
    return q * (d / np.abs(d))[:, None, :]


def induced_batch(n: int, N: int, nu: int, t: float, rng: RngState) -> np.ndarray:
    """``n`` induced Ginibre matrices G = V (X^dagger X)^{1/2}, X of size (N+nu) x N."""
    nu = _integer_nu(nu)
    x = ginibre_batch(n, N + nu, N, t, rng)
    if nu == 0:
        # V (X^dagger X)^{1/2} has the law of X itself when X is square
        return x
    w = np.conj(np.swapaxes(x, -1, -2)) @ x
    lam, vec = np.linalg.eigh(w)
    root = (vec * np.sqrt(np.clip(lam, 0.0, None))[:, None, :]) @ np.conj(np.swapaxes(vec, -1, -2))
    return haar_batch(n, N, rng) @ root


def fix_trace_batch(g: np.ndarray, s: float) -> np.ndarray:
    """Project every matrix of a stack onto Tr G G^dagger = s."""
    if not s > 0:
        raise ParameterError(f"s must be positive, got {s}")
    tr = np.einsum("...ij,...ij->...", g, np.conj(g)).real
    if np.any(tr <= 0):
        raise DomainError("cannot fix the trace of a zero matrix")
    return g * np.sqrt(s / tr)[..., None, None]


def fte_batch(n: int, N: int, nu: int, s: float, rng: RngState) -> np.ndarray:
    """``n`` fixed-trace induced Ginibre matrices by radial projection."""
    return fix_trace_batch(induced_batch(n, N, nu, 1.0, rng), s)


def product_batch(n: int, p: EnsembleParams, rng: RngState) -> tuple[np.ndarray, np.ndarray]:
    """Factors of ``n`` products, each normalised to unit Frobenius norm.

    Returns ``(factors, log_scale)`` with ``factors`` of shape (n, M, N, N); the
    true product G_1 G_2 ... G_M is ``exp(log_scale) * factors[:, 0] @ ... @ factors[:, M-1]``.
    The first m factors are the fixed-trace ones.
    """
    N, M, m = p.N, p.M, p.m
    out = np.empty((n, M, N, N), dtype=complex)
    log_scale = np.zeros(n)
    for j in range(M):
        if j < m:
            g = fte_batch(n, N, p.nu[j], p.s[j], rng)
        else:
            g = induced_batch(n, N, p.nu[j], p.t[j - m], rng)
        c = np.sqrt(np.einsum("...ij,...ij->...", g, np.conj(g)).real)
        out[:, j] = g / c[:, None, None]
        log_scale += np.log(c)
    return out, log_scale


# ---------------------------------------------------------------- single draws


def sample_ginibre(N: int, t: float, rng: RngState) -> MatrixSample:
    """Complex Ginibre matrix, real and imaginary parts Normal(0, 1/(2t))."""
    _check_N(N)
    return MatrixSample.from_entries(ginibre_batch(1, N, N, t, rng)[0])


def sample_haar_unitary(N: int, rng: RngState) -> np.ndarray:
    """Haar-distributed unitary N x N matrix."""
    _check_N(N)
    return haar_batch(1, N, rng)[0]


def sample_induced(N: int, nu: int, t: float, rng: RngState) -> MatrixSample:
    """Induced Ginibre matrix with density proportional to det(G^dagger G)^nu exp(-t Tr G^dagger G)."""
    _check_N(N)
    return MatrixSample.from_entries(induced_batch(1, N, nu, t, rng)[0])


def fix_trace(g: MatrixSample, s: float) -> MatrixSample:
    """Rescale ``g`` so that Tr G G^dagger = s."""
    if not g.trace_gram > 0:
        raise DomainError("cannot fix the trace of a zero matrix")
    if not s > 0:
        raise ParameterError(f"s must be positive, got {s}")
    entries = g.entries * math.sqrt(s / g.trace_gram)
    return MatrixSample(entries, float(s))


def sample_product(p: EnsembleParams, rng: RngState) -> tuple[list[MatrixSample], float]:
    """The M factors of one product (Frobenius-normalised) and the accumulated log scale."""
    for v in p.nu:
        _integer_nu(v)
    factors, log_scale = product_batch(1, p, rng)
    return [MatrixSample.from_entries(f) for f in factors[0]], float(log_scale[0])


# ---------------------------------------------------------------- Metropolis chains


@dataclass
class ChainState:
    """Current configuration of one Metropolis chain."""

    eigenvalues: np.ndarray
    log_density: LogReal
    accepted: int = 0
    proposed: int = 0

    @property
    def acceptance(self) -> float:
        return self.accepted / self.proposed if self.proposed else 0.0


def _gas_log_density(z: np.ndarray, kind: EnsembleKind, nu: float, s: float) -> np.ndarray:
    """Vectorised log joint density over chains, z of shape (C, N); -inf outside the support."""
    N = z.shape[1]
    r2 = np.abs(z) ** 2
    iu = np.triu_indices(N, 1)
    diff = np.abs(z[:, :, None] - z[:, None, :])[:, iu[0], iu[1]]
    with np.errstate(divide="ignore"):
        val = 2.0 * np.log(diff).sum(axis=1)
        if nu != 0:
            val = val + nu * np.log(r2).sum(axis=1)
        if kind is EnsembleKind.GINIBRE_FTE:
            rest = s - r2.sum(axis=1)
            expo = N * (N - 1) / 2.0 - 1.0
            if expo:
                val = val + expo * np.log(np.where(rest > 0, rest, 1.0))
            val = np.where(rest > 0, val, -np.inf)
    return val


def _initial(kind: EnsembleKind, N: int, s: float, C: int, gen: np.random.Generator, spread: float) -> np.ndarray:
    """Dispersed starting points; ``spread`` in (0, 1) sets the share of s used."""
    phase = np.exp(2j * math.pi * gen.random((C, N)))
    u = gen.random((C, N)) + 0.1
    u = u / u.sum(axis=1, keepdims=True) * s * spread
    if kind is EnsembleKind.NORMAL_FTE:
        u = u / u.sum(axis=1, keepdims=True) * s
    return np.sqrt(u) * phase


class GasChains:
    """C independent Metropolis chains for the fixed-trace eigenvalue gases, advanced in lockstep.

    GinibreFTE uses single-eigenvalue Gaussian moves; proposals leaving the ball
    sum |z|^2 < s have zero density and are rejected.  NormalFTE uses pair moves
    that shift squared radius between two eigenvalues, u_i + d, u_j - d, and
    jitter both phases.  In the coordinates (u, phi) the area element is
    d^2 z = du dphi / 2, so these symmetric moves have unit Jacobian and keep
    sum u = s exactly.
    """

    def __init__(self, kind, p: EnsembleParams, n_chains: int, rng: RngState,
                 z0: np.ndarray | None = None, spread: float = 0.5):
        self.kind = EnsembleKind.parse(kind)
        if not self.kind.is_fixed_trace:
            raise ParameterError("mcmc_fte samples GinibreFTE or NormalFTE only")
        p.validate_for(self.kind)
        self.p = p
        self.N, self.nu, self.s = p.N, p.nu[0], p.s[0]
        self.gen = rng.generator
        if z0 is None:
            z0 = _initial(self.kind, self.N, self.s, n_chains, self.gen, spread)
        self.z = np.array(np.broadcast_to(z0, (n_chains, self.N)), dtype=complex)
        if self.kind is EnsembleKind.NORMAL_FTE:
            tot = (np.abs(self.z) ** 2).sum(axis=1)
            self.z = self.z * np.sqrt(self.s / tot)[:, None]
        self.logp = _gas_log_density(self.z, self.kind, self.nu, self.s)
        if not np.all(np.isfinite(self.logp)):
            raise DomainError("initial configuration has zero density")
        scale = math.sqrt(self.s / self.N)
        self.step = 0.5 * scale if self.kind is EnsembleKind.GINIBRE_FTE else 0.5 * self.s / self.N
        self.phase_step = 0.5
        self.accepted = 0
        self.proposed = 0

    @property
    def n_chains(self) -> int:
        return self.z.shape[0]

    def _propose(self) -> tuple[np.ndarray, np.ndarray]:
        C, N = self.z.shape
        new = self.z.copy()
        rows = np.arange(C)
        if self.kind is EnsembleKind.GINIBRE_FTE:
            i = self.gen.integers(N, size=C)
            kick = self.gen.standard_normal((C, 2)) * (self.step / math.sqrt(2.0))
            new[rows, i] += kick[:, 0] + 1j * kick[:, 1]
            return new, np.zeros(C, dtype=bool)
        i = self.gen.integers(N, size=C)
        j = (i + 1 + self.gen.integers(N - 1, size=C)) % N
        u = np.abs(new) ** 2
        d = self.gen.standard_normal(C) * self.step
        ui, uj = u[rows, i] + d, u[rows, j] - d
        bad = (ui < 0) | (uj < 0)
        ui, uj = np.where(bad, u[rows, i], ui), np.where(bad, u[rows, j], uj)
        jit = self.gen.standard_normal((C, 2)) * self.phase_step
        ph_i = np.angle(new[rows, i]) + jit[:, 0]
        ph_j = np.angle(new[rows, j]) + jit[:, 1]
        new[rows, i] = np.sqrt(ui) * np.exp(1j * ph_i)
        new[rows, j] = np.sqrt(uj) * np.exp(1j * ph_j)
        # a move leaving the quadrant u >= 0 is rejected outright
        return new, bad

    def step_once(self) -> np.ndarray:
        """One proposal per chain; returns the boolean acceptance mask."""
        new, bad = self._propose()
        lp = np.where(bad, -np.inf, _gas_log_density(new, self.kind, self.nu, self.s))
        with np.errstate(invalid="ignore"):
            acc = np.log(self.gen.random(self.n_chains)) < lp - self.logp
        self.z[acc] = new[acc]
        self.logp[acc] = lp[acc]
        self.accepted += int(acc.sum())
        self.proposed += acc.size
        if self.kind is EnsembleKind.NORMAL_FTE:
            # undo rounding drift of the sphere constraint
            tot = (np.abs(self.z) ** 2).sum(axis=1)
            self.z *= np.sqrt(self.s / tot)[:, None]
        return acc

    def tune(self, sweeps: int = 200, rounds: int = 20) -> None:
        """Adapt the proposal scale towards the target acceptance rate; counters are reset after."""
        for _ in range(rounds):
            acc = 0
            n = 0
            for _ in range(sweeps):
                acc += int(self.step_once().sum())
                n += self.n_chains
            rate = acc / n
            factor = math.exp(2.0 * (rate - TARGET_ACCEPTANCE))
            self.step *= factor
            if self.kind is EnsembleKind.NORMAL_FTE:
                self.phase_step = min(self.phase_step * factor, math.pi)
        self.accepted = self.proposed = 0

    def sample(self, n_sweeps: int, thin: int = 1) -> np.ndarray:
        """Run ``n_sweeps`` sweeps (N proposals per chain each) and return the recorded configurations.

        Output shape is (n_sweeps // thin, C, N).
        """
        out = []
        for k in range(n_sweeps):
            for _ in range(self.N):
                self.step_once()
            if (k + 1) % thin == 0:
                out.append(self.z.copy())
        return np.array(out)


def mcmc_fte(kind, p: EnsembleParams, steps: int, rng: RngState,
             z0=None, warmup: bool = True) -> Iterator[ChainState]:
    """Single Metropolis chain on the joint eigenvalue density, yielding the state after each step.

    The proposal scale is tuned during warm-up (unless ``warmup`` is False); the
    yielded counters refer to post-warm-up proposals only.
    """
    chains = GasChains(kind, p, 1, rng, z0=None if z0 is None else np.asarray(z0, dtype=complex)[None, :])
    if warmup:
        chains.tune(sweeps=50, rounds=10)
    for _ in range(int(steps)):
        chains.step_once()
        yield ChainState(
            eigenvalues=chains.z[0].copy(),
            log_density=LogReal(float(chains.logp[0]), 1),
            accepted=chains.accepted,
            proposed=chains.proposed,
        )


def check_chain_state(kind, p: EnsembleParams, state: ChainState, rtol: float = 1e-9) -> bool:
    """Recompute the joint log density of a chain state and compare with the cached value."""
    ref = joint_log_density(kind, p, state.eigenvalues)
    if ref.is_zero:
        return False
    return abs(ref.log_magnitude - state.log_density.log_magnitude) <= rtol * max(1.0, abs(ref.log_magnitude))
