"""Eigenvalues of dense complex matrices and of long matrix products.

Single matrices go to LAPACK (``zgeev`` via scipy).  A product of M factors is
not multiplied out: its eigenvalue moduli spread like exp(M * const), and a
single eigensolve of the full product loses the small ones to roundoff.  The
factors are instead multiplied in short chunks P_1..P_K and the block-cyclic
matrix

    C = [[0, P_1, 0, ...], [0, 0, P_2, ...], ..., [P_K, 0, ..., 0]]

is diagonalised.  C^K is block diagonal with cyclic shifts of P_1 ... P_K, so
each product eigenvalue lambda appears as K roots nu with nu^K = lambda, and
the moduli spread of C is only the K-th root of that of the product.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .errors import ConvergenceError, ParameterError

MAX_DIM = 256
CONDITION_LIMIT = 1e12
DEFAULT_CHUNK = 5


class ConditioningWarning(UserWarning):
    """Eigenvalue moduli spread beyond what double precision resolves reliably."""


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues with an additive log-modulus offset.

    The true eigenvalue i has log-modulus ``log_abs[i] + log_scale`` and phase
    ``angle(eigenvalues[i])``; ``eigenvalues`` itself is only meaningful where it
    does not underflow.  ``low_confidence`` marks eigenvalues whose modulus lies
    below ``1e-12`` of the largest one in the matrix actually diagonalised.
    """

    eigenvalues: np.ndarray
    log_scale: float = 0.0
    log_abs: np.ndarray | None = None
    low_confidence: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        ev = np.asarray(self.eigenvalues, dtype=complex)
        object.__setattr__(self, "eigenvalues", ev)
        if self.log_abs is None:
            with np.errstate(divide="ignore"):
                object.__setattr__(self, "log_abs", np.log(np.abs(ev)))
        if self.low_confidence is None:
            object.__setattr__(self, "low_confidence", np.zeros(ev.shape, dtype=bool))

    @property
    def N(self) -> int:
        return self.eigenvalues.size

    def log_moduli(self) -> np.ndarray:
        """ln|lambda_i| including the offset."""
        return self.log_abs + self.log_scale

    def stability_exponents(self, M: int) -> np.ndarray:
        """mu_i with |lambda_i| = exp(M mu_i), ascending."""
        return np.sort(self.log_moduli() / M)


def _check_square(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ParameterError(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] > MAX_DIM:
        raise ParameterError(f"dense eigensolver limited to N <= {MAX_DIM}")
    if not np.all(np.isfinite(a)):
        raise ParameterError("matrix has non-finite entries")
    return a


def eigenvalues(a) -> Spectrum:
    """All eigenvalues of a dense complex matrix (LAPACK, backward stable)."""
    a = _check_square(a)
    try:
        ev = linalg.eigvals(a, check_finite=False)
    except linalg.LinAlgError as exc:
        raise ConvergenceError(f"QR iteration failed: {exc}") from exc
    return Spectrum(ev)


def eigenvalues_batch(a: np.ndarray) -> np.ndarray:
    """Eigenvalues of a stack of matrices, shape (..., N)."""
    try:
        return np.linalg.eigvals(a)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"QR iteration failed: {exc}") from exc


def _chunk_products(factors: np.ndarray, chunk: int) -> tuple[np.ndarray, np.ndarray]:
    """Multiply consecutive groups of ``chunk`` factors; each result is renormalised.

    factors has shape (n, M, N, N); returns (n, K, N, N) and the log norms (n,).
    """
    n, M, N, _ = factors.shape
    K = -(-M // chunk)
    out = np.empty((n, K, N, N), dtype=complex)
    log_norm = np.zeros(n)
    for k in range(K):
        block = factors[:, k * chunk]
        for j in range(k * chunk + 1, min((k + 1) * chunk, M)):
            block = block @ factors[:, j]
        c = np.sqrt(np.einsum("...ij,...ij->...", block, np.conj(block)).real)
        out[:, k] = block / c[:, None, None]
        log_norm += np.log(c)
    return out, log_norm


def _block_cyclic(chunks: np.ndarray) -> np.ndarray:
    n, K, N, _ = chunks.shape
    C = np.zeros((n, K * N, K * N), dtype=complex)
    for k in range(K):
        r = k * N
        c = ((k + 1) % K) * N
        C[:, r:r + N, c:c + N] = chunks[:, k]
    return C


def product_log_spectra(factors: np.ndarray, log_scale=None, chunk: int = DEFAULT_CHUNK):
    """Log-moduli and phases of the eigenvalues of a batch of products.

    ``factors`` has shape (n, M, N, N) (or (M, N, N) for one product) and
    represents exp(log_scale) * F_0 F_1 ... F_{M-1}.  Returns ``(log_abs, phase,
    spread)``: arrays of shape (n, N) sorted by modulus, and the log of the
    largest-to-smallest modulus ratio seen by the eigensolver, shape (n,).
    """
    f = np.asarray(factors, dtype=complex)
    single = f.ndim == 3
    if single:
        f = f[None]
    n, M, N, _ = f.shape
    if chunk < 1:
        raise ParameterError("chunk must be at least 1")
    ls = np.zeros(n) if log_scale is None else np.broadcast_to(np.asarray(log_scale, dtype=float), (n,)).copy()
    chunks, lnorm = _chunk_products(f, chunk)
    ls = ls + lnorm
    K = chunks.shape[1]
    mat = chunks[:, 0] if K == 1 else _block_cyclic(chunks)
    nu = eigenvalues_batch(mat)
    with np.errstate(divide="ignore"):
        la = np.log(np.abs(nu))
    order = np.argsort(la, axis=1)
    la = np.take_along_axis(la, order, axis=1)
    ph = np.take_along_axis(np.angle(nu), order, axis=1)
    spread = la[:, -1] - la[:, 0]
    # each product eigenvalue shows up as K roots of equal modulus
    la = K * la.reshape(n, N, K).mean(axis=2)
    ph = np.angle(np.exp(1j * K * ph).reshape(n, N, K).mean(axis=2))
    la = la + ls[:, None]
    if single:
        return la[0], ph[0], float(spread[0])
    return la, ph, spread


def product_spectrum(factors, log_scale: float = 0.0, chunk: int = DEFAULT_CHUNK) -> Spectrum:
    """Eigenvalues of exp(log_scale) * F_0 F_1 ... F_{M-1} for a list of factors.

    With M <= chunk the factors are multiplied out and solved directly.
    """
    mats = [np.asarray(getattr(g, "entries", g), dtype=complex) for g in factors]
    if not mats:
        raise ParameterError("need at least one factor")
    for a in mats:
        _check_square(a)
    la, ph, spread = product_log_spectra(np.stack(mats), log_scale, chunk)
    K = -(-len(mats) // chunk)
    # moduli as seen by the eigensolver are the K-th roots
    low_conf = (la - la.max()) / K < -math.log(CONDITION_LIMIT)
    if spread > math.log(CONDITION_LIMIT):
        warnings.warn(
            f"eigenvalue modulus ratio e^{spread:.1f} exceeds {CONDITION_LIMIT:g}; small moduli are unreliable",
            ConditioningWarning,
            stacklevel=2,
        )
    top = float(la.max())
    rel = la - top
    ev = np.exp(rel) * np.exp(1j * ph)
    return Spectrum(ev, log_scale=top, log_abs=rel, low_confidence=low_conf)
