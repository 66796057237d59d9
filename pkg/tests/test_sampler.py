import math

import numpy as np
import pytest
from scipy import stats

from fteprod import analytic as an
from fteprod.analytic import EnsembleParams
from fteprod.eig import eigenvalues_batch
from fteprod.errors import DomainError, ParameterError
from fteprod.harness.stats import ks_distance
from fteprod.sampler import (
    GasChains,
    MatrixSample,
    RngState,
    check_chain_state,
    fix_trace,
    ginibre_batch,
    haar_batch,
    induced_batch,
    mcmc_fte,
    product_batch,
    sample_ginibre,
    sample_haar_unitary,
    sample_induced,
    sample_product,
)


def _radial_ks(ev, kind, p):
    r = np.sort(np.abs(ev).ravel())
    return ks_distance(r, lambda v: an.radial_cdf(kind, p, v))


# -- RngState ------------------------------------------------------------------

def test_rng_state_validation_and_replay():
    with pytest.raises(ParameterError):
        RngState(-1)
    with pytest.raises(ParameterError):
        RngState(2**64)
    a = RngState(2**64 - 1, 5).generator.random(4)
    b = RngState(2**64 - 1, 5).generator.random(4)
    c = RngState(2**64 - 1, 6).generator.random(4)
    assert a.tobytes() == b.tobytes()
    assert not np.array_equal(a, c)
    assert RngState(3).spawn(9) == RngState(3, 9)


# -- Ginibre -----------------------------------------------------------------

def test_ginibre_trace_mean():
    n, N, t = 100_000, 4, 1.0
    g = ginibre_batch(n, N, N, t, RngState(1))
    tr = np.einsum("nij,nij->n", g, g.conj()).real
    se = tr.std(ddof=1) / math.sqrt(n)
    assert abs(tr.mean() - N * N / t) < 3 * se


def test_ginibre_entry_second_moment():
    t = 2.5
    g = ginibre_batch(62_500, 4, 4, t, RngState(2)).ravel()
    a2 = np.abs(g) ** 2
    assert a2.size == 10**6
    assert abs(a2.mean() - 1.0 / t) < 3 * a2.std(ddof=1) / math.sqrt(a2.size)


def test_sample_ginibre_replay_is_bit_identical():
    a = sample_ginibre(6, 1.0, RngState(42, 3))
    b = sample_ginibre(6, 1.0, RngState(42, 3))
    assert a.entries.tobytes() == b.entries.tobytes()
    assert a.trace_gram == pytest.approx(float(np.vdot(a.entries, a.entries).real), rel=1e-12)


def test_matrix_sample_requires_square():
    with pytest.raises(ParameterError):
        MatrixSample.from_entries(np.zeros((2, 3)))


# -- Haar --------------------------------------------------------------------

def test_haar_unitary_properties():
    u = sample_haar_unitary(7, RngState(3))
    assert np.abs(u.conj().T @ u - np.eye(7)).max() < 1e-12
    assert abs(abs(np.linalg.det(u)) - 1.0) < 1e-12


def test_haar_first_entry_moment():
    N, n = 5, 100_000
    u = haar_batch(n, N, RngState(4))
    x = np.abs(u[:, 0, 0]) ** 2
    assert abs(x.mean() - 1.0 / N) < 3 * x.std(ddof=1) / math.sqrt(n)
    # phases are uniform, so E[U_11] = 0 (checks the phase correction of QR)
    assert abs(u[:, 0, 0].mean()) < 3 * math.sqrt(1.0 / N / n)


# -- induced -----------------------------------------------------------------

@pytest.mark.parametrize("nu", [0, 1])
def test_induced_radial_density(nu):
    p = EnsembleParams.induced(5, float(nu), 1.0)
    ev = eigenvalues_batch(induced_batch(20_000, 5, nu, 1.0, RngState(10 + nu)))
    assert _radial_ks(ev, "InducedGinibre", p) < 0.01


def test_induced_trace_mean():
    n, N, nu, t = 50_000, 4, 2, 0.5
    g = induced_batch(n, N, nu, t, RngState(12))
    tr = np.einsum("nij,nij->n", g, g.conj()).real
    assert abs(tr.mean() - N * (N + nu) / t) < 3 * tr.std(ddof=1) / math.sqrt(n)


def test_induced_rejects_real_nu():
    with pytest.raises(DomainError):
        sample_induced(3, 0.5, 1.0, RngState(0))


# -- fixed trace -------------------------------------------------------------

def test_fix_trace_examples():
    g = sample_induced(5, 1, 1.0, RngState(13))
    f1 = fix_trace(g, 1.0)
    f4 = fix_trace(g, 4.0)
    assert float(np.vdot(f1.entries, f1.entries).real) == pytest.approx(1.0, rel=1e-14)
    np.testing.assert_allclose(f4.entries, 2.0 * f1.entries, rtol=1e-15)
    with pytest.raises(DomainError):
        fix_trace(MatrixSample.from_entries(np.zeros((2, 2))), 1.0)


def test_fixed_trace_radial_density_n5():
    from fteprod.sampler import fte_batch

    p = EnsembleParams.fixed_trace(5, 0.0, 1.0)
    ev = eigenvalues_batch(fte_batch(200_000, 5, 0, 1.0, RngState(14)))
    assert _radial_ks(ev, "GinibreFTE", p) < 0.01
    # Schur bound: sum |z|^2 <= Tr G G^dagger = s
    assert (np.abs(ev) ** 2).sum(axis=1).max() <= 1.0 + 1e-12


# -- products ----------------------------------------------------------------

def test_product_m1_is_fixed_trace_of_induced():
    p = EnsembleParams.fixed_trace(4, 1.0, 2.0)
    factors, ls = sample_product(p, RngState(20, 1))
    direct = fix_trace(sample_induced(4, 1, 1.0, RngState(20, 1)), 2.0)
    np.testing.assert_allclose(factors[0].entries * math.exp(ls), direct.entries, rtol=1e-13)


def test_product_log_scale_determinant():
    p = EnsembleParams.product(4, [0.0, 1.0], [1.0, 0.5])
    factors, ls = sample_product(p, RngState(21))
    rng = RngState(21)
    g1 = induced_batch(1, 4, 0, 1.0, rng)[0]
    g2 = induced_batch(1, 4, 1, 0.5, rng)[0]
    ref = np.linalg.slogdet(g1)[1] + np.linalg.slogdet(g2)[1]
    got = 4 * ls + sum(np.linalg.slogdet(f.entries)[1] for f in factors)
    assert got == pytest.approx(ref, rel=1e-8)
    for f in factors:
        assert f.trace_gram == pytest.approx(1.0, rel=1e-12)


def test_product_reproducible_across_factors():
    p = EnsembleParams.mixed(3, [0.0] * 6, 2)
    a, la = product_batch(5, p, RngState(22, 4))
    b, lb = product_batch(5, p, RngState(22, 4))
    assert a.tobytes() == b.tobytes() and la.tobytes() == lb.tobytes()


def test_sample_product_rejects_real_nu():
    with pytest.raises(DomainError):
        sample_product(EnsembleParams.product(3, [0.5, 0.0]), RngState(0))


# -- Metropolis --------------------------------------------------------------

def test_normal_chain_stays_on_sphere():
    p = EnsembleParams.fixed_trace(4, 1.0, 1.7)
    worst = 0.0
    for state in mcmc_fte("NormalFTE", p, 3000, RngState(30)):
        worst = max(worst, abs((np.abs(state.eigenvalues) ** 2).sum() - 1.7))
    assert worst < 1e-10


@pytest.mark.parametrize("kind", ["GinibreFTE", "NormalFTE"])
def test_acceptance_after_tuning(kind):
    p = EnsembleParams.fixed_trace(4, 0.5, 1.0)
    ch = GasChains(kind, p, 50, RngState(31))
    ch.tune()
    for _ in range(200):
        ch.step_once()
    rate = ch.accepted / ch.proposed
    assert 0.2 <= rate <= 0.6


def test_chain_state_matches_joint_density():
    p = EnsembleParams.fixed_trace(3, 0.5, 1.0)
    states = list(mcmc_fte("GinibreFTE", p, 200, RngState(32)))
    assert all(check_chain_state("GinibreFTE", p, s) for s in states[::20])
    assert 0.0 < states[-1].acceptance < 1.0


def test_chain_rejects_bad_start_and_kind():
    p = EnsembleParams.fixed_trace(3, 0.0, 1.0)
    with pytest.raises(DomainError):
        GasChains("GinibreFTE", p, 2, RngState(0), z0=np.array([0.1, 0.1, 0.2]))
    with pytest.raises(ParameterError):
        GasChains("InducedGinibre", EnsembleParams.induced(3), 2, RngState(0))


def test_chains_from_dispersed_starts_agree():
    p = EnsembleParams.fixed_trace(4, 0.5, 1.0)
    tight = GasChains("GinibreFTE", p, 100, RngState(33), spread=0.05)
    wide = GasChains("GinibreFTE", p, 100, RngState(34), spread=0.95)
    samples = []
    for ch in (tight, wide):
        ch.tune()
        samples.append(np.abs(ch.sample(2000, thin=5)).ravel())
    d = stats.ks_2samp(samples[0], samples[1]).statistic
    assert d < 0.02
