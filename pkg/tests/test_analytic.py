import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, signal, special

from fteprod import analytic as an
from fteprod.analytic import CorrelatorQuery, EnsembleKind, EnsembleParams
from fteprod.analytic.density import fte_log_density, mixed_product_log_density, product_log_density
from fteprod.errors import BudgetError, DomainError, ParameterError
from fteprod.sampler import RngState, fte_batch
from fteprod.eig import eigenvalues_batch

EULER = 0.5772156649015329
FTE = EnsembleParams.fixed_trace


# -- parameters --------------------------------------------------------------

def test_params_invariants():
    with pytest.raises(ParameterError):
        EnsembleParams(N=3, M=2, m=1, nu=(0.0,), s=(1.0,), t=(1.0,))
    with pytest.raises(ParameterError):
        EnsembleParams(N=3, M=1, m=0, nu=(-1.0,), t=(1.0,))
    with pytest.raises(ParameterError):
        EnsembleParams.fixed_trace(3, 0.0, 0.0)
    with pytest.raises(ParameterError):
        FTE(1).validate_for("GinibreFTE")
    with pytest.raises(ParameterError):
        EnsembleParams.product(3, [0.0, 0.0]).validate_for("MixedProduct")


def test_kind_parsing():
    assert EnsembleKind.parse("ginibre-fte") is EnsembleKind.GINIBRE_FTE
    assert EnsembleKind.parse("MixedProduct") is EnsembleKind.MIXED_PRODUCT
    assert EnsembleKind.parse("INDUCED_GINIBRE") is EnsembleKind.INDUCED_GINIBRE
    with pytest.raises(ParameterError):
        EnsembleKind.parse("wishart")


def test_correlator_query_limits():
    with pytest.raises(ParameterError):
        CorrelatorQuery(()).validate_for("GinibreFTE", FTE(3))
    with pytest.raises(ParameterError):
        CorrelatorQuery((0.1, 0.2, 0.3)).validate_for("NormalFTE", FTE(3))
    CorrelatorQuery((0.1, 0.2, 0.3)).validate_for("GinibreFTE", FTE(3))


# -- partition functions -----------------------------------------------------

def test_log_partition_small_case():
    v2 = math.pi / 2.0
    assert an.log_partition("GinibreFTE", FTE(2)) == pytest.approx(math.log(v2 * math.pi**3 / 3.0), abs=1e-14)


@pytest.mark.parametrize("N, nu", [(2, 0.0), (4, 1.5), (7, 2.0)])
def test_log_partition_scalings(N, nu):
    E = N * N + N * nu
    d = an.log_partition("GinibreFTE", FTE(N, nu, 2.0)) - an.log_partition("GinibreFTE", FTE(N, nu, 1.0))
    assert d == pytest.approx((E - 1.0) * math.log(2.0), abs=1e-12)
    ind = EnsembleParams.induced
    d = an.log_partition("InducedGinibre", ind(N, nu, 2.0)) - an.log_partition("InducedGinibre", ind(N, nu, 1.0))
    assert d == pytest.approx(-E * math.log(2.0), abs=1e-12)


# -- kernel ------------------------------------------------------------------

def test_ginibre_kernel_examples():
    assert an.ginibre_kernel(0, 0, 1.0, 0.0, 5) == pytest.approx(1.0 / math.pi, rel=1e-15)
    z, u = 0.3 - 0.4j, -0.2 + 0.7j
    assert an.ginibre_kernel(z, u, 1.3, 0.5, 6) == pytest.approx(np.conj(an.ginibre_kernel(u, z, 1.3, 0.5, 6)), rel=1e-14)
    t = 1.7
    ref = t / math.pi * math.exp(-t * (abs(z) ** 2 + abs(u) ** 2) / 2.0)
    assert an.ginibre_kernel(z, u, t, 0.0, 1) == pytest.approx(ref, rel=1e-14)


# -- density -----------------------------------------------------------------

@pytest.mark.parametrize("N", [2, 3, 5, 10, 50])
def test_fte_origin_value(N):
    assert an.density("GinibreFTE", FTE(N), 0.0) == pytest.approx((N * N - 1) / math.pi, rel=1e-13)


def test_fte_support_edge():
    p = FTE(4, 1.0, 2.0)
    assert an.density("GinibreFTE", p, math.sqrt(2.0)) == 0.0
    assert an.density("GinibreFTE", p, 3.0) == 0.0


def test_fte_density_nu_positive_vanishes_at_origin():
    assert an.density("GinibreFTE", FTE(10, 1.0), 0.0) == 0.0


def test_mixed_m2_against_kummer_path():
    p = EnsembleParams.mixed(4, [0.0, 0.0], 1)
    for z in (1.0, 0.3 + 0.2j, 2.0j, 5.0):
        assert an.density("MixedProduct", p, z) == pytest.approx(an.mixed_m2_kummer_density(z, p), rel=1e-8)


def test_normal_fte_uses_shared_routine_with_substituted_exponent():
    N, nu, s = 5, 0.5, 1.5
    r2 = np.linspace(0.0, 1.4, 9)
    normal = an.log_density("NormalFTE", FTE(N, nu, s), np.sqrt(r2))
    shared = fte_log_density(r2, s, N, nu, N * (N + 1) / 2.0 + N * nu)
    np.testing.assert_allclose(normal, shared, rtol=1e-14)
    ginibre = fte_log_density(r2, s, N, nu, N * N + N * nu)
    np.testing.assert_allclose(an.log_density("GinibreFTE", FTE(N, nu, s), np.sqrt(r2)), ginibre, rtol=1e-14)


def test_mixed_reductions():
    r2 = np.array([0.05, 0.4, 1.3, 3.0])
    p0 = EnsembleParams(N=3, M=2, m=0, nu=(0.0, 1.0), s=(), t=(1.0, 2.0))
    np.testing.assert_allclose(mixed_product_log_density(r2, p0), product_log_density(r2, p0), rtol=0, atol=1e-10)
    p1 = FTE(4, 1.0, 1.0)
    r2 = np.array([0.01, 0.2, 0.6, 0.95])
    np.testing.assert_allclose(np.exp(mixed_product_log_density(r2, p1)),
                               an.density("GinibreFTE", p1, np.sqrt(r2)), rtol=1e-10)


def test_mixed_product_dispatch_m0_rejected():
    with pytest.raises(ParameterError):
        an.density("MixedProduct", EnsembleParams.product(3, [0.0, 0.0]), 0.5)


def test_density_normalisation_fast_cases():
    cases = [
        ("GinibreFTE", FTE(3, 0.0, 1.0), 1.0),
        ("NormalFTE", FTE(4, 0.5, 2.0), 2.0),
        ("InducedGinibre", EnsembleParams.induced(4, 1.0, 2.0), np.inf),
        ("ProductGinibre", EnsembleParams.product(2, [0.0, 0.0]), np.inf),
    ]
    for kind, p, hi in cases:
        f = lambda v: math.pi * an.density(kind, p, math.sqrt(v))
        pts = [0.0, 0.5, 2.0, 8.0, 30.0, np.inf] if hi == np.inf else [0.0, hi]
        total = sum(integrate.quad(f, a, b, epsabs=0, epsrel=1e-11, limit=200)[0] for a, b in zip(pts[:-1], pts[1:]))
        assert total == pytest.approx(p.N, rel=1e-6)


# -- power-series form -------------------------------------------------------

def test_alternative_series_matches_at_example_point():
    p = FTE(2)
    z = math.sqrt(0.5)
    assert an.density_fte_alt(p, z) == pytest.approx(an.density("GinibreFTE", p, z), rel=1e-12)
    assert an.density_fte_alt(p, 1.0) == 0.0
    assert an.density_fte_alt(p, 1.2) == 0.0


def test_nu0_coefficient_identity_by_direct_summation():
    N, m = 3, 2
    # sum_l C(N^2-2, l) C(m-N, m-l), with C(-1, j) = (-1)^j
    def gen_binom(n, k):
        return math.prod(n - i for i in range(k)) // math.factorial(k)

    direct = sum(math.comb(N * N - 2, l) * gen_binom(m - N, m - l) for l in range(m + 1))
    assert direct == 1 - 7 + 21 == 15
    assert direct == math.comb(N * N - N - 2 + m, m)
    assert an.alt_series_coefficients(N, 0)[m] == direct
    for N in range(2, 9):
        assert an.alt_series_coefficients(N, 0) == [math.comb(N * N - N - 2 + m, m) for m in range(N)]


def test_alternative_series_rejects_real_nu():
    with pytest.raises(DomainError):
        an.density_fte_alt(FTE(3, 0.5), 0.2)


# -- scaling laws ------------------------------------------------------------

@given(st.integers(2, 12), st.floats(0.0, 3.0), st.floats(0.05, 20.0), st.floats(0.0, 0.99, allow_subnormal=False), st.floats(0, 6.3))
@settings(max_examples=40, deadline=None)
def test_fte_s_scaling(N, nu, s, u, phi):
    z = math.sqrt(u) * complex(math.cos(phi), math.sin(phi))
    lhs = s * an.density("GinibreFTE", FTE(N, nu, s), z * math.sqrt(s))
    rhs = an.density("GinibreFTE", FTE(N, nu, 1.0), z)
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-300)


# subnormal radii lose bits when multiplied by sqrt(s), so keep inputs normal
@given(st.floats(0.2, 5.0), st.floats(0.0, 0.45, allow_subnormal=False),
       st.floats(0.0, 0.45, allow_subnormal=False))
@settings(max_examples=15, deadline=None)
def test_fte_kpoint_s_scaling(s, u1, u2):
    pts = [math.sqrt(u1) * (0.6 + 0.8j), -math.sqrt(u2)]
    lhs = s**2 * an.kpoint("GinibreFTE", FTE(3, 0.5, s), [z * math.sqrt(s) for z in pts])
    rhs = an.kpoint("GinibreFTE", FTE(3, 0.5, 1.0), pts)
    assert lhs == pytest.approx(rhs, rel=1e-11, abs=1e-300)


@given(st.floats(0.3, 3.0), st.floats(0.3, 3.0), st.floats(0.01, 3.0))
@settings(max_examples=10, deadline=None)
def test_product_tau_scaling(t1, t2, r):
    p = EnsembleParams.product(3, [0.0, 1.0], [t1, t2])
    p1 = EnsembleParams.product(3, [0.0, 1.0])
    tau = t1 * t2
    lhs = an.density("ProductGinibre", p, r / math.sqrt(tau)) / tau
    assert lhs == pytest.approx(an.density("ProductGinibre", p1, r), rel=1e-9)


@given(st.floats(0.3, 3.0), st.floats(0.3, 3.0), st.floats(0.01, 2.0))
@settings(max_examples=10, deadline=None)
def test_mixed_joint_scaling(s1, t2, r):
    p = EnsembleParams.mixed(3, [0.0, 0.0], 1, [s1], [t2])
    p1 = EnsembleParams.mixed(3, [0.0, 0.0], 1)
    c = t2 / s1
    lhs = an.density("MixedProduct", p, r / math.sqrt(c)) / c
    assert lhs == pytest.approx(an.density("MixedProduct", p1, r), rel=1e-9)


# -- k-point functions -------------------------------------------------------

@pytest.mark.parametrize("kind, p", [
    ("GinibreFTE", FTE(4, 0.5, 1.0)),
    ("NormalFTE", FTE(4, 1.0, 1.0)),
    ("InducedGinibre", EnsembleParams.induced(4, 1.0, 1.5)),
    ("ProductGinibre", EnsembleParams.product(3, [0.0, 1.0])),
    ("MixedProduct", EnsembleParams.mixed(3, [0.0, 0.0], 1)),
])
def test_kpoint_k1_is_density(kind, p):
    for z in (0.1 + 0.2j, 0.5):
        assert an.kpoint(kind, p, [z]) == pytest.approx(an.density(kind, p, z), rel=1e-12)


def test_fte_kpoint_outside_constraint_and_coincident():
    p = FTE(3)
    assert an.kpoint("GinibreFTE", p, [0.8, 0.7j]) == 0.0
    assert an.kpoint("GinibreFTE", p, [0.3 + 0.1j, 0.3 + 0.1j]) == pytest.approx(0.0, abs=1e-12)


def test_fte_kpoint_full_k_equals_symmetrised_joint_density():
    # at k = N the k-point function is N! times the normalised joint density
    p = FTE(3, 0.0, 1.0)
    zs = [0.2 + 0.1j, -0.3 + 0.25j, 0.05 - 0.4j]
    jd = an.joint_log_density("GinibreFTE", p, zs, include_constants=True)
    ref = math.factorial(3) * math.exp(jd.log_magnitude - an.log_partition("GinibreFTE", p))
    assert an.kpoint("GinibreFTE", p, zs) == pytest.approx(ref, rel=1e-10)


def test_induced_determinantal_identity():
    N, nu, t = 5, 1.0, 0.8
    p = EnsembleParams.induced(N, nu, t)
    z1, z2 = 0.4 - 0.3j, -1.1 + 0.2j
    k = lambda a, b: an.ginibre_kernel(a, b, t, nu, N)
    ref = (k(z1, z1) * k(z2, z2)).real - abs(k(z1, z2)) ** 2
    assert an.kpoint("InducedGinibre", p, [z1, z2]) == pytest.approx(ref, rel=1e-12)


def test_kpoint_budget_and_mixed():
    with pytest.raises(ParameterError):
        an.kpoint("MixedProduct", EnsembleParams.mixed(3, [0.0, 0.0], 1), [0.1, 0.2])
    with pytest.raises(BudgetError):
        an.kpoint("GinibreFTE", FTE(6), [0.01 * j for j in range(5)])


# -- gap probabilities -------------------------------------------------------

def test_gap_ginibre_examples():
    assert an.gap_ginibre(0.0, 1.0, 0.0, 4) == 1.0
    assert an.gap_ginibre(1.0, 1.0, 0.0, 1) == pytest.approx(math.exp(-1.0), rel=1e-14)
    assert an.gap_ginibre(0.7, 2.0, 0.0, 1) == pytest.approx(math.exp(-2.0 * 0.49), rel=1e-14)


def test_gap_ginibre_nu_shift():
    # nu shifts every incomplete Gamma index by nu
    x, t, nu, N = 0.8, 1.3, 1.0, 3
    ref = math.prod(special.gammaincc(j + 1 + nu, t * x * x) for j in range(N))
    assert an.gap_ginibre(x, t, nu, N) == pytest.approx(ref, rel=1e-14)


@given(st.floats(0.0, 3.0), st.floats(0.0, 1.0), st.integers(1, 8), st.floats(0.0, 2.0))
@settings(max_examples=40, deadline=None)
def test_gap_ginibre_monotone(x, dx, N, nu):
    assert an.gap_ginibre(x + dx, 1.0, nu, N) <= an.gap_ginibre(x, 1.0, nu, N) + 1e-15


def test_gap_fte_edges():
    assert an.gap_fte(0.0, 1.0, 0.0, 3) == pytest.approx(1.0, abs=1e-12)
    assert an.gap_fte(1.0, 1.0, 0.0, 3) == 0.0
    assert an.gap_fte(2.0, 1.0, 0.5, 3) == 0.0


@pytest.mark.parametrize("N, nu, x, s", [(2, 0, 0.5, 1.0), (3, 1, 0.3, 2.0), (6, 2, 0.2, 1.0), (10, 0, 0.1, 1.0)])
def test_gap_fte_talbot_vs_closed_form(N, nu, x, s):
    assert an.gap_fte(x, s, nu, N) == pytest.approx(an.gap_fte_integer_nu(x, s, nu, N), rel=1e-7, abs=1e-14)


def test_gap_fte_monte_carlo_n2():
    n = 100_000
    ev = eigenvalues_batch(fte_batch(n, 2, 0, 1.0, RngState(77, 0)))
    frac = float((np.abs(ev).min(axis=1) > 0.5).mean())
    g = an.gap_fte(0.5, 1.0, 0.0, 2)
    assert abs(frac - g) < 3.0 * math.sqrt(g * (1 - g) / n)


# -- joint densities ---------------------------------------------------------

def test_joint_log_density_zeros():
    p = FTE(3)
    assert an.joint_log_density("GinibreFTE", p, [0.6, 0.6j, 0.6 + 0.1j]).sign == 0
    assert an.joint_log_density("GinibreFTE", p, [0.1, 0.1, 0.2j]).sign == 0
    assert an.joint_log_density("InducedGinibre", EnsembleParams.induced(3), [0.1, 0.1, 0.2j]).sign == 0


def test_joint_log_density_induced_example():
    lr = an.joint_log_density("InducedGinibre", EnsembleParams.induced(2, 0.0, 1.0), [0.0, 1.0])
    assert lr.sign == 1 and lr.log_magnitude == pytest.approx(-1.0, abs=1e-15)


def test_joint_density_rejects_products():
    with pytest.raises(ParameterError):
        an.joint_log_density("ProductGinibre", EnsembleParams.product(2, [0.0, 0.0]), [0.1, 0.2])


def test_radial_joint_density_zeros():
    assert an.radial_joint_density("InducedGinibre", EnsembleParams.induced(3, 1.0), [0.0, 0.5, 1.0]) == 0.0
    assert an.radial_joint_density("GinibreFTE", FTE(3), [0.6, 0.6, 0.6]) == 0.0


def test_radial_joint_density_matches_angular_quadrature():
    p = EnsembleParams.induced(2, 0.0, 1.0)
    r1 = r2 = 1.0

    def integrand(phi2, phi1):
        zs = [r1 * complex(math.cos(phi1), math.sin(phi1)), r2 * complex(math.cos(phi2), math.sin(phi2))]
        return float(an.joint_log_density("InducedGinibre", p, zs, include_constants=True))

    ang = integrate.dblquad(integrand, 0, 2 * math.pi, 0, 2 * math.pi, epsabs=0, epsrel=1e-11)[0]
    assert an.radial_joint_density("InducedGinibre", p, [r1, r2]) == pytest.approx(ang * r1 * r2, rel=1e-8)


def test_radial_joint_density_integrates_to_partition_function():
    p = FTE(2, 0.0, 1.0)
    f = lambda r2_, r1: an.radial_joint_density("GinibreFTE", p, [r1, r2_])
    val = integrate.dblquad(f, 0, 1, 0, lambda r1: math.sqrt(max(1 - r1 * r1, 0.0)), epsabs=0, epsrel=1e-10)[0]
    assert val == pytest.approx(math.exp(an.log_partition("GinibreFTE", p)), rel=1e-7)


def test_radial_joint_density_size_cap():
    with pytest.raises(BudgetError):
        an.radial_joint_density("InducedGinibre", EnsembleParams.induced(7), [0.1] * 7)


# -- stability exponents -----------------------------------------------------

def test_stability_peaks():
    assert an.stability_peaks(1) == pytest.approx([-EULER / 2])
    assert an.stability_peaks(2) == pytest.approx([-EULER / 2, (1 - EULER) / 2])
    for N in (3, 8, 30):
        assert np.all(np.diff(an.stability_peaks(N)) > 0)


def test_stability_density_single_eigenvalue():
    p = EnsembleParams.product(1, [0.0])
    assert an.stability_density_finite_M(p, 0.0) == pytest.approx(2.0 / math.e, rel=1e-12)
    mu = np.linspace(-2, 1, 7)
    np.testing.assert_allclose(an.stability_density_finite_M(p, mu), 2 * np.exp(2 * mu - np.exp(2 * mu)), rtol=1e-12)


def test_stability_density_normalisation():
    p = EnsembleParams.product(3, [0.0] * 3)
    f = lambda mu: an.stability_density_finite_M(p, mu)
    total = integrate.quad(f, -6, 3, epsabs=0, epsrel=1e-10, limit=200)[0]
    assert total == pytest.approx(3.0, rel=1e-6)
    g = lambda mu: an.stability_density_finite_M(p, mu, normalized=True)
    assert integrate.quad(g, -6, 3, epsabs=0, epsrel=1e-10, limit=200)[0] == pytest.approx(1.0, rel=1e-6)


def test_stability_density_fixed_trace_peak():
    p = EnsembleParams.mixed(2, [0.0] * 40, 1)
    mu = np.linspace(-0.6, 0.5, 441)
    rho = an.stability_density_finite_M(p, mu)
    peaks = mu[signal.argrelmax(rho)[0]]
    target = -EULER / 2
    assert np.min(np.abs(peaks - target)) < 0.05


# -- limiting densities ------------------------------------------------------

def test_limiting_density_examples():
    assert an.limiting_density("circular", 1, 0.5) == pytest.approx(1 / math.pi)
    assert an.limiting_density("productM", 2, 0.5) == pytest.approx(1 / math.pi)
    assert an.limiting_density("circular", 1, 1.2) == 0.0
    assert an.limiting_density("productM", 3, 1.01j) == 0.0
    # unit mass
    for M in (1, 2, 4):
        f = lambda r: 2 * math.pi * r * an.limiting_density("productM", M, r)
        assert integrate.quad(f, 0, 1)[0] == pytest.approx(1.0, rel=1e-8)
