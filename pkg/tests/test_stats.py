import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import spence

from tzl.geometry import DIAMETER, disc_volume, fs_cdf_inverse
from tzl.roots import ZeroSet
from tzl.sampler import sample_section
from tzl.spectra import PreconditionError, compute_spectrum
from tzl.stats import (
    DegenerateVarianceError,
    FSDisc,
    LogProfile,
    RadialBump,
    TabulatedPhi,
    all_zeros,
    check_support,
    clt_report,
    dilog,
    expectation_exact,
    expectation_terms,
    fs_histogram,
    g_tilde,
    hole_frequency,
    ks_vs_fs,
    l_integral,
    l_of_phi,
    linear_statistic,
    linear_statistics,
    mass_exact_moments,
    mass_lln_report,
    mass_m,
    mass_samples,
    mass_statistic,
    phi_integral,
    report_from_samples,
    variance_bipotential,
    variance_leading_term,
    zeta3,
)
from tzl.symbols import Constant, DiscIndicator, ExpInverse, PowerVanish

ZETA3 = 1.2020569031595942854


def test_zeta3():
    assert zeta3() == pytest.approx(ZETA3, rel=1e-15)


@settings(max_examples=200)
@given(st.floats(0, 1))
def test_dilog_against_spence(x):
    # scipy's spence(z) is Li_2(1 - z)
    assert dilog(x) == pytest.approx(float(spence(1 - x)), abs=2e-15)


def test_g_tilde_values():
    assert g_tilde(1.0) == pytest.approx(1 / 24, rel=1e-15)
    assert g_tilde(0.0) == 0
    t = 0.3
    assert g_tilde(t) == pytest.approx(sum(t ** (2 * j) / j**2 for j in range(1, 80)) / (4 * math.pi**2), rel=1e-15)


@pytest.mark.parametrize("rho0", [0.4, 1.0, 2.5])
def test_bump_laplacian_two_routes(rho0):
    phi = RadialBump(rho0, 1.3)
    rho = np.linspace(0, 1.2 * rho0, 97)
    a = l_of_phi(phi, rho, "analytic")
    b = l_of_phi(phi, rho, "fd")
    assert np.max(np.abs(a - b)) <= 1e-6 * np.max(np.abs(a))


def test_log_profile_l_is_constant():
    assert np.allclose(l_of_phi(LogProfile(), np.array([0, 0.3, 1, 7])), 2 * math.pi, rtol=1e-14)


def test_compact_support_l_integrates_to_zero():
    assert abs(l_integral(RadialBump(0.9))) <= 1e-12


def test_bump_integral_closed_form():
    # int phi omega = int_0^{rho0} (1 - s)^4 d(rho^2/(1+rho^2)); check against a fine sum
    phi = RadialBump(1.0)
    u = (np.arange(200000) + 0.5) / 200000 * 0.5
    assert phi_integral(phi) == pytest.approx(np.mean(phi.of_area(u)) * 0.5, rel=1e-8)


def test_tabulated_phi_follows_bump():
    bump = RadialBump(1.0)
    r = np.linspace(0, 1, 201)
    tab = TabulatedPhi(tuple(r), tuple(bump.value(r)))
    x = np.linspace(0, 0.95, 40)
    assert np.max(np.abs(tab.value(x) - bump.value(x))) < 1e-6
    assert tab.support_radius == 1.0
    with pytest.raises(ValueError):
        TabulatedPhi((0.1, 0.2, 0.3), (1, 1, 1))


def test_linear_statistic_counts_infinity():
    zs = ZeroSet(np.array([0.0, 0.5 + 0.5j]), 2, 0.0)
    assert linear_statistic(zs, RadialBump(1.0)) == pytest.approx(1 + 0.5**4, rel=1e-15)
    assert linear_statistic(zs, LogProfile()) == math.inf


def test_expectation_constant_symbol_is_first_term():
    # log T^2(z, z) = log(p + 1) is constant and int L(phi) omega = 0
    s = compute_spectrum(Constant(1), 30)
    a, b = expectation_terms(s, RadialBump(0.8))
    assert abs(b) <= 1e-11
    assert expectation_exact(s, RadialBump(0.8)) == pytest.approx(30 * phi_integral(RadialBump(0.8)), rel=1e-12)


def test_expectation_against_simulation():
    s = compute_spectrum(ExpInverse(), 12)
    phi = RadialBump(1.5)
    _, z = all_zeros(s, 77, 3000)
    x = linear_statistics(z, phi)
    se = x.std(ddof=1) / math.sqrt(x.size)
    assert abs(x.mean() - expectation_exact(s, phi)) <= 4 * se


def test_variance_bipotential_resolution_and_simulation():
    s = compute_spectrum(Constant(1), 10)
    phi = RadialBump(1.0)
    v = variance_bipotential(s, phi)["value"]
    v2 = variance_bipotential(s, phi, panels=24, order=12)["value"]
    assert v == pytest.approx(v2, rel=1e-5)
    _, z = all_zeros(s, 5, 6000)
    rep = report_from_samples(linear_statistics(z, phi))
    assert abs(rep.variance - v) <= 4 * rep.variance_std_error


def test_variance_leading_term_positive():
    phi = RadialBump(1.0)
    assert variance_leading_term(phi) > 0
    s = compute_spectrum(Constant(1), 40)
    ratio = 40 * variance_bipotential(s, phi)["value"] / variance_leading_term(phi)
    assert 0.6 < ratio < 1.0


def test_support_precondition():
    with pytest.raises(PreconditionError):
        check_support(PowerVanish(1), RadialBump(1.0))
    with pytest.raises(PreconditionError):
        check_support(Constant(1), LogProfile())
    with pytest.raises(PreconditionError):
        clt_report(compute_spectrum(Constant(1), 5), RadialBump(1.0), trials=10, seed=0)


def test_degenerate_report():
    with pytest.raises(DegenerateVarianceError):
        report_from_samples(np.ones(50))


def test_report_csv_and_determinism():
    s = compute_spectrum(Constant(1), 8)
    a = clt_report(s, RadialBump(1.0), 1000, seed=3)
    b = clt_report(s, RadialBump(1.0), 1000, seed=3)
    assert a.to_csv() == b.to_csv()
    assert a.to_csv().splitlines()[0] == "trial,Z,Z_standardized"
    assert abs(np.mean(a.standardized())) < 1e-12


def test_histogram_counts_and_density():
    s = compute_spectrum(Constant(1), 12)
    _, zs = all_zeros(s, 0, 200)
    h = fs_histogram(zs, bins=25)
    assert h.total == 200 * 12
    assert float(np.dot(h.density, np.diff(h.edges))) == pytest.approx(1.0, rel=1e-12)
    assert h.edges[-1] == DIAMETER


def test_histogram_puts_infinity_in_last_bin():
    h = fs_histogram([ZeroSet(np.array([0.0]), 1, 0.0)], bins=4)
    assert list(h.counts) == [1, 0, 0, 1]


def test_ks_on_exact_fs_sample():
    rng = np.random.default_rng(0)
    r = fs_cdf_inverse(rng.random(20000))
    assert ks_vs_fs(r) < 0.015
    assert ks_vs_fs(r, upper=0.4, conditional=True) < 0.02


def test_fs_disc():
    d = FSDisc.chart(2.0)
    assert d.volume == pytest.approx(disc_volume(2.0), rel=1e-14)
    assert d.hits(ZeroSet(np.array([1.9 + 0j]), 0, 0.0))
    assert not d.hits(ZeroSet(np.array([2.1 + 0j]), 0, 0.0))
    assert not d.hits(ZeroSet(np.zeros(0, complex), 3, 0.0))
    assert FSDisc.whole().hits(ZeroSet(np.zeros(0, complex), 1, 0.0))


def test_hole_frequency_edge_cases():
    rep = hole_frequency(Constant(1), FSDisc.whole(), [3], 50, 0)
    assert rep.frequencies()[0] == 0
    with pytest.raises(PreconditionError):
        hole_frequency(Constant(1), FSDisc(0j, 0.0), [3], 10, 0)


def test_mass_statistic_exact_with_fixed_draws():
    # with eta fixed, orthogonality gives Y = p^-1 sum |eta_j|^2 lambda_j^2 m_j(g)
    p = 9
    s = compute_spectrum(ExpInverse(), p)
    g = DiscIndicator(1.2)
    eta = np.exp(1j * np.arange(p + 1)) * np.linspace(0.5, 2.0, p + 1)
    y = mass_statistic(sample_section(s, 0, 0, eta=eta), g)
    expect = math.fsum(np.abs(eta) ** 2 * s.lambdas**2 * mass_m(s, g)) / p
    assert y == pytest.approx(expect, rel=1e-12)


def test_mass_moments_constant():
    for p in (1, 10, 77):
        mean, var = mass_exact_moments(compute_spectrum(Constant(1), p), Constant(1))
        assert mean == pytest.approx((p + 1) / p, rel=1e-13)
        assert var == pytest.approx((p + 1) / p**2, rel=1e-13)


def test_mass_moments_against_simulation():
    s = compute_spectrum(PowerVanish(1), 10)
    g = Constant(1)
    mean, var = mass_exact_moments(s, g)
    y = mass_samples(s, g, 3000, seed=8)
    assert abs(y.mean() - mean) <= 3 * math.sqrt(var / y.size)


def test_mass_lln_report_fields():
    rep = mass_lln_report(Constant(1), Constant(1), 12, seed=0)
    assert rep["p"].tolist() == list(range(1, 13))
    assert rep["running_average"][-1] == pytest.approx(rep["average"])
    assert rep["target"] == pytest.approx(1.0, rel=1e-13)
