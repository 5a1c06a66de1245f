import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tzl.spectra import (
    PreconditionError,
    compute_spectrum,
    expinv_lambda_max_alternating,
    min_eig_asymptotics,
    spectral_cdf_compare,
    spectral_summary,
    spectrum_indicator,
    spectrum_power,
    spectrum_quadrature,
    toeplitz_matrix_general,
    weyl_monotonicity_check,
)
from tzl.symbols import (
    Constant,
    DiscIndicator,
    ExpInverse,
    GeneralGrid,
    PowerVanish,
    RadialTabulated,
    Scaled,
    parse_symbol,
)

# mpmath, 30 digits: ExpInverse at p = 6
EXPINV_P6 = {0: 0.0245273801267186115586, 3: 0.374787658658429961503, 6: 0.860282850885662230452}


def test_power_closed_form_examples():
    assert np.allclose(spectrum_power(3, 1).lambdas, [0.2, 0.4, 0.6, 0.8], rtol=1e-15)
    assert np.allclose(spectrum_power(2, 2).lambdas, [0.1, 0.3, 0.6], rtol=1e-14)


def test_disc_examples():
    s = spectrum_indicator(1, 1.0)
    assert s.lambdas == pytest.approx([0.75, 0.25], abs=1e-15)
    # lambda_0 = 1 - (1 - Vol)^(p+1)
    s = spectrum_indicator(4, 0.5)
    assert s.lambdas[0] == pytest.approx(1 - 0.8**5, rel=1e-14)
    assert s.lambdas[-1] == pytest.approx(0.2**5, rel=1e-13)


@pytest.mark.parametrize("j", sorted(EXPINV_P6))
def test_expinv_against_mpmath(j):
    lam = compute_spectrum(ExpInverse(), 6).lambdas[j]
    assert lam == pytest.approx(EXPINV_P6[j], rel=1e-13)


@pytest.mark.parametrize("p", [0, 1, 7, 40, 200])
def test_expinv_lambda_max_two_routes(p):
    assert expinv_lambda_max_alternating(p) == pytest.approx(compute_spectrum(ExpInverse(), p).lambda_max, rel=1e-12)


@pytest.mark.parametrize("sym", [PowerVanish(1), PowerVanish(3), ExpInverse(), DiscIndicator(1.3)])
@pytest.mark.parametrize("p", [0, 5, 33])
def test_closed_form_matches_quadrature(sym, p):
    a = compute_spectrum(sym, p).lambdas
    b = spectrum_quadrature(p, sym).lambdas
    assert np.max(np.abs(a - b) / np.maximum(a, 1e-300)) <= 1e-10


def test_dense_matches_radial_and_nonradial_runs():
    p = 8
    a = np.sort(compute_spectrum(PowerVanish(2), p).lambdas)
    b = np.sort(toeplitz_matrix_general(p, PowerVanish(2))[1].lambdas)
    assert np.max(np.abs(a - b)) <= 1e-10
    half = GeneralGrid(lambda z: (z.real > 0).astype(float), name="half-plane")
    mat, spec = toeplitz_matrix_general(p, half)
    assert np.allclose(mat, mat.conj().T)
    assert math.fsum(spec.lambdas) == pytest.approx((p + 1) / 2, rel=1e-8)
    assert spec.lambda_min >= 0 and spec.lambda_max <= 1 + 1e-12


@settings(max_examples=30, deadline=None)
@given(
    st.sampled_from(["const:2", "power:1", "power:4", "expinv", "disc:0.4", "disc:3", "tab:0,1;1,0.2;4,0.7"]),
    st.integers(0, 120),
)
def test_trace_identity(text, p):
    assert spectral_summary(compute_spectrum(parse_symbol(text), p))["rel_error"] <= 1e-9


@settings(max_examples=30, deadline=None)
@given(st.floats(0.05, 5), st.floats(0.05, 5), st.integers(0, 80))
def test_weyl_monotone_discs(r1, r2, p):
    lo, hi = sorted((r1, r2))
    assert weyl_monotonicity_check(DiscIndicator(lo), DiscIndicator(hi), p)["holds"]


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4), st.integers(0, 60))
def test_weyl_monotone_powers(k1, k2, p):
    lo, hi = max(k1, k2), min(k1, k2)  # u^a <= u^b when a >= b
    assert weyl_monotonicity_check(PowerVanish(lo), PowerVanish(hi), p)["holds"]


def test_weyl_precondition():
    with pytest.raises(PreconditionError):
        weyl_monotonicity_check(DiscIndicator(2.0), DiscIndicator(1.0), 5)


def test_eigenvalues_in_symbol_range():
    for sym in (ExpInverse(), DiscIndicator(0.7), Scaled(PowerVanish(2), 3.0)):
        lam = compute_spectrum(sym, 50).lambdas
        assert lam.min() >= 0 and lam.max() <= sym.sup() * (1 + 1e-14)


def test_power_min_second_order_coefficient():
    # p^2 (lambda_min p^k / k! - 1 + k(k+3)/(2p)) tends to 4, 19, 55 for k = 1, 2, 3
    for k, h2 in ((1, 4.0), (2, 19.0), (3, 55.0)):
        row = min_eig_asymptotics(PowerVanish(k), [500])[0]
        assert row["deviation_corrected"] * 500**2 == pytest.approx(h2, rel=0.02)


def test_disc_min_ratio_exact():
    for row in min_eig_asymptotics(DiscIndicator(0.8), [1, 10, 100]):
        assert row["ratio"] == pytest.approx(1.0, rel=1e-12)


def test_expinv_lower_bound():
    assert all(r["bound_holds"] for r in min_eig_asymptotics(ExpInverse(), [1, 4, 25, 100, 400]))


def test_szego_counting():
    for row in spectral_cdf_compare(DiscIndicator(1.0), 200, thresholds=[0.5]):
        assert row["fraction"] == pytest.approx(row["volume"], abs=0.02)


def test_underflow_tracked_in_logs():
    s = compute_spectrum(DiscIndicator(0.01), 500)
    assert s.underflow
    assert np.all(np.isfinite(s.log_lambdas))
    assert s.log_lambdas[-1] == pytest.approx(501 * math.log(1e-4 / (1 + 1e-4)), rel=1e-12)


@pytest.mark.parametrize("bad", ["", "power:1.5", "power:0", "disc:-1", "const:-1", "foo", "expinv:2"])
def test_parse_symbol_rejects(bad):
    with pytest.raises(ValueError):
        parse_symbol(bad)


def test_degree_checks():
    with pytest.raises(ValueError):
        compute_spectrum(Constant(1), 501)
    with pytest.raises(ValueError):
        compute_spectrum(Constant(1), -1)


def test_tabulated_symbol():
    s = RadialTabulated((0.0, 1.0), (1.0, 0.0))
    assert s.of_radius(np.array([0.5, 2.0])) == pytest.approx([0.5, 0.0])
    with pytest.raises(ValueError):
        RadialTabulated((1.0, 0.5), (1.0, 1.0))
