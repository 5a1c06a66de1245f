import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tzl.geometry import SQRT_PI, fs_distance
from tzl.sampler import (
    TrialStreams,
    kernel_gaussian_decay_check,
    log_normalized_kernel,
    normalized_kernel,
    sample_section,
    sample_sections,
    t2_diag,
)
from tzl.spectra import ToeplitzSpectrum, compute_spectrum
from tzl.symbols import Constant, DiscIndicator, ExpInverse, PowerVanish


def test_same_seed_same_draws():
    s = compute_spectrum(ExpInverse(), 40)
    a = sample_sections(s, 11, range(5))
    b = sample_sections(s, 11, range(5))
    assert np.array_equal(a.coeffs, b.coeffs)
    assert np.array_equal(a.scale_exponents, b.scale_exponents)


def test_trial_stream_independent_of_batch():
    s = compute_spectrum(PowerVanish(2), 25)
    batch = sample_sections(s, 4, [3, 8, 1])
    single = sample_section(s, 4, 8)
    assert np.array_equal(batch.sample(1).coeffs, single.coeffs)


def test_different_seeds_differ():
    s = compute_spectrum(Constant(1), 10)
    assert not np.array_equal(sample_section(s, 1, 0).coeffs, sample_section(s, 2, 0).coeffs)


def test_gaussian_moments():
    eta = TrialStreams(123, np.arange(4000)).complex_normal(8)
    assert abs(np.mean(eta)) < 0.02
    assert np.mean(np.abs(eta) ** 2) == pytest.approx(1.0, abs=0.02)
    assert abs(np.mean(eta**2)) < 0.02


def test_override_draws_give_exact_coefficients():
    s = compute_spectrum(PowerVanish(1), 3)
    smp = sample_section(s, 0, 0, eta=np.ones(4))
    expect = s.lambdas * np.sqrt([4 * math.comb(3, j) for j in range(4)])
    assert np.allclose(smp.true_coeffs, expect, rtol=1e-15)
    assert 0.5 <= np.abs(smp.coeffs).max() < 1


def test_tiny_eigenvalues_scaled_not_lost():
    s = compute_spectrum(DiscIndicator(1e-3), 200)
    smp = sample_section(s, 5, 0)
    assert np.all(np.isfinite(smp.coeffs))
    assert 0.5 <= np.abs(smp.coeffs).max() < 1


def test_csv_roundtrip_shape():
    text = sample_sections(compute_spectrum(Constant(1), 2), 0, [0, 1]).to_csv()
    assert text.splitlines()[0] == "trial,j,re,im,scale_exponent"
    assert len(text.splitlines()) == 1 + 2 * 3


@given(st.integers(0, 300), st.floats(0, 30))
def test_t2_constant_symbol(p, r):
    assert t2_diag(compute_spectrum(Constant(1), p), complex(r, 0)) == pytest.approx(p + 1, rel=1e-10)


@settings(max_examples=50)
@given(st.integers(1, 200), st.complex_numbers(max_magnitude=5), st.complex_numbers(max_magnitude=5))
def test_constant_kernel_closed_form(p, z, w):
    # for f = 1 the normalised kernel is cos(sqrt(pi) d)^p
    s = compute_spectrum(Constant(1), p)
    expect = math.cos(SQRT_PI * fs_distance(z, w)) ** p
    got = math.exp(float(log_normalized_kernel(s, z, w)))
    assert got == pytest.approx(expect, rel=1e-9, abs=1e-13)


def test_normalized_kernel_bounds():
    s = compute_spectrum(ExpInverse(), 30)
    kv = normalized_kernel(s, 0.3, 0.3)
    assert kv.normalized == 1.0
    kv = normalized_kernel(s, 0.3, 2.0 - 1j)
    assert 0 <= kv.normalized <= 1


def test_kernel_vanishing_diagonal_rejected():
    # lambda_0 = 0 makes T^2(0, 0) vanish
    s = ToeplitzSpectrum(2, np.array([0.0, 0.5, 1.0]), Constant(1), "test")
    with pytest.raises(ValueError):
        normalized_kernel(s, 0.0, 1.0)


def test_gaussian_decay_check_shape():
    out = kernel_gaussian_decay_check(Constant(1), [50, 200])
    assert all(abs(r["ratio"] - 1) < 0.05 for r in out["near"])
    assert all(r["holds"] for r in out["far"])
