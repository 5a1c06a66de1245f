import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tzl.geometry import DIAMETER
from tzl.roots import (
    MaxIterationsError,
    aberth_batch,
    find_roots,
    find_roots_batch,
    newton_polygon_guesses,
    relative_residuals,
    residual_check,
    vieta_error,
    zeros_to_csv,
)
from tzl.sampler import sample_sections
from tzl.spectra import compute_spectrum
from tzl.symbols import Constant, DiscIndicator, ExpInverse, PowerVanish


def _match(a, b):
    """Largest distance from a root of a to its nearest root of b (relative)."""
    if len(a) == 0:
        return 0.0
    d = np.abs(a[:, None] - b[None, :]) / np.maximum(1, np.abs(a))[:, None]
    return float(d.min(axis=1).max())


def test_small_examples():
    zs = find_roots([2, -3, 1])
    assert sorted(zs.roots.real) == pytest.approx([1, 2], abs=1e-14)
    assert zs.mult_infinity == 0
    zs = find_roots([-1, 0, 1])
    assert sorted(zs.roots.real) == pytest.approx([-1, 1], abs=1e-14)
    zs = find_roots([2, -3, 1, 0])
    assert zs.mult_infinity == 1 and zs.degree == 3


def test_exact_zero_at_origin_and_infinity():
    zs = find_roots([0, 0, 1, 0, 3, 0])
    assert zs.degree == 5
    assert zs.mult_infinity == 1
    assert np.count_nonzero(zs.roots == 0) == 2
    fs = zs.fs_norms()
    assert fs.size == 5 and np.count_nonzero(fs == DIAMETER) == 1


def test_constant_polynomial():
    zs = find_roots([0, 0, 4.0])
    assert zs.roots.size == 2 and np.all(zs.roots == 0)
    with pytest.raises(ValueError):
        find_roots([0, 0, 0])


def test_roots_of_unity():
    d = 60
    c = np.zeros(d + 1, complex)
    c[0], c[-1] = -1, 1
    zs = find_roots(c)
    assert np.max(np.abs(np.abs(zs.roots) - 1)) < 1e-13
    assert _match(zs.roots, np.exp(2j * np.pi * np.arange(d) / d)) < 1e-13


def test_wilkinson_like_cluster():
    c = np.polynomial.polynomial.polyfromroots(np.arange(1, 13))
    zs = find_roots(c)
    assert _match(np.arange(1, 13).astype(complex), zs.roots) < 1e-6
    assert zs.residual_max < 1e-12


def test_newton_polygon_radii():
    # |q_j| = 10^(-j^2) makes every hull edge distinct, radii 10^(2j+1)
    q = np.array([10.0 ** (-(j * j)) for j in range(5)])
    g = newton_polygon_guesses(q)
    assert np.allclose(sorted(np.log10(np.abs(g))), [1, 3, 5, 7])


@pytest.mark.parametrize("sym", [Constant(1), ExpInverse(), DiscIndicator(0.5), PowerVanish(3)])
@pytest.mark.parametrize("p", [1, 17, 150, 500])
def test_sampled_residuals(sym, p):
    batch = sample_sections(compute_spectrum(sym, p), 21, range(3))
    for i, zs in enumerate(find_roots_batch(batch.coeffs)):
        assert zs.degree == p
        assert residual_check(batch.sample(i), zs) <= 1e-10
        v = vieta_error(batch.sample(i), zs)
        assert math.isnan(v) or v <= 1e-10


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**63), st.integers(1, 80))
def test_root_count_conservation(seed, p):
    batch = sample_sections(compute_spectrum(ExpInverse(), p), seed, [0])
    zs = find_roots_batch(batch.coeffs)[0]
    assert len(zs.roots) + zs.mult_infinity == p


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32), st.integers(2, 60), st.integers(-200, 200))
def test_power_of_two_scaling_invariance(seed, d, k):
    rng = np.random.default_rng(seed)
    c = rng.standard_normal(d + 1) + 1j * rng.standard_normal(d + 1)
    a = find_roots(c).roots
    b = find_roots(np.ldexp(c.real, k) + 1j * np.ldexp(c.imag, k)).roots
    assert _match(a, b) < 1e-9 and _match(b, a) < 1e-9


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32), st.integers(2, 60))
def test_conjugation_equivariance(seed, d):
    rng = np.random.default_rng(seed)
    c = rng.standard_normal(d + 1) + 1j * rng.standard_normal(d + 1)
    a = find_roots(c).roots
    b = find_roots(np.conj(c)).roots
    assert _match(np.conj(a), b) < 1e-9


def test_conjugate_mode_agrees():
    rng = np.random.default_rng(0)
    q = rng.standard_normal((4, 31)) + 1j * rng.standard_normal((4, 31))
    z1, _, ok1 = aberth_batch(q)
    z2, _, ok2 = aberth_batch(q, conjugate=True)
    assert ok1.all() and ok2.all()
    for a, b in zip(z1, z2):
        assert _match(a, b) < 1e-10


def test_iteration_cap_raises_with_partial_result():
    rng = np.random.default_rng(1)
    c = rng.standard_normal(40) + 0j
    with pytest.raises(MaxIterationsError) as info:
        find_roots_batch(c[None, :], max_iter=1)
    assert info.value.roots.size == 39
    assert info.value.residuals.size == 39


def test_relative_residuals_at_exact_roots():
    assert np.all(relative_residuals(np.array([2, -3, 1], complex), np.array([1, 2])) < 1e-15)


def test_zeros_csv():
    text = zeros_to_csv([find_roots([1, 1, 0])], [7])
    lines = text.splitlines()
    assert lines[0] == "trial,re,im,r_fs"
    assert lines[1].startswith("7,-1.0,")
    assert lines[2].startswith("7,inf,inf,")


def test_coalesced_view():
    zs = find_roots(np.polynomial.polynomial.polyfromroots([2, 2, 3]))
    merged = dict((round(z.real), m) for z, m in zs.coalesced(rel=1e-6))
    assert merged == {2: 2, 3: 1}
