import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tzl.geometry import (
    DIAMETER,
    SQRT_PI,
    ChartPoint,
    disc_volume,
    fs_cdf,
    fs_cdf_inverse,
    fs_density,
    fs_distance,
    fs_norm,
    geodesic_length,
    mobius_translate,
)
from tzl.quadrature import QuadratureSpec, integrate

coord = st.floats(-50, 50, allow_nan=False)
points = st.builds(complex, coord, coord)


def test_fs_norm_values():
    assert fs_norm(0) == 0
    assert fs_norm(1) == pytest.approx(0.443113462726379, abs=1e-14)
    assert fs_norm(ChartPoint.infinity()) == pytest.approx(0.886226925452758, abs=1e-14)


def test_density_and_cdf_values():
    assert fs_density(0.0) == 0
    assert fs_density(SQRT_PI / 4) == pytest.approx(1.772453850905516, abs=1e-14)
    assert fs_density(DIAMETER) == pytest.approx(0, abs=1e-14)
    assert fs_cdf(0.0) == 0
    assert fs_cdf(SQRT_PI / 4) == pytest.approx(0.5, abs=1e-15)
    assert fs_cdf(DIAMETER) == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize("bad", [-1e-3, DIAMETER + 1e-6])
def test_out_of_range_radius_rejected(bad):
    with pytest.raises(ValueError):
        fs_density(bad)
    with pytest.raises(ValueError):
        fs_cdf(bad)


def test_density_integrates_to_one():
    res = integrate(fs_density, 0.0, DIAMETER, QuadratureSpec(rtol=1e-14))
    assert abs(res.value - 1) <= 1e-12


def test_cdf_derivative_is_density():
    r = np.linspace(0.05, DIAMETER - 0.05, 17)
    h = 1e-5
    fd = (fs_cdf(r + h) - fs_cdf(r - h)) / (2 * h)
    assert np.max(np.abs(fd - fs_density(r))) <= 1e-6


def test_cdf_inverse_roundtrip():
    u = np.linspace(0, 1, 101)
    assert np.max(np.abs(fs_cdf(fs_cdf_inverse(u)) - u)) <= 1e-14


def test_disc_volume():
    assert disc_volume(0) == 0
    assert disc_volume(1) == 0.5
    assert disc_volume(4) == pytest.approx(16 / 17, abs=1e-15)
    with pytest.raises(ValueError):
        disc_volume(-1)


@given(st.floats(0, 1e6, allow_nan=False))
def test_volume_matches_cdf_of_norm(r):
    assert abs(disc_volume(r) - fs_cdf(fs_norm(r))) <= 1e-12


def test_distance_examples():
    w = 0.3 - 1.2j
    assert fs_distance(0, w) == pytest.approx(fs_norm(w), abs=1e-15)
    assert fs_distance(1, 1) == 0
    assert fs_distance(0, ChartPoint.infinity()) == pytest.approx(DIAMETER, abs=1e-15)


def test_distance_to_pole_matches_geodesic_integration():
    # ray from 0 towards infinity, reparametrised so the arc length is spread evenly
    top = math.atan(50.0)
    length = geodesic_length(lambda t: np.tan(t * top) + 0j)
    tail = (math.pi / 2 - top) / SQRT_PI
    assert length + tail == pytest.approx(DIAMETER, rel=1e-8)


def test_two_point_formula_matches_geodesic():
    # the geodesic between z and w is the Mobius image of a radial segment
    z, w = 0.4 + 0.2j, -1.1 + 0.7j
    u = (w - z) / (1 + z.conjugate() * w)
    assert mobius_translate(z, u) == pytest.approx(w, abs=1e-14)
    length = geodesic_length(lambda t: mobius_translate(z, t * u))
    assert length == pytest.approx(fs_distance(z, w), rel=1e-8)


@settings(max_examples=200)
@given(points, points, points)
def test_triangle_inequality(a, b, c):
    assert fs_distance(a, c) <= fs_distance(a, b) + fs_distance(b, c) + 1e-12


@given(points, points)
def test_distance_symmetric_bounded(a, b):
    d = fs_distance(a, b)
    assert d == pytest.approx(fs_distance(b, a), abs=1e-14)
    assert 0 <= d <= DIAMETER + 1e-15


def test_chart_point_tagged():
    with pytest.raises(ValueError):
        ChartPoint(float("nan"), 0.0)
    assert ChartPoint.of(2 + 1j).z == 2 + 1j
