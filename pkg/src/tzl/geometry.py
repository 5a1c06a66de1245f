"""Fubini-Study geometry of the Riemann sphere in the affine chart z in C.

The FS volume form is normalised to total mass 1, so in the chart
``dV = dx dy / (pi (1 + |z|^2)^2)``. Distances are geodesic distances of the
metric whose Kahler form is that volume form; the diameter is sqrt(pi)/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

SQRT_PI = math.sqrt(math.pi)
DIAMETER = 0.5 * SQRT_PI


@dataclass(frozen=True)
class ChartPoint:
    """A point of CP^1: either a finite chart coordinate or the point at infinity."""

    re: float = 0.0
    im: float = 0.0
    at_infinity: bool = False

    def __post_init__(self):
        if not self.at_infinity and not (math.isfinite(self.re) and math.isfinite(self.im)):
            raise ValueError("finite chart point needs finite coordinates")
        if self.at_infinity and (self.re != 0.0 or self.im != 0.0):
            raise ValueError("point at infinity carries no chart coordinates")

    @classmethod
    def infinity(cls) -> "ChartPoint":
        return cls(at_infinity=True)

    @classmethod
    def of(cls, z) -> "ChartPoint":
        if isinstance(z, ChartPoint):
            return z
        z = complex(z)
        return cls(z.real, z.imag)

    @property
    def z(self) -> complex:
        if self.at_infinity:
            raise ValueError("point at infinity has no chart coordinate")
        return complex(self.re, self.im)


def _point(z) -> ChartPoint:
    return ChartPoint.of(z)


def fs_norm(z) -> float:
    """FS distance from the origin: arctan|z| / sqrt(pi), sqrt(pi)/2 at infinity."""
    pt = _point(z)
    if pt.at_infinity:
        return DIAMETER
    return math.atan(abs(pt.z)) / SQRT_PI


def fs_norm_array(z) -> np.ndarray:
    """Vectorised ``fs_norm`` for complex arrays (inf entries map to the pole)."""
    return np.arctan(np.abs(np.asarray(z))) / SQRT_PI


def _check_radius(r: float) -> None:
    if not (0.0 <= r <= DIAMETER * (1 + 1e-15)):
        raise ValueError(f"FS radius {r!r} outside [0, sqrt(pi)/2]")


def fs_density(r):
    """Density of the FS area in the FS radius: sqrt(pi) sin(2 sqrt(pi) r)."""
    arr = np.asarray(r, dtype=float)
    if np.any(arr < 0) or np.any(arr > DIAMETER * (1 + 1e-15)):
        raise ValueError("FS radius outside [0, sqrt(pi)/2]")
    out = SQRT_PI * np.sin(2.0 * SQRT_PI * arr)
    return float(out) if out.ndim == 0 else out


def fs_cdf(r):
    """Area fraction of the FS ball of radius r about the origin: sin^2(sqrt(pi) r)."""
    arr = np.asarray(r, dtype=float)
    if np.any(arr < 0) or np.any(arr > DIAMETER * (1 + 1e-15)):
        raise ValueError("FS radius outside [0, sqrt(pi)/2]")
    out = np.sin(SQRT_PI * np.minimum(arr, DIAMETER)) ** 2
    return float(out) if out.ndim == 0 else out


def fs_cdf_inverse(u):
    """Inverse of ``fs_cdf`` on [0, 1]."""
    u = np.asarray(u, dtype=float)
    return np.arcsin(np.sqrt(np.clip(u, 0.0, 1.0))) / SQRT_PI


def disc_volume(r: float) -> float:
    """FS volume r^2 / (1 + r^2) of the chart disc |z| < r."""
    if r < 0:
        raise ValueError("disc radius must be nonnegative")
    if math.isinf(r):
        return 1.0
    r2 = r * r
    return r2 / (1.0 + r2)


def fs_distance(z, w) -> float:
    """Geodesic distance between two points of CP^1.

    Uses the SU(2)-invariant chordal form arctan(|z - w| / |1 + conj(z) w|) / sqrt(pi);
    at infinity the ratio degenerates to 1/|other| (or 0 for two poles).
    """
    a, b = _point(z), _point(w)
    if a.at_infinity and b.at_infinity:
        return 0.0
    if a.at_infinity or b.at_infinity:
        other = b if a.at_infinity else a
        zz = other.z
        return (0.5 * math.pi - math.atan(abs(zz))) / SQRT_PI
    zz, ww = a.z, b.z
    return math.atan2(abs(zz - ww), abs(1.0 + zz.conjugate() * ww)) / SQRT_PI


def geodesic_length(path, n: int = 2000) -> float:
    """Length of a chart path t -> path(t), t in [0, 1], in the FS metric.

    The line element is ds = |dz| / (sqrt(pi) (1 + |z|^2)); integrated with
    a composite Gauss-Legendre rule on a central-difference derivative.
    """
    from .quadrature import composite_nodes

    t, w = composite_nodes(np.linspace(0.0, 1.0, n // 16 + 1), 16)
    h = 1e-6
    z = path(t)
    dz = (path(np.clip(t + h, 0, 1)) - path(np.clip(t - h, 0, 1))) / (np.clip(t + h, 0, 1) - np.clip(t - h, 0, 1))
    return float(np.dot(w, np.abs(dz) / (1.0 + np.abs(z) ** 2)) / SQRT_PI)


def mobius_translate(z: complex, u: complex) -> complex:
    """Image of u under the SU(2) isometry sending 0 to z: (z + u) / (1 - conj(z) u)."""
    return (z + u) / (1.0 - z.conjugate() * u)
