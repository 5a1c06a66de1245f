"""Orthonormal monomial basis of H^0(CP^1, O(p)) and pointwise h_p norms.

S_j(z) = sqrt((p + 1) C(p, j)) z^j, j = 0..p, is orthonormal for the L^2
product built from the FS metric on O(p) and the unit-mass FS area.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import gammaln

from .geometry import ChartPoint

P_MAX = 500
EXACT_P_MAX = 60


def check_degree(p: int) -> int:
    if int(p) != p or p < 0:
        raise ValueError(f"degree must be a nonnegative integer, got {p!r}")
    if p > P_MAX:
        raise ValueError(f"degree {p} exceeds the supported maximum {P_MAX}")
    return int(p)


def log_binom(n, k):
    """log C(n, k) via log-gamma; vectorised over k."""
    k = np.asarray(k, dtype=float)
    return gammaln(n + 1.0) - gammaln(k + 1.0) - gammaln(n - k + 1.0)


def log_basis_weight(p: int) -> np.ndarray:
    """log((p + 1) C(p, j)) for j = 0..p."""
    p = check_degree(p)
    j = np.arange(p + 1)
    if p <= EXACT_P_MAX:
        return np.array([math.log((p + 1) * math.comb(p, int(i))) for i in j])
    return math.log(p + 1) + log_binom(p, j)


def basis_norm_coeff(p: int, j: int) -> float:
    """sqrt((p + 1) C(p, j)), the normalising constant of S_j."""
    p = check_degree(p)
    if not 0 <= j <= p:
        raise ValueError(f"basis index {j} outside 0..{p}")
    if p <= EXACT_P_MAX:
        return math.sqrt((p + 1) * math.comb(p, j))
    return math.exp(0.5 * (math.log(p + 1) + float(log_binom(p, j))))


def log_hp_weight(p: int, z: complex) -> float:
    """log of the O(p) metric factor (1 + |z|^2)^(-p)."""
    return -p * math.log1p(abs(z) ** 2)


def pointwise_hp_norm(coeffs, z) -> float:
    """|sum c_j z^j| / (1 + |z|^2)^(p/2) with p = len(coeffs) - 1.

    At infinity the value is |c_p|. For |z| > 1 the reversed polynomial is
    evaluated in 1/z so that no power of z overflows.
    """
    c = np.asarray(coeffs, dtype=complex)
    p = len(c) - 1
    pt = ChartPoint.of(z)
    if pt.at_infinity:
        return float(abs(c[-1]))
    zz = pt.z
    r = abs(zz)
    if r <= 1.0:
        val = np.polynomial.polynomial.polyval(zz, c)
        return float(abs(val) / (1.0 + r * r) ** (0.5 * p))
    w = 1.0 / zz
    val = np.polynomial.polynomial.polyval(w, c[::-1])
    # |sum c_j z^j| = |z|^p |sum c_j w^(p-j)|, and |z|^p / (1+|z|^2)^(p/2) = (1 + |w|^2)^(-p/2)
    return float(abs(val) / (1.0 + abs(w) ** 2) ** (0.5 * p))


def bergman_diag(p: int, z) -> float:
    """Diagonal of the Bergman kernel sum_j |S_j(z)|^2_{h_p}; identically p + 1."""
    p = check_degree(p)
    pt = ChartPoint.of(z)
    if pt.at_infinity:
        return float(p + 1)
    r2 = abs(pt.z) ** 2
    j = np.arange(p + 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        logs = log_basis_weight(p) + np.where(j > 0, j * np.log(r2), 0.0) - p * math.log1p(r2)
    return float(math.fsum(np.exp(logs)))


def bergman_kernel(p: int, z: complex, w: complex) -> complex:
    """P_p(z, w) = sum_j S_j(z) conj(S_j(w)) times the metric factors at z and w."""
    p = check_degree(p)
    j = np.arange(p + 1)
    zw = z * np.conj(w)
    weights = np.exp(log_basis_weight(p) - 0.5 * p * (math.log1p(abs(z) ** 2) + math.log1p(abs(w) ** 2)))
    return complex(np.sum(weights * zw ** j))
