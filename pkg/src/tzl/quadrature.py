"""Deterministic integration engines.

Gauss-Legendre nodes are generated once per order by Newton iteration on the
Legendre recurrence. ``integrate`` is a globally adaptive panel scheme: each
panel is estimated with one Gauss-Legendre rule on the whole panel and on its
two halves, the panel with the largest error estimate is bisected until the
summed estimate meets ``max(atol, rtol * |value|)``.

``adaptive_simpson`` is a second, unrelated rule kept as a cross-check.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

Integrand = Callable[[np.ndarray], np.ndarray]


class QuadratureError(RuntimeError):
    """Raised when an integral cannot reach its tolerance and ``strict`` is set."""

    def __init__(self, message: str, value: float, achieved_tol: float):
        super().__init__(message)
        self.value = value
        self.achieved_tol = achieved_tol


@lru_cache(maxsize=None)
def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].

    Roots are polished by Newton's method on P_n starting from the
    Tricomi approximation, so no tabulated values are needed.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    k = np.arange(1, n + 1, dtype=float)
    x = np.cos(np.pi * (k - 0.25) / (n + 0.5))
    for _ in range(100):
        p0 = np.ones_like(x)
        p1 = x.copy()
        for m in range(2, n + 1):
            p0, p1 = p1, ((2 * m - 1) * x * p1 - (m - 1) * p0) / m
        dp = n * (x * p1 - p0) / (x * x - 1.0)
        dx = p1 / dp
        x = x - dx
        if np.max(np.abs(dx)) < 1e-16:
            break
    # final derivative at the converged nodes
    p0 = np.ones_like(x)
    p1 = x.copy()
    for m in range(2, n + 1):
        p0, p1 = p1, ((2 * m - 1) * x * p1 - (m - 1) * p0) / m
    dp = n * (x * p1 - p0) / (x * x - 1.0)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    order = np.argsort(x)
    x, w = x[order], w[order]
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gl_rule(f: Integrand, a: float, b: float, n: int = 32) -> float:
    """Single-panel Gauss-Legendre estimate of the integral of f over [a, b]."""
    x, w = gauss_legendre(n)
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    return float(half * np.dot(w, f(mid + half * x)))


def composite_nodes(edges: Sequence[float], n: int = 16) -> tuple[np.ndarray, np.ndarray]:
    """Nodes/weights of a composite Gauss-Legendre rule on the given panel edges."""
    x, w = gauss_legendre(n)
    edges = np.asarray(edges, dtype=float)
    a, b = edges[:-1, None], edges[1:, None]
    half = 0.5 * (b - a)
    nodes = (0.5 * (a + b) + half * x).ravel()
    weights = (half * w).ravel()
    return nodes, weights


@dataclass
class QuadratureSpec:
    """How to integrate: rule order, tolerances, domain transform and breakpoints.

    ``domain`` is ``"unit_interval"`` for finite [a, b] or ``"half_line"`` for
    [a, inf) mapped through t = a + s * u / (1 - u).
    """

    n: int = 24
    rtol: float = 1e-12
    atol: float = 0.0
    max_panels: int = 4000
    domain: str = "unit_interval"
    breakpoints: list[float] = field(default_factory=list)
    half_line_scale: float = 1.0
    strict: bool = False

    def __post_init__(self):
        if self.rtol < 0 or self.atol < 0 or (self.rtol == 0 and self.atol == 0):
            raise ValueError("need a positive tolerance")
        if self.domain not in ("unit_interval", "half_line"):
            raise ValueError(f"unknown domain transform {self.domain!r}")


@dataclass
class QuadResult:
    value: float
    achieved_tol: float
    panels: int
    converged: bool


def _panel(f: Integrand, a: float, b: float, n: int, whole: float | None = None) -> tuple[float, float, float, float]:
    """Two-half estimate on [a, b] and its difference from the one-panel estimate.

    All nodes go through f in a single vectorised call; ``whole`` lets a
    refined panel reuse the half estimate already computed by its parent.
    """
    x, w = gauss_legendre(n)
    m = 0.5 * (a + b)
    hh = 0.25 * (b - a)
    nodes = [0.5 * (a + m) + hh * x, 0.5 * (m + b) + hh * x]
    if whole is None:
        nodes.append(m + 2 * hh * x)
    vals = np.asarray(f(np.concatenate(nodes)), dtype=float)
    left = float(hh * np.dot(w, vals[:n]))
    right = float(hh * np.dot(w, vals[n : 2 * n]))
    if whole is None:
        whole = float(2 * hh * np.dot(w, vals[2 * n :]))
    return left + right, abs(left + right - whole), left, right


def integrate(f: Integrand, a: float, b: float = math.inf, spec: QuadratureSpec | None = None) -> QuadResult:
    """Adaptively integrate a vectorised integrand over [a, b].

    Breakpoints inside (a, b) are always panel edges. For an infinite upper
    limit the integrand is pulled back to [0, 1) with t = a + s*u/(1-u).
    """
    spec = spec or QuadratureSpec()
    if math.isinf(b) or spec.domain == "half_line":
        if not math.isinf(b):
            raise ValueError("half_line transform needs b = inf")
        s = spec.half_line_scale

        def g(u, _f=f):
            u = np.asarray(u, dtype=float)
            t = a + s * u / (1.0 - u)
            return _f(t) * s / (1.0 - u) ** 2

        bps = [bp for bp in spec.breakpoints if bp > a]
        ubps = [(bp - a) / (s + bp - a) for bp in bps]
        return _adaptive(g, 0.0, 1.0, ubps, spec)
    if not b > a:
        if b == a:
            return QuadResult(0.0, 0.0, 0, True)
        r = _adaptive(f, b, a, [bp for bp in spec.breakpoints if b < bp < a], spec)
        return QuadResult(-r.value, r.achieved_tol, r.panels, r.converged)
    return _adaptive(f, a, b, [bp for bp in spec.breakpoints if a < bp < b], spec)


def _adaptive(f: Integrand, a: float, b: float, breakpoints: Sequence[float], spec: QuadratureSpec) -> QuadResult:
    edges = [a, *sorted(set(breakpoints)), b]
    heap = []
    total = 0.0
    err = 0.0
    counter = 0
    for lo, hi in zip(edges[:-1], edges[1:]):
        if hi <= lo:
            continue
        val, e, left, right = _panel(f, lo, hi, spec.n)
        heap.append((-e, counter, lo, hi, val, left, right))
        counter += 1
        total += val
        err += e
    heapq.heapify(heap)
    panels = len(heap)
    while heap and err > max(spec.atol, spec.rtol * abs(total)):
        if panels >= spec.max_panels:
            break
        neg_e, _, lo, hi, val, left, right = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            # panel cannot be split further in floating point
            heapq.heappush(heap, (0.0, counter, lo, hi, val, left, right))
            counter += 1
            err += neg_e
            continue
        total -= val
        err += neg_e
        for c, d, half in ((lo, mid, left), (mid, hi, right)):
            v, e, l2, r2 = _panel(f, c, d, spec.n, whole=half)
            heapq.heappush(heap, (-e, counter, c, d, v, l2, r2))
            counter += 1
            total += v
            err += e
        panels += 1
    # re-sum from the panels to shed accumulated add/subtract rounding
    total = math.fsum(item[4] for item in heap)
    err = math.fsum(-item[0] for item in heap)
    target = max(spec.atol, spec.rtol * abs(total))
    converged = err <= target
    if not converged and spec.strict:
        raise QuadratureError(
            f"quadrature did not converge: estimated error {err:.3e} > {target:.3e}", total, err
        )
    return QuadResult(total, err, panels, converged)


def adaptive_simpson(f: Callable[[float], float], a: float, b: float, tol: float = 1e-10, max_depth: int = 50) -> float:
    """Classical recursive adaptive Simpson rule with Richardson correction."""

    def simpson(fa, fm, fb, a, b):
        return (b - a) / 6.0 * (fa + 4.0 * fm + fb)

    def rec(a, b, fa, fm, fb, whole, tol, depth):
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = simpson(fa, flm, fm, a, m)
        right = simpson(fm, frm, fb, m, b)
        delta = left + right - whole
        if depth <= 0 or abs(delta) <= 15.0 * tol:
            return left + right + delta / 15.0
        return rec(a, m, fa, flm, fm, left, tol / 2, depth - 1) + rec(m, b, fm, frm, fb, right, tol / 2, depth - 1)

    fa, fb = f(a), f(b)
    m = 0.5 * (a + b)
    fm = f(m)
    return rec(a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol, max_depth)
