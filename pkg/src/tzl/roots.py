"""Zeros of sampled sections: the divisor on CP^1.

Aberth-Ehrlich simultaneous iteration, vectorised over a batch of
polynomials of equal degree. Coefficients are in ascending powers. Exactly
zero trailing coefficients give exact zeros at the origin; exactly zero
leading coefficients give zeros at infinity.

Evaluation switches to the reversed polynomial in 1/z when |z| > 1, so no
power of z is ever formed and degree-500 polynomials with a dynamic range of
hundreds of decades stay finite.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from numba import njit, prange

from .geometry import DIAMETER, fs_norm_array

NEAR_INFINITY = 1e8


class MaxIterationsError(RuntimeError):
    """Aberth iteration did not converge; carries the partial roots and residuals."""

    def __init__(self, message: str, roots: np.ndarray, residuals: np.ndarray):
        super().__init__(message)
        self.roots = roots
        self.residuals = residuals


@dataclass
class ZeroSet:
    """Finite zeros (repeated by multiplicity) and the order of vanishing at infinity."""

    roots: np.ndarray
    mult_infinity: int
    residual_max: float
    iterations: int = 0
    truncated_tail: bool = False
    meta: dict = field(default_factory=dict)

    @property
    def degree(self) -> int:
        return len(self.roots) + self.mult_infinity

    @property
    def near_infinity(self) -> np.ndarray:
        return np.abs(self.roots) > NEAR_INFINITY

    def fs_norms(self) -> np.ndarray:
        """FS norms of all zeros, the point at infinity contributing sqrt(pi)/2 per unit."""
        return np.concatenate([fs_norm_array(self.roots), np.full(self.mult_infinity, DIAMETER)])

    def coalesced(self, rel: float = 1e-9) -> list[tuple[complex, int]]:
        """Reporting view: roots closer than rel * scale are merged with a multiplicity."""
        out: list[list] = []
        for z in sorted(self.roots, key=lambda v: (abs(v), np.angle(v))):
            for item in out:
                if abs(item[0] - z) < rel * max(1.0, abs(z)):
                    item[1] += 1
                    break
            else:
                out.append([complex(z), 1])
        return [(z, m) for z, m in out]


def zeros_to_csv(zerosets, trial_indices) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["trial", "re", "im", "r_fs"])
    for t, zs in zip(trial_indices, zerosets):
        for z, r in zip(zs.roots, fs_norm_array(zs.roots)):
            w.writerow([int(t), repr(float(z.real)), repr(float(z.imag)), repr(float(r))])
        for _ in range(zs.mult_infinity):
            w.writerow([int(t), "inf", "inf", repr(DIAMETER)])
    return buf.getvalue()


# ------------------------------------------------------------- iteration


@njit(cache=True)
def _hull_guesses(q, phase, out):
    """Initial points on circles with radii from the upper convex hull of log|q_j|."""
    d = q.size - 1
    lg = np.empty(d + 1)
    for j in range(d + 1):
        a = abs(q[j])
        lg[j] = math.log(a) if a > 0 else -np.inf
    hull = np.empty(d + 1, dtype=np.int64)
    h = 0
    for j in range(d + 1):
        if not np.isfinite(lg[j]):
            continue
        while h >= 2:
            a = hull[h - 2]
            b = hull[h - 1]
            # drop b when it lies on or below the chord a -> j
            if (lg[b] - lg[a]) * (j - a) <= (lg[j] - lg[a]) * (b - a):
                h -= 1
            else:
                break
        hull[h] = j
        h += 1
    k = 0
    for e in range(h - 1):
        a = hull[e]
        b = hull[e + 1]
        n = b - a
        rad = math.exp((lg[a] - lg[b]) / n)
        for m in range(n):
            ang = 2.0 * math.pi * m / n + 2.0 * math.pi * e / d + phase
            out[k] = rad * complex(math.cos(ang), math.sin(ang))
            k += 1


def newton_polygon_guesses(q: np.ndarray, phase: float = 0.4, conjugate: bool = False) -> np.ndarray:
    q = np.asarray(q, dtype=np.complex128)
    out = np.empty(q.size - 1, dtype=np.complex128)
    _hull_guesses(q, phase, out)
    return np.conj(out) if conjugate else out


@njit(cache=True)
def _ratio_berr(q, z):
    """Newton ratio p(z)/p'(z) and relative backward error; reversed Horner for |z| > 1."""
    d = q.size - 1
    inside = abs(z) <= 1.0
    x = z if inside else 1.0 / z
    ax = abs(x)
    b = q[d] if inside else q[0]
    mag = abs(b)
    db = 0j
    for k in range(1, d + 1):
        c = q[d - k] if inside else q[k]
        db = db * x + b
        b = b * x + c
        mag = mag * ax + abs(c)
    if b == 0:
        return 0j, 0.0
    if inside:
        r = b / db
    else:
        r = z / (d - x * db / b)
    return r, abs(b) / mag


@njit(cache=True)
def _aberth_one(q, z, max_iter, tol, noise):
    d = z.size
    active = np.ones(d, dtype=np.bool_)
    for it in range(1, max_iter + 1):
        moving = False
        for i in range(d):
            if not active[i]:
                continue
            zi = z[i]
            r, berr = _ratio_berr(q, zi)
            s = 0j
            for k in range(d):
                if k != i:
                    s += 1.0 / (zi - z[k])
            w = r / (1.0 - r * s)
            if not (np.isfinite(w.real) and np.isfinite(w.imag)):
                w = r
            z[i] = zi - w
            if abs(w) <= tol * (1.0 + abs(zi)) or berr <= noise:
                active[i] = False
            else:
                moving = True
        if not moving:
            return it, True
    return max_iter, False


@njit(cache=True, parallel=True)
def _aberth_rows(q, z, max_iter, tol, phase, iters, conv):
    d = z.shape[1]
    noise = 4.0 * (d + 1) * 2.220446049250313e-16
    for r in prange(q.shape[0]):
        _hull_guesses(q[r], phase, z[r])
        it, ok = _aberth_one(q[r], z[r], max_iter, tol, noise)
        iters[r] = it
        conv[r] = ok


def aberth_batch(q: np.ndarray, max_iter: int = 500, tol: float = 1e-13, conjugate: bool = False):
    """Aberth-Ehrlich iteration for each row of q (no zero end coefficients).

    Updates are applied in place (Gauss-Seidel order). A root stops moving once
    its update is below tol * (1 + |z|) or its backward error is at the rounding
    level. Rows are independent, so the result does not depend on the thread
    count. Returns (roots, iterations per row, converged per row).
    """
    q = np.ascontiguousarray(q, dtype=np.complex128)
    if conjugate:
        # conjugated start: solve the conjugate polynomial, conjugate back
        z, it, ok = aberth_batch(np.conj(q), max_iter, tol)
        return np.conj(z), it, ok
    B, d1 = q.shape
    z = np.empty((B, d1 - 1), dtype=np.complex128)
    iters = np.zeros(B, dtype=np.int64)
    conv = np.zeros(B, dtype=np.bool_)
    _aberth_rows(q, z, max_iter, tol, 0.4, iters, conv)
    return z, iters, conv


def _split(c: np.ndarray):
    nz = np.flatnonzero(c != 0)
    if nz.size == 0:
        raise ValueError("zero polynomial has no divisor")
    lo, hi = int(nz[0]), int(nz[-1])
    return lo, hi


def _balance(q: np.ndarray):
    """Substitute z = 2^e w with |q_0| ~ |q_d| 2^(e d), row by row.

    Power-of-two scaling is exact, also for subnormal inputs, and pulls a
    coefficient profile spanning hundreds of decades back into the normal
    range. Rows whose balanced profile would not fit are left unscaled.
    """
    d = q.shape[1] - 1
    _, l0 = np.frexp(np.abs(q[:, 0]))
    _, ld = np.frexp(np.abs(q[:, d]))
    e = np.rint((l0 - ld) / d).astype(np.int64)
    j = np.arange(d + 1)
    with np.errstate(divide="ignore"):
        lg = np.log2(np.abs(q)) + e[:, None] * j[None, :]
    shift = -np.ceil(np.max(lg, axis=1)).astype(np.int64)
    fits = np.min(np.where(np.isfinite(lg), lg, np.inf), axis=1) + shift > -1000
    e = np.where(fits, e, 0)
    shift = np.where(fits, shift, 0)
    k = shift[:, None] + e[:, None] * j[None, :]
    return np.ldexp(q.real, k) + 1j * np.ldexp(q.imag, k), e


@njit(cache=True)
def _berr_rows(q, z, out):
    for r in range(z.shape[0]):
        for i in range(z.shape[1]):
            _, out[r, i] = _ratio_berr(q[r], z[r, i])


def relative_residuals(c: np.ndarray, roots: np.ndarray) -> np.ndarray:
    """|p(z)| / sum |c_j| |z|^j at each root, evaluated without overflow."""
    roots = np.asarray(roots, dtype=np.complex128)
    if roots.size == 0:
        return np.zeros(0)
    lo, hi = _split(c)
    q = np.ascontiguousarray(c[lo : hi + 1], dtype=np.complex128)
    res = np.zeros(roots.size)
    if q.size == 1:
        return res
    nonzero = roots != 0
    if np.any(nonzero):
        qb, e = _balance(q[None, :])
        w = roots[nonzero]
        w = np.ldexp(w.real, -e[0]) + 1j * np.ldexp(w.imag, -e[0])
        out = np.zeros((1, w.size))
        _berr_rows(qb, w[None, :], out)
        res[nonzero] = out[0]
    return res


def find_roots_batch(coeffs: np.ndarray, truncated=None, max_iter: int = 500) -> list[ZeroSet]:
    """Zero sets for each row of ``coeffs`` (ascending powers)."""
    coeffs = np.atleast_2d(np.asarray(coeffs, dtype=np.complex128))
    n, p1 = coeffs.shape
    p = p1 - 1
    truncated = np.zeros(n, dtype=bool) if truncated is None else np.asarray(truncated, dtype=bool)
    groups: dict[tuple[int, int], list[int]] = {}
    for i, row in enumerate(coeffs):
        groups.setdefault(_split(row), []).append(i)
    results: list[ZeroSet | None] = [None] * n
    for (lo, hi), members in groups.items():
        d = hi - lo
        q = np.ascontiguousarray(coeffs[members, lo : hi + 1])
        if d == 0:
            z = np.zeros((len(members), 0), dtype=np.complex128)
            iters = np.zeros(len(members), dtype=np.int64)
            ok = np.ones(len(members), dtype=bool)
        elif d == 1:
            z = (-q[:, 0] / q[:, 1])[:, None]
            iters = np.ones(len(members), dtype=np.int64)
            ok = np.ones(len(members), dtype=bool)
        else:
            q, e = _balance(q)
            z, iters, ok = aberth_batch(q, max_iter=max_iter)
            if not ok.all():
                # restart the stragglers from conjugated initial phases
                bad = np.flatnonzero(~ok)
                z2, it2, ok2 = aberth_batch(q[bad], max_iter=max_iter, conjugate=True)
                z[bad], iters[bad], ok[bad] = z2, iters[bad] + it2, ok2
        res = np.zeros(z.shape)
        if d >= 2:
            # backward error is invariant under the balancing substitution
            _berr_rows(q, z, res)
            z = np.ldexp(z.real, e[:, None]) + 1j * np.ldexp(z.imag, e[:, None])
        elif d == 1:
            _berr_rows(q, z, res)
        for k, i in enumerate(members):
            roots = np.concatenate([np.zeros(lo, dtype=np.complex128), z[k]])
            if not ok[k]:
                raise MaxIterationsError(
                    f"Aberth iteration did not converge in {max_iter} sweeps (row {i})", roots, res[k]
                )
            rmax = float(res[k].max()) if d else 0.0
            results[i] = ZeroSet(roots, p - hi, rmax, int(iters[k]), bool(truncated[i]))
    return results  # type: ignore[return-value]


def find_roots(sample) -> ZeroSet:
    """Zero set of one ``SectionSample`` (or a bare coefficient vector)."""
    if hasattr(sample, "coeffs"):
        return find_roots_batch(sample.coeffs[None, :], [getattr(sample, "truncated_tail", False)])[0]
    return find_roots_batch(np.asarray(sample, dtype=complex)[None, :])[0]


def residual_check(sample, zeros: ZeroSet) -> float:
    """Largest relative residual |p(z)| / sum |c_j||z|^j over the finite zeros."""
    c = np.asarray(sample.coeffs if hasattr(sample, "coeffs") else sample, dtype=complex)
    res = relative_residuals(c, zeros.roots[zeros.roots != 0])
    return float(res.max()) if res.size else 0.0


def vieta_error(sample, zeros: ZeroSet) -> float:
    """|sum of roots + c_{d-1}/c_d| relative to max(1, sum |roots|); nan if a zero sits at infinity."""
    c = np.asarray(sample.coeffs if hasattr(sample, "coeffs") else sample, dtype=complex)
    if zeros.mult_infinity or len(c) < 2:
        return math.nan
    target = -c[-2] / c[-1]
    s = complex(math.fsum(zeros.roots.real), math.fsum(zeros.roots.imag))
    return abs(s - target) / max(1.0, float(np.sum(np.abs(zeros.roots))))
