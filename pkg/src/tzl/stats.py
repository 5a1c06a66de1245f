"""Statistics of zero divisors: equidistribution, linear statistics, holes and mass.

Test functions are radial in the chart coordinate rho = |z|. Integrals against
the FS area form are done in the area coordinate u = rho^2 / (1 + rho^2), in
which omega_FS = du dtheta / 2 pi.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats as sps
from scipy.interpolate import CubicSpline

from .basis import log_basis_weight
from .geometry import DIAMETER, SQRT_PI, ChartPoint, fs_cdf, fs_density, fs_distance, fs_norm_array
from .quadrature import QuadratureSpec, composite_nodes, gauss_legendre, integrate
from .roots import ZeroSet, find_roots_batch
from .sampler import log_t2_diag, sample_section, sample_sections
from .spectra import PreconditionError, ToeplitzSpectrum, compute_spectrum, radial_average
from .symbols import Symbol, area_to_radius, radius_to_area


class DegenerateVarianceError(ValueError):
    pass


# ------------------------------------------------------------ test functions


class TestFunction:
    """Radial test function phi(rho) with the operator L(phi)."""

    __test__ = False  # not a pytest class
    support_radius = math.inf
    at_infinity = 0.0

    def value(self, rho):
        raise NotImplementedError

    def laplacian(self, rho):
        """phi'' + phi'/rho, or None when only finite differences are available."""
        return None

    def of_radius(self, rho):
        return self.value(rho)

    def of_area(self, u):
        return self.value(area_to_radius(u))

    def __call__(self, z):
        return self.value(np.abs(np.asarray(z)))

    @property
    def support_area(self) -> float:
        return float(radius_to_area(self.support_radius))

    def area_breakpoints(self) -> list[float]:
        u = self.support_area
        return [u] if 0 < u < 1 else []


@dataclass(frozen=True)
class RadialBump(TestFunction):
    """A (1 - (rho/rho0)^2)^4 inside rho < rho0, zero outside; C^3 across the edge."""

    rho0: float = 1.0
    amplitude: float = 1.0

    def __post_init__(self):
        if not (self.rho0 > 0 and math.isfinite(self.rho0) and math.isfinite(self.amplitude)):
            raise ValueError("bump needs finite rho0 > 0 and finite amplitude")

    @property
    def support_radius(self):
        return self.rho0

    def value(self, rho):
        s = (np.asarray(rho, dtype=float) / self.rho0) ** 2
        return np.where(s < 1, self.amplitude * np.clip(1 - s, 0, None) ** 4, 0.0)

    def laplacian(self, rho):
        s = (np.asarray(rho, dtype=float) / self.rho0) ** 2
        lap = 16 * self.amplitude / self.rho0**2 * (1 - s) ** 2 * (4 * s - 1)
        return np.where(s < 1, lap, 0.0)

    def text(self):
        return f"bump:{self.rho0:g},{self.amplitude:g}"


@dataclass(frozen=True)
class LogProfile(TestFunction):
    """log(1 + rho^2); its L is the constant 2 pi. Not compactly supported."""

    at_infinity = math.inf

    def value(self, rho):
        return np.log1p(np.asarray(rho, dtype=float) ** 2)

    def laplacian(self, rho):
        r2 = np.asarray(rho, dtype=float) ** 2
        return 4.0 / (1.0 + r2) ** 2

    def text(self):
        return "log"


@dataclass(frozen=True)
class TabulatedPhi(TestFunction):
    """Clamped cubic spline through (rho_i, phi_i), constant beyond the last radius."""

    radii: tuple
    values: tuple

    def __post_init__(self):
        r = np.asarray(self.radii, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if r.ndim != 1 or r.shape != v.shape or r.size < 3 or r[0] != 0 or np.any(np.diff(r) <= 0):
            raise ValueError("tabulated phi needs >= 3 increasing radii starting at 0")
        object.__setattr__(self, "radii", tuple(map(float, r)))
        object.__setattr__(self, "values", tuple(map(float, v)))
        object.__setattr__(self, "_spline", CubicSpline(r, v, bc_type="clamped"))

    @property
    def support_radius(self):
        return self.radii[-1] if self.values[-1] == 0 else math.inf

    @property
    def at_infinity(self):
        return self.values[-1]

    def value(self, rho):
        rho = np.abs(np.asarray(rho, dtype=float))
        return np.where(rho < self.radii[-1], self._spline(np.minimum(rho, self.radii[-1])), self.values[-1])

    def area_breakpoints(self):
        return [float(radius_to_area(r)) for r in self.radii[1:]]

    def text(self):
        return "tabphi"


def _fd_laplacian(phi: TestFunction, rho, h: float = 1e-3):
    """phi'' + phi'/rho from 5-point differences of the even extension of phi."""
    rho = np.asarray(rho, dtype=float)
    f = lambda x: phi.value(np.abs(x))  # noqa: E731
    f0, fp1, fm1, fp2, fm2 = f(rho), f(rho + h), f(rho - h), f(rho + 2 * h), f(rho - 2 * h)
    d1 = (-fp2 + 8 * fp1 - 8 * fm1 + fm2) / (12 * h)
    d2 = (-fp2 + 16 * fp1 - 30 * f0 + 16 * fm1 - fm2) / (12 * h * h)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = d2 + d1 / rho
    # near the origin phi'/rho -> phi''(0)
    return np.where(rho < h, 2 * d2, out)


def l_of_phi(phi: TestFunction, rho, method: str = "auto"):
    """L(phi)(rho) = (pi/2)(1 + rho^2)^2 (phi'' + phi'/rho), so that i ddbar phi = L(phi) omega_FS."""
    rho = np.asarray(rho, dtype=float)
    if np.any(rho < 0):
        raise ValueError("radius must be nonnegative")
    lap = phi.laplacian(rho) if method in ("auto", "analytic") else None
    if lap is None:
        if method == "analytic":
            raise ValueError(f"{type(phi).__name__} has no analytic L")
        lap = _fd_laplacian(phi, rho)
    out = 0.5 * np.pi * (1 + rho * rho) ** 2 * lap
    return float(out) if out.ndim == 0 else out


def _l_of_area(phi: TestFunction, method: str = "auto"):
    return lambda u: l_of_phi(phi, area_to_radius(u), method)


def _area_integral(f, phi: TestFunction, rtol: float = 1e-13) -> float:
    top = phi.support_area
    bps = [b for b in phi.area_breakpoints() if 0 < b < top]
    spec = QuadratureSpec(n=24, rtol=rtol, atol=1e-15, breakpoints=bps)
    return integrate(f, 0.0, top, spec).value


def phi_integral(phi: TestFunction) -> float:
    """int phi omega_FS."""
    return _area_integral(phi.of_area, phi)


def l_integral(phi: TestFunction) -> float:
    """int L(phi) omega_FS (zero for compactly supported phi)."""
    return _area_integral(_l_of_area(phi), phi)


def l2_integral(phi: TestFunction) -> float:
    """int L(phi)^2 omega_FS."""
    lf = _l_of_area(phi)
    return _area_integral(lambda u: lf(u) ** 2, phi)


# --------------------------------------------------------- linear statistics


def linear_statistic(zeros: ZeroSet, phi: TestFunction) -> float:
    """Sum of phi over the divisor, zeros at infinity contributing phi(infinity)."""
    vals = phi.value(np.abs(zeros.roots))
    tail = zeros.mult_infinity * phi.at_infinity if zeros.mult_infinity else 0.0
    return math.fsum(vals) + tail


def linear_statistics(zerosets, phi: TestFunction) -> np.ndarray:
    return np.array([linear_statistic(z, phi) for z in zerosets])


def expectation_terms(spectrum: ToeplitzSpectrum, phi: TestFunction) -> tuple[float, float]:
    """(p int phi omega, (1/2pi) int log T^2(z,z) L(phi) omega)."""
    lf = _l_of_area(phi)

    def corr(u):
        return log_t2_diag(spectrum, area_to_radius(u).astype(complex)) * lf(u)

    return spectrum.p * phi_integral(phi), _area_integral(corr, phi, 1e-12) / (2 * math.pi)


def expectation_exact(spectrum: ToeplitzSpectrum, phi: TestFunction) -> float:
    """E[Z(phi)] = p int phi omega + (1/2pi) int log T^2(z,z) L(phi) omega."""
    a, b = expectation_terms(spectrum, phi)
    return a + b


# ----------------------------------------------------------- variance oracle


def _li2_series(x):
    """sum_{k<=60} x^k / k^2; accurate to rounding for 0 <= x <= 1/2."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    xk = x.copy()
    for k in range(1, 61):
        out += xk / (k * k)
        xk *= x
    return out


def dilog(x):
    """Li_2(x) = sum x^k / k^2 on [0, 1], with the reflection formula above 1/2."""
    x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    low = x <= 0.5
    xl = np.where(low, x, 0.0)
    xh = np.where(low, 0.5, x)
    with np.errstate(divide="ignore", invalid="ignore"):
        refl = math.pi**2 / 6 - np.log(xh) * np.log1p(-xh) - _li2_series(1 - xh)
    refl = np.where(xh >= 1.0, math.pi**2 / 6, refl)
    out = np.where(low, _li2_series(xl), refl)
    return float(out) if out.ndim == 0 else out


def g_tilde(t):
    """Bipotential G~(t) = sum_j t^{2j} / (4 pi^2 j^2) = Li_2(t^2) / 4 pi^2; G~(1) = 1/24."""
    t = np.asarray(t, dtype=float)
    return dilog(t * t) / (4 * math.pi**2)


def zeta3() -> float:
    """zeta(3) from the rapidly convergent central-binomial series."""
    terms = []
    c = 1.0  # C(2k, k)
    for k in range(1, 40):
        c = c * (2 * k) * (2 * k - 1) / (k * k)
        terms.append((-1) ** (k + 1) / (k**3 * c))
    return 2.5 * math.fsum(terms)


def _log_diag_sum(log_a: np.ndarray, logr: np.ndarray) -> np.ndarray:
    """log sum_j exp(log_a_j + 2 j log r) for an array of radii."""
    j = np.arange(log_a.size)
    t = log_a[None, :] + np.where(j > 0, 2 * j * logr[:, None], 0.0)
    top = t.max(axis=1, keepdims=True)
    return top[:, 0] + np.log(np.exp(t - top).sum(axis=1))


def variance_bipotential(
    spectrum: ToeplitzSpectrum,
    phi: TestFunction,
    panels: int | None = None,
    order: int = 10,
    n_theta: int | None = None,
) -> dict:
    """Var Z(phi) = int int L(z) L(w) G~(N(z, w)) omega(z) omega(w) for radial phi and symbol.

    Composite Gauss-Legendre in both area coordinates, with panels no wider than
    about 1/(2 sqrt(p)) so the diagonal ridge of width ~ p^{-1/2} is resolved, and
    the periodic trapezoid rule (one FFT) in the relative angle.
    """
    p = spectrum.p
    top = phi.support_area
    if panels is None:
        panels = int(math.ceil(2 * top * math.sqrt(max(p, 1)))) + 4
    m = n_theta or 8 * (p + 1)
    if m < 8 * (p + 1):
        raise ValueError("n_theta must be at least 8 (p + 1)")
    bps = sorted({0.0, top, *np.linspace(0.0, top, panels + 1).tolist(), *[b for b in phi.area_breakpoints() if b < top]})
    u, wu = composite_nodes(bps, order)
    rho = area_to_radius(u)
    logr = np.log(rho)
    lvals = l_of_phi(phi, rho)
    log_a = 2 * spectrum.log_lambdas + log_basis_weight(p)
    live = np.isfinite(log_a)
    log_a = np.where(live, log_a, -np.inf)
    diag = _log_diag_sum(np.where(live, log_a, -1e300), logr)
    j = np.arange(p + 1)
    n = u.size
    gbar = np.zeros((n, n))
    ii, kk = np.triu_indices(n)
    chunk = max(1, 1_000_000 // m)
    for s in range(0, ii.size, chunk):
        a, b = ii[s : s + chunk], kk[s : s + chunk]
        lc = log_a[None, :] + j[None, :] * (logr[a] + logr[b])[:, None] - 0.5 * (diag[a] + diag[b])[:, None]
        coef = np.exp(lc)
        vals = np.abs(np.fft.fft(coef, n=m, axis=1))
        g = g_tilde(np.minimum(vals, 1.0)).mean(axis=1)
        gbar[a, b] = g
        gbar[b, a] = g
    wl = wu * lvals
    value = float(wl @ gbar @ wl)
    return {"value": value, "nodes": n, "panels": panels, "n_theta": m}


def variance_leading_term(phi: TestFunction) -> float:
    """zeta(3) / (4 pi^2) int L(phi)^2 omega_FS; the variance is this divided by p to leading order."""
    return zeta3() / (4 * math.pi**2) * l2_integral(phi)


# ---------------------------------------------------------------- simulation


def simulate_zeros(spectrum: ToeplitzSpectrum, seed: int, trials: int, start: int = 0, chunk: int = 2000):
    """Yield (trial_indices, zerosets) in chunks; results do not depend on the chunk size."""
    for s in range(start, start + trials, chunk):
        idx = np.arange(s, min(s + chunk, start + trials))
        batch = sample_sections(spectrum, seed, idx)
        yield idx, find_roots_batch(batch.coeffs, batch.truncated_tail)


def all_zeros(spectrum: ToeplitzSpectrum, seed: int, trials: int, start: int = 0) -> tuple[np.ndarray, list[ZeroSet]]:
    idx, zs = [], []
    for i, z in simulate_zeros(spectrum, seed, trials, start):
        idx.append(i)
        zs.extend(z)
    return (np.concatenate(idx) if idx else np.zeros(0, dtype=np.int64)), zs


@dataclass
class MonteCarloReport:
    trials: int
    mean: float
    variance: float
    skewness: float
    excess_kurtosis: float
    ks_vs_normal: float
    per_trial: np.ndarray | None = None
    trial_indices: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    @property
    def std_error(self) -> float:
        return math.sqrt(self.variance / self.trials)

    @property
    def variance_std_error(self) -> float:
        """Standard error of the sample variance from the fourth central moment."""
        x = self.per_trial
        m4 = float(np.mean((x - x.mean()) ** 4))
        return math.sqrt(max(m4 - self.variance**2, 0.0) / self.trials)

    def standardized(self) -> np.ndarray:
        return (self.per_trial - self.mean) / math.sqrt(self.variance)

    def to_dict(self) -> dict:
        keys = ("trials", "mean", "variance", "skewness", "excess_kurtosis", "ks_vs_normal")
        out = {k: getattr(self, k) for k in keys}
        out["std_error"] = self.std_error
        out.update(self.meta)
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["trial", "Z", "Z_standardized"])
        idx = self.trial_indices if self.trial_indices is not None else range(self.trials)
        for t, z, s in zip(idx, self.per_trial, self.standardized()):
            w.writerow([int(t), repr(float(z)), repr(float(s))])
        return buf.getvalue()


def report_from_samples(x, trial_indices=None, meta=None) -> MonteCarloReport:
    x = np.asarray(x, dtype=float)
    var = float(np.var(x, ddof=1))
    if not var > 0:
        raise DegenerateVarianceError("all samples are equal; cannot standardize")
    mean = float(np.mean(x))
    ks = float(sps.kstest((x - mean) / math.sqrt(var), "norm").statistic)
    return MonteCarloReport(
        x.size, mean, var, float(sps.skew(x)), float(sps.kurtosis(x)), ks, x, trial_indices, dict(meta or {})
    )


def check_support(symbol: Symbol, phi: TestFunction, n: int = 2001) -> None:
    """Require f > 0 on the closed support of phi."""
    top = phi.support_radius
    if not math.isfinite(top):
        raise PreconditionError("test function must have compact support in the chart")
    rho = np.linspace(0.0, top, n)
    if np.any(symbol.of_radius(rho) <= 0):
        raise PreconditionError(f"symbol {symbol.text()} vanishes on the support of phi")


def linear_statistic_samples(spectrum: ToeplitzSpectrum, phi: TestFunction, trials: int, seed: int):
    idx, zs = all_zeros(spectrum, seed, trials)
    return idx, linear_statistics(zs, phi)


def clt_report(
    spectrum: ToeplitzSpectrum, phi: TestFunction, trials: int, seed: int, min_trials: int = 1000, check: bool = True
) -> MonteCarloReport:
    """Monte Carlo distribution of Z(phi), standardized and compared with N(0, 1)."""
    if trials < min_trials:
        raise PreconditionError(f"need at least {min_trials} trials")
    if check:
        check_support(spectrum.symbol, phi)
    idx, z = linear_statistic_samples(spectrum, phi, trials, seed)
    return report_from_samples(z, idx, {"p": spectrum.p, "seed": seed})


# ------------------------------------------------------------ histograms, KS


def _fs_radii(data) -> np.ndarray:
    if isinstance(data, np.ndarray) and data.dtype.kind == "f":
        return data
    if isinstance(data, ZeroSet):
        return data.fs_norms()
    parts = [z.fs_norms() if isinstance(z, ZeroSet) else np.atleast_1d(np.asarray(z, dtype=float)) for z in data]
    return np.concatenate(parts) if parts else np.zeros(0)


@dataclass
class FSHistogram:
    edges: np.ndarray
    counts: np.ndarray
    density: np.ndarray
    psi_mid: np.ndarray

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["bin_lo", "bin_hi", "count", "density", "psi_mid"])
        for lo, hi, c, d, s in zip(self.edges[:-1], self.edges[1:], self.counts, self.density, self.psi_mid):
            w.writerow([repr(float(lo)), repr(float(hi)), int(c), repr(float(d)), repr(float(s))])
        return buf.getvalue()


def fs_histogram(zerosets, bins: int = 50) -> FSHistogram:
    """Histogram of FS norms on [0, sqrt(pi)/2], the last bin closed; zeros at infinity land there."""
    r = _fs_radii(zerosets)
    if r.size == 0:
        raise ValueError("no zeros to histogram")
    counts, edges = np.histogram(np.minimum(r, DIAMETER), bins=bins, range=(0.0, DIAMETER))
    width = np.diff(edges)
    density = counts / (r.size * width)
    mid = 0.5 * (edges[:-1] + edges[1:])
    return FSHistogram(edges, counts, density, fs_density(mid))


def ks_vs_fs(zerosets, upper: float | None = None, conditional: bool = False) -> float:
    """sup |F_n(r) - Psi(r)| over [0, upper] (the whole range by default).

    With ``conditional`` both CDFs are renormalised on [0, upper], which
    compares the shape of the zero distribution inside the FS ball only.
    """
    r = np.sort(np.minimum(_fs_radii(zerosets), DIAMETER))
    n = r.size
    if n == 0:
        raise ValueError("no zeros")
    a = DIAMETER if upper is None else float(upper)
    k = int(np.searchsorted(r, a, side="right"))
    fa_emp = k / n
    fa_th = float(fs_cdf(a))
    if conditional:
        if k == 0:
            return 1.0
        rr = r[:k]
        cdf = fs_cdf(rr) / fa_th
        i = np.arange(1, k + 1)
        return float(max(np.max(i / k - cdf), np.max(cdf - (i - 1) / k)))
    rr = r[:k]
    cdf = fs_cdf(rr)
    i = np.arange(1, k + 1)
    parts = [abs(fa_emp - fa_th)]
    if k:
        parts += [float(np.max(i / n - cdf)), float(np.max(cdf - (i - 1) / n))]
    return float(max(parts))


# --------------------------------------------------------------------- holes


@dataclass(frozen=True)
class FSDisc:
    """Open FS ball about a chart point; radius >= sqrt(pi)/2 is the whole sphere."""

    center: complex = 0j
    radius: float = 0.1

    @classmethod
    def chart(cls, r: float, center: complex = 0j) -> "FSDisc":
        """Ball about the origin equal to the chart disc |z| < r."""
        if center != 0:
            raise ValueError("chart-radius discs are centred at the origin")
        return cls(0j, math.atan(r) / SQRT_PI)

    @classmethod
    def whole(cls) -> "FSDisc":
        return cls(0j, math.inf)

    @property
    def volume(self) -> float:
        return float(fs_cdf(min(self.radius, DIAMETER)))

    def hits(self, zs: ZeroSet) -> bool:
        if self.radius > DIAMETER:
            return zs.degree > 0
        if zs.mult_infinity and fs_distance(self.center, ChartPoint.infinity()) < self.radius:
            return True
        if zs.roots.size == 0:
            return False
        c = complex(self.center)
        z = zs.roots
        d = np.arctan(np.abs(z - c) / np.abs(1 + np.conj(c) * z)) / SQRT_PI
        return bool(np.any(d < self.radius))


@dataclass
class HoleReport:
    rows: list[dict]
    region: FSDisc

    def frequencies(self) -> np.ndarray:
        return np.array([r["frequency"] for r in self.rows])

    def decreasing(self, band: float = 2.0) -> bool:
        """Point estimates strictly decrease while any are positive, and no step
        up exceeds ``band`` binomial standard errors of the difference."""
        f = self.frequencies()
        for a, b in zip(self.rows[:-1], self.rows[1:]):
            se = math.sqrt(a["se"] ** 2 + b["se"] ** 2)
            if b["frequency"] > a["frequency"] + band * se:
                return False
            if a["frequency"] > 0 and not b["frequency"] < a["frequency"]:
                return False
        return bool(f.size)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["p", "trials", "holes", "frequency"])
        for r in self.rows:
            w.writerow([r["p"], r["trials"], r["holes"], repr(float(r["frequency"]))])
        return buf.getvalue()


def hole_frequency(symbol: Symbol, region: FSDisc, p_list, trials: int, seed: int) -> HoleReport:
    """Empirical P(no zero in region) for each p."""
    if not region.radius > 0:
        raise PreconditionError("region must have positive volume")
    rows = []
    for p in p_list:
        spec = compute_spectrum(symbol, int(p))
        holes = 0
        for _, zs in simulate_zeros(spec, seed, trials):
            holes += sum(not region.hits(z) for z in zs)
        f = holes / trials
        rows.append({"p": int(p), "trials": trials, "holes": holes, "frequency": f,
                     "se": math.sqrt(max(f * (1 - f), 0.25 / trials) / trials)})
    return HoleReport(rows, region)


# ---------------------------------------------------------------------- mass


def _weight_area(g):
    return g.of_area


def mass_statistic(sample, g) -> float:
    """Y = p^{-1} int g |S|^2_{h_p} omega_FS, from the sampled polynomial on a (u, theta) grid.

    The angular mean of |S|^2 is taken with an FFT of length 2(p+1), which is
    exact for the trigonometric polynomial; the radial rule is Gauss-Legendre of
    order p/2 + 8 on each smooth piece of g.
    """
    p = sample.p
    if p < 1:
        raise ValueError("mass statistic needs p >= 1")
    c = np.asarray(sample.coeffs, dtype=complex)
    bps = [0.0, *sorted(b for b in getattr(g, "area_breakpoints", lambda: [])() if 0 < b < 1), 1.0]
    u, wu = composite_nodes(bps, p // 2 + 8)
    j = np.arange(p + 1)
    with np.errstate(divide="ignore"):
        lc = np.log(np.abs(c))
    lw = lc[None, :] + 0.5 * (j[None, :] * np.log(u)[:, None] + (p - j)[None, :] * np.log1p(-u)[:, None])
    a = np.exp(lw) * np.exp(1j * np.angle(c))[None, :]
    vals = np.abs(np.fft.fft(a, n=2 * (p + 1), axis=1)) ** 2
    ang = vals.mean(axis=1)
    gu = np.asarray(g.of_area(u), dtype=float)
    total = float(np.dot(wu, gu * ang))
    return math.ldexp(total, 2 * int(sample.scale_exponent)) / p


def mass_m(spectrum: ToeplitzSpectrum, g) -> np.ndarray:
    """m_j(g) = (p+1) C(p,j) int g u^j (1-u)^{p-j} du."""
    return np.array([radial_average(g, spectrum.p, j)[0] for j in range(spectrum.p + 1)])


def mass_exact_moments(spectrum: ToeplitzSpectrum, g) -> tuple[float, float]:
    """E[Y] = p^{-1} sum lambda_j^2 m_j and Var[Y] = p^{-2} sum lambda_j^4 m_j^2."""
    p = spectrum.p
    if p < 1:
        raise ValueError("mass statistic needs p >= 1")
    m = mass_m(spectrum, g)
    lam2 = spectrum.lambdas**2
    return math.fsum(lam2 * m) / p, math.fsum((lam2 * m) ** 2) / p**2


def mass_samples(spectrum: ToeplitzSpectrum, g, trials: int, seed: int) -> np.ndarray:
    batch = sample_sections(spectrum, seed, np.arange(trials))
    return np.array([mass_statistic(batch.sample(i), g) for i in range(trials)])


def mass_target(symbol: Symbol, g) -> float:
    """int g f^2 omega_FS, the LLN limit."""
    bps = sorted({*symbol.area_breakpoints(), *getattr(g, "area_breakpoints", lambda: [])()})
    spec = QuadratureSpec(n=24, rtol=1e-13, atol=1e-15, breakpoints=[b for b in bps if 0 < b < 1])
    return integrate(lambda u: g.of_area(u) * symbol.of_area(u) ** 2, 0.0, 1.0, spec).value


def mass_lln_report(symbol: Symbol, g, n_max: int, seed: int) -> dict:
    """Average of Y_p over p = 1..N, one trial each (trial index p)."""
    ys, exact = [], []
    for p in range(1, n_max + 1):
        spec = compute_spectrum(symbol, p)
        ys.append(mass_statistic(sample_section(spec, seed, p), g))
        exact.append(mass_exact_moments(spec, g)[0])
    ys = np.array(ys)
    return {
        "p": np.arange(1, n_max + 1),
        "Y": ys,
        "running_average": np.cumsum(ys) / np.arange(1, n_max + 1),
        "average": float(np.mean(ys)),
        "exact_average": float(np.mean(exact)),
        "target": mass_target(symbol, g),
    }


def mass_csv(p_values, ys) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["p", "Y"])
    for p, y in zip(p_values, ys):
        w.writerow([int(p), repr(float(y))])
    return buf.getvalue()
