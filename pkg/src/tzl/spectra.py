"""Toeplitz operator spectra T_{f,p} on CP^1.

For a radial symbol the basis S_j diagonalises T_{f,p}, and in the area
coordinate u = |z|^2 / (1 + |z|^2) the eigenvalue is

    lambda_j = (p + 1) C(p, j) * int_0^1 f(u) u^j (1 - u)^(p - j) du,

i.e. the mean of f under Beta(j + 1, p - j + 1). Closed forms exist for the
power family, the disc indicators and (as a one-dimensional integral) for
exp(-1/|z|^2); ``spectrum_quadrature`` is the independent route for all of
them, and ``toeplitz_matrix_general`` handles non-radial symbols.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .basis import check_degree, log_basis_weight, log_binom
from .jacobi import jacobi_eigh
from .quadrature import QuadratureSpec, composite_nodes, integrate
from .symbols import (
    Constant,
    DiscIndicator,
    ExpInverse,
    PowerVanish,
    Scaled,
    Symbol,
)

TINY = 1e-300


@dataclass
class ToeplitzSpectrum:
    """Eigenvalues lambda_0..lambda_p of T_{f,p}, indexed by basis index j.

    ``log_lambdas`` is authoritative when entries underflow double precision.
    """

    p: int
    lambdas: np.ndarray
    symbol: Symbol
    method: str
    log_lambdas: np.ndarray | None = None
    underflow: bool = False
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        self.lambdas = np.asarray(self.lambdas, dtype=float)
        if self.log_lambdas is None:
            with np.errstate(divide="ignore"):
                self.log_lambdas = np.log(self.lambdas)
        self.log_lambdas = np.asarray(self.log_lambdas, dtype=float)
        if self.lambdas.shape != (self.p + 1,):
            raise ValueError("spectrum length must be p + 1")
        self.underflow = bool(self.underflow or np.any(self.lambdas < TINY))

    @property
    def lambda_min(self) -> float:
        return float(self.lambdas.min())

    @property
    def lambda_max(self) -> float:
        return float(self.lambdas.max())

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["j", "lambda", "log_lambda"])
        for j, (lam, loglam) in enumerate(zip(self.lambdas, self.log_lambdas)):
            w.writerow([j, repr(float(lam)), repr(float(loglam))])
        return buf.getvalue()


# ---------------------------------------------------------------- closed forms


def spectrum_power(p: int, k: int) -> ToeplitzSpectrum:
    """lambda_j = (j+k)!/j! * (p+1)!/(k+p+1)! = prod_{i=1..k} (j+i)/(p+1+i)."""
    p = check_degree(p)
    if int(k) != k or k < 1:
        raise ValueError("k must be an integer >= 1")
    j = np.arange(p + 1, dtype=float)
    lam = np.ones(p + 1)
    loglam = np.zeros(p + 1)
    for i in range(1, k + 1):
        ratio = (j + i) / (p + 1 + i)
        lam *= ratio
        loglam += np.log(ratio)
    return ToeplitzSpectrum(p, lam, PowerVanish(k), "closed_form", loglam)


def _log_indicator_terms(p: int, r: float) -> np.ndarray:
    """log of C(p+1, m) x^m (1-x)^(p+1-m), m = 0..p+1, with x = r^2/(1+r^2)."""
    m = np.arange(p + 2, dtype=float)
    log_x = 2.0 * math.log(r) - math.log1p(r * r)
    log_1mx = -math.log1p(r * r)
    return log_binom(p + 1, m) + m * log_x + (p + 1 - m) * log_1mx


def spectrum_indicator(p: int, r: float) -> ToeplitzSpectrum:
    """Spectrum of the disc indicator 1_{D(0,r)}.

    lambda_j(r) = (1+r^2)^{-p-1} sum_{i=0}^{p-j} C(p+1, p-i-j) r^{2i+2j+2}. With
    m = i + j + 1 each term is a Binomial(p+1, Vol) probability, so lambda_j is
    the upper tail P[B >= j+1]. Summed in the log domain with exact rounding.
    """
    p = check_degree(p)
    if not (r > 0 and math.isfinite(r)):
        raise ValueError("disc radius must be finite and positive")
    logt = _log_indicator_terms(p, r)
    loglam = np.empty(p + 1)
    for j in range(p + 1):
        tail = logt[j + 1 :]
        top = float(tail.max())
        loglam[j] = top + math.log(math.fsum(np.exp(tail - top)))
    lam = np.exp(loglam)
    return ToeplitzSpectrum(p, lam, DiscIndicator(r), "closed_form", loglam)


def _expinv_log_integrand(p: int, j: int):
    c = -float(gammaln(j + 1.0))

    def g(t):
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = -t + (p + 1) * (np.log(t) - np.log1p(t)) + j * np.log1p(t) + c
        return np.where(t > 0, out, -np.inf)

    return g


def _expinv_mode(p: int, j: int) -> tuple[float, float]:
    """Maximiser of the log-integrand and a width from its curvature."""
    b = j - 1.0
    t = 0.5 * (b + math.sqrt(b * b + 4.0 * (p + 1)))
    curv = (p + 1) * (1.0 + 2.0 * t) / (t * (1.0 + t)) ** 2 - j / (1.0 + t) ** 2
    width = 1.0 / math.sqrt(curv) if curv > 0 else max(1.0, t)
    return t, width


def expinv_eigenvalue(p: int, j: int, rtol: float = 1e-13) -> tuple[float, float, dict]:
    """lambda_j = int_0^inf e^{-t} (t/(1+t))^{p+1} (1+t)^j / j! dt, as (value, log value, info)."""
    g = _expinv_log_integrand(p, j)
    mode, width = _expinv_mode(p, j)
    peak = float(g(np.array([mode]))[0])

    def f(t):
        return np.exp(g(t) - peak)

    bps = sorted({max(mode + k * width, 0.0) for k in (-6, -3, -1, 0, 1, 3, 6, 12)} - {0.0})
    res = integrate(f, 0.0, math.inf, QuadratureSpec(n=24, rtol=rtol, breakpoints=bps, half_line_scale=mode + width))
    logval = peak + math.log(res.value)
    return math.exp(logval), logval, {"achieved_tol": res.achieved_tol / res.value, "converged": res.converged}


def spectrum_expinv(p: int, rtol: float = 1e-13) -> ToeplitzSpectrum:
    """Spectrum of exp(-1/|z|^2) by adaptive quadrature of the one-dimensional integral form."""
    p = check_degree(p)
    lam = np.empty(p + 1)
    loglam = np.empty(p + 1)
    worst = 0.0
    converged = True
    for j in range(p + 1):
        lam[j], loglam[j], info = expinv_eigenvalue(p, j, rtol)
        worst = max(worst, info["achieved_tol"])
        converged &= info["converged"]
    return ToeplitzSpectrum(
        p, lam, ExpInverse(), "closed_form", loglam, info={"achieved_rtol": worst, "converged": converged}
    )


def expinv_lambda_max_alternating(p: int) -> float:
    """lambda_max for exp(-1/|z|^2) from the finite alternating sum.

    1 + sum_{j=1}^p (-1)^j (p-j)!/p! + (-1)^{p+1} e E_1(1) / p!.
    The terms decrease monotonically in magnitude, so this agrees with the
    integral form to rounding for every supported p.
    """
    p = check_degree(p)
    from scipy.special import exp1

    terms = [1.0]
    mag = 1.0
    for j in range(1, p + 1):
        mag /= p - j + 1  # (p-j)!/p!
        terms.append((-1) ** j * mag)
    e_e1 = math.e * float(exp1(1.0))
    terms.append((-1) ** (p + 1) * e_e1 * math.exp(-math.lgamma(p + 1)))
    return math.fsum(terms)


def constant_spectrum(p: int, c: float = 1.0) -> ToeplitzSpectrum:
    p = check_degree(p)
    return ToeplitzSpectrum(p, np.full(p + 1, float(c)), Constant(c), "closed_form")


# ------------------------------------------------------------- quadrature path


def _area_integrand(symbol: Symbol, p: int, j: int, logw: float):
    def f(u):
        u = np.asarray(u, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            lw = logw + j * np.log(u) + (p - j) * np.log1p(-u)
            dens = np.exp(lw)
        return symbol.of_area(u) * np.where((u > 0) & (u < 1), dens, 0.0)

    return f


def beta_breakpoints(p: int, j: int) -> list[float]:
    mode = j / p if p else 0.5
    sd = math.sqrt((j + 1.0) * (p - j + 1.0) / ((p + 2.0) ** 2 * (p + 3.0)))
    return [mode + k * sd for k in (-12, -6, -3, -1, 0, 1, 3, 6, 12) if 0 < mode + k * sd < 1]


def radial_average(symbol: Symbol, p: int, j: int, rtol: float = 1e-13) -> tuple[float, float]:
    """(p+1) C(p,j) int_0^1 f(u) u^j (1-u)^{p-j} du with its achieved tolerance."""
    logw = float(log_basis_weight(p)[j])
    # shift so the Beta density peaks near 1 and tiny eigenvalues keep relative accuracy
    mode = j / p if p else 0.5
    with np.errstate(divide="ignore", invalid="ignore"):
        peak = (j * math.log(mode) if j else 0.0) + ((p - j) * math.log1p(-mode) if p - j else 0.0)
    f = _area_integrand(symbol, p, j, logw - peak)
    bps = sorted(set(beta_breakpoints(p, j)) | {b for b in symbol.area_breakpoints() if 0 < b < 1})
    res = integrate(f, 0.0, 1.0, QuadratureSpec(n=24, rtol=rtol, atol=1e-300, breakpoints=bps))
    scale = math.exp(peak)
    return res.value * scale, res.achieved_tol * scale


def spectrum_quadrature(p: int, symbol: Symbol, rtol: float = 1e-13) -> ToeplitzSpectrum:
    """Independent quadrature oracle for any radial symbol."""
    p = check_degree(p)
    if not symbol.radial:
        raise ValueError("spectrum_quadrature needs a radial symbol; use toeplitz_matrix_general")
    lam = np.empty(p + 1)
    worst = 0.0
    for j in range(p + 1):
        lam[j], err = radial_average(symbol, p, j, rtol)
        if lam[j] > 0:
            worst = max(worst, err / lam[j])
    return ToeplitzSpectrum(p, lam, symbol, "quadrature", info={"achieved_rtol": worst})


def compute_spectrum(symbol: Symbol, p: int, method: str = "auto") -> ToeplitzSpectrum:
    """Closed form when one exists, otherwise the quadrature oracle (or dense path)."""
    p = check_degree(p)
    if method == "quadrature":
        return spectrum_quadrature(p, symbol)
    if method == "dense":
        return toeplitz_matrix_general(p, symbol)[1]
    if method not in ("auto", "closed_form"):
        raise ValueError(f"unknown method {method!r}")
    if isinstance(symbol, Constant):
        return constant_spectrum(p, symbol.c)
    if isinstance(symbol, PowerVanish):
        return spectrum_power(p, symbol.k)
    if isinstance(symbol, DiscIndicator):
        return spectrum_indicator(p, symbol.r)
    if isinstance(symbol, ExpInverse):
        return spectrum_expinv(p)
    if isinstance(symbol, Scaled):
        base = compute_spectrum(symbol.base, p, method)
        with np.errstate(divide="ignore"):
            shift = math.log(symbol.factor) if symbol.factor > 0 else -math.inf
        return ToeplitzSpectrum(p, symbol.factor * base.lambdas, symbol, base.method, base.log_lambdas + shift)
    if method == "closed_form":
        raise ValueError(f"no closed form for {symbol.text()}")
    if symbol.radial:
        return spectrum_quadrature(p, symbol)
    return toeplitz_matrix_general(p, symbol)[1]


# ------------------------------------------------------------------ dense path


def toeplitz_matrix_general(p: int, symbol: Symbol, panels: int | None = None, order: int = 16, n_theta: int | None = None):
    """Matrix of T_{f,p} in the basis S_j and its spectrum via Jacobi.

    Entries <f S_j, S_k> are integrated on a polar grid in (u, theta): a
    composite Gauss-Legendre rule in the area coordinate (panel edges aligned
    with the symbol's breakpoints) and the periodic trapezoid rule in theta,
    whose discrete Fourier coefficients pick out the j - k harmonic.
    """
    p = check_degree(p)
    if p > 100:
        raise ValueError("dense path is limited to p <= 100")
    panels = panels or max(64, 8 * int(math.sqrt(p + 1)) * 4)
    edges = np.linspace(0.0, 1.0, panels + 1)
    bps = [b for b in symbol.area_breakpoints() if 0 < b < 1]
    if bps:
        edges = np.unique(np.concatenate([edges, bps]))
    u, wu = composite_nodes(edges, order)
    m = n_theta or max(8, 4 * (p + 1))
    theta = 2.0 * np.pi * np.arange(m) / m
    rho = np.sqrt(u / (1.0 - u))
    z = rho[:, None] * np.exp(1j * theta[None, :])
    fvals = symbol(z) if not symbol.radial else np.repeat(symbol.of_area(u)[:, None], m, axis=1)
    # harmonic d: (1/m) sum_theta f e^{-i d theta}, indexed d mod m
    fhat = np.fft.fft(fvals, axis=1) / m
    logw = log_basis_weight(p)
    j = np.arange(p + 1)
    half_logw = 0.5 * logw
    lu = np.log(u)
    l1u = np.log1p(-u)
    a = np.empty((p + 1, p + 1), dtype=complex)
    for r in range(p + 1):
        s = 0.5 * (r + j)
        w = np.exp(half_logw[r] + half_logw[:, None] + s[:, None] * lu[None, :] + (p - s)[:, None] * l1u[None, :])
        # <f S_r, S_k>: f S_r conj(S_k) carries e^{i (r - k) theta}; its average is fhat at -(r-k)
        d = (j - r) % m
        a[r, :] = np.sum(w * wu[None, :] * fhat[:, d].T, axis=1)
    a = 0.5 * (a + a.conj().T)
    lam = jacobi_eigh(a)
    spec = ToeplitzSpectrum(p, np.clip(lam, 0.0, None), symbol, "dense", info={"raw_min": float(lam.min())})
    return a, spec


# -------------------------------------------------------------- summaries etc.


def symbol_integral(symbol: Symbol, rtol: float = 1e-14) -> float:
    """int f dV over CP^1 (unit total mass), as int_0^1 f(u) du for radial f."""
    if not symbol.radial:
        u, wu = composite_nodes(np.linspace(0, 1, 257), 16)
        m = 256
        theta = 2.0 * np.pi * np.arange(m) / m
        z = np.sqrt(u / (1 - u))[:, None] * np.exp(1j * theta[None, :])
        return float(np.dot(wu, symbol(z).mean(axis=1)))
    bps = [b for b in symbol.area_breakpoints() if 0 < b < 1]
    return integrate(symbol.of_area, 0.0, 1.0, QuadratureSpec(n=24, rtol=rtol, atol=1e-300, breakpoints=bps)).value


def spectral_summary(s: ToeplitzSpectrum) -> dict:
    target = (s.p + 1) * symbol_integral(s.symbol)
    trace = math.fsum(s.lambdas)
    return {
        "min": s.lambda_min,
        "max": s.lambda_max,
        "trace": trace,
        "trace_target": target,
        "rel_error": abs(trace - target) / target if target else abs(trace),
    }


def min_eig_asymptotics(symbol: Symbol, p_list) -> list[dict]:
    """Per-p diagnostics of the smallest eigenvalue against its known asymptotics.

    PowerVanish(k): lambda_min p^k / k! - (1 + k(k+3)/(2p)) as ``deviation``;
    the exact expansion is 1 - k(k+3)/(2p) + O(p^-2), reported as
    ``deviation_corrected``.
    ExpInverse: -log(lambda_min)/sqrt(p), tending to 2, and the lower bound
    exp(-2 sqrt(p) - 1/sqrt(p)).
    DiscIndicator(r): lambda_min / Vol^{p+1}, exactly 1.
    """
    rows = []
    for p in p_list:
        if isinstance(symbol, PowerVanish):
            k = symbol.k
            s = spectrum_power(p, k)
            scaled = math.exp(s.log_lambdas[0] + k * math.log(p) - math.lgamma(k + 1))
            first = k * (k + 3) / (2.0 * p)
            # the exact product prod 1/(1 + (i+1)/p) expands with a minus sign
            rows.append({"p": p, "lambda_min": s.lambda_min, "scaled": scaled,
                         "deviation": scaled - (1.0 + first),
                         "deviation_corrected": scaled - (1.0 - first)})
        elif isinstance(symbol, ExpInverse):
            lam, loglam, info = expinv_eigenvalue(p, 0)
            bound = -2.0 * math.sqrt(p) - 1.0 / math.sqrt(p) if p else -math.inf
            rows.append({"p": p, "lambda_min": lam, "log_lambda_min": loglam,
                         "rate": -loglam / math.sqrt(p) if p else math.nan,
                         "lower_bound": math.exp(bound), "bound_holds": loglam >= bound})
        elif isinstance(symbol, DiscIndicator):
            s = spectrum_indicator(p, symbol.r)
            logvol = math.log(symbol.volume)
            rows.append({"p": p, "lambda_min": s.lambda_min,
                         "ratio": math.exp(float(s.log_lambdas.min()) - (p + 1) * logvol)})
        else:
            raise ValueError("min_eig_asymptotics supports PowerVanish, ExpInverse, DiscIndicator")
    return rows


class PreconditionError(ValueError):
    pass


def _pointwise_ordered(f1: Symbol, f2: Symbol, slack: float = 1e-14) -> bool:
    if f1.radial and f2.radial:
        u = np.concatenate([np.linspace(0, 1, 4001)[1:-1], np.asarray(f1.area_breakpoints() + f2.area_breakpoints())])
        u = np.concatenate([u, np.clip(u * (1 + 1e-9), 0, 1 - 1e-15), u * (1 - 1e-9)])
        u = u[(u > 0) & (u < 1)]
        return bool(np.all(f1.of_area(u) <= f2.of_area(u) + slack))
    rho = np.linspace(0, 20, 401)
    th = np.linspace(0, 2 * np.pi, 64, endpoint=False)
    z = rho[:, None] * np.exp(1j * th[None, :])
    return bool(np.all(f1(z) <= f2(z) + slack))


def weyl_monotonicity_check(f1: Symbol, f2: Symbol, p: int, slack: float = 1e-12) -> dict:
    """Sorted eigenvalues of T_{f1,p} are dominated by those of T_{f2,p} when f1 <= f2."""
    if not _pointwise_ordered(f1, f2):
        raise PreconditionError("symbols are not pointwise ordered")
    s1 = np.sort(compute_spectrum(f1, p).lambdas)
    s2 = np.sort(compute_spectrum(f2, p).lambdas)
    gap = s2 - s1
    return {"p": p, "holds": bool(np.all(gap >= -slack)), "min_gap": float(gap.min()),
            "lambdas_1": s1, "lambdas_2": s2}


def superlevel_volume(symbol: Symbol, a: float) -> float:
    """Vol({f > a}) for a radial symbol, by fine sampling in the area coordinate."""
    u, wu = composite_nodes(np.unique(np.concatenate([np.linspace(0, 1, 2049), symbol.area_breakpoints()])), 8)
    return float(np.dot(wu, (symbol.of_area(u) > a).astype(float)))


def spectral_cdf_compare(symbol: Symbol, p: int, thresholds=None) -> list[dict]:
    """Fraction of eigenvalues above a against Vol({f > a}) at each threshold a."""
    s = compute_spectrum(symbol, p)
    sup = symbol.sup()
    if thresholds is None:
        thresholds = np.linspace(0, sup, 11)[1:-1]
    out = []
    for a in thresholds:
        frac = float(np.count_nonzero(s.lambdas > a)) / (p + 1)
        out.append({"a": float(a), "fraction": frac, "volume": superlevel_volume(symbol, a)})
    return out
