"""Acceptance suite: each criterion at its stated tolerance and runtime budget.

``run_all`` prints one PASS/FAIL line per criterion. Nothing here is relaxed
to make a criterion pass; a failing line carries the measured numbers.
"""

from __future__ import annotations

import math
import shutil
import sys
import tempfile
import time
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

from .geometry import SQRT_PI
from .roots import find_roots_batch, vieta_error
from .sampler import kernel_gaussian_decay_check, log_normalized_kernel, sample_sections
from .spectra import (
    compute_spectrum,
    min_eig_asymptotics,
    spectral_summary,
    spectrum_indicator,
    spectrum_power,
    spectrum_quadrature,
    weyl_monotonicity_check,
)
from .stats import (
    FSDisc,
    RadialBump,
    all_zeros,
    expectation_exact,
    hole_frequency,
    ks_vs_fs,
    linear_statistics,
    mass_exact_moments,
    mass_lln_report,
    report_from_samples,
    variance_bipotential,
    variance_leading_term,
)
from .symbols import Constant, DiscIndicator, ExpInverse, PowerVanish, RadialTabulated, Scaled

DEFAULT_PHI = RadialBump(1.0, 1.0)


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: str
    seconds: float = 0.0
    skipped: bool = False

    def line(self) -> str:
        tag = "SKIP" if self.skipped else ("PASS" if self.passed else "FAIL")
        return f"[{tag}] {self.number:2d} {self.title}: {self.detail} ({self.seconds:.1f} s)"

    def to_dict(self) -> dict:
        return {"number": self.number, "title": self.title, "passed": self.passed,
                "skipped": self.skipped, "detail": self.detail, "seconds": self.seconds}


def _rel(a, b):
    a, b = np.asarray(a, float), np.asarray(b, float)
    return np.abs(a - b) / np.maximum(np.abs(b), 1e-300)


@lru_cache(maxsize=None)
def _zeros(symbol, p: int, trials: int, seed: int):
    return all_zeros(compute_spectrum(symbol, p), seed, trials)


@lru_cache(maxsize=None)
def _linear(symbol, p: int, phi, trials: int, seed: int):
    idx, zs = _zeros(symbol, p, trials, seed)
    return report_from_samples(linear_statistics(zs, phi), idx)


# ---------------------------------------------------------------- criteria


def c1_spectrum_exactness():
    worst = {}
    for sym in (PowerVanish(1), PowerVanish(2), PowerVanish(3), DiscIndicator(1.0)):
        w = 0.0
        for p in range(0, 101):
            closed = compute_spectrum(sym, p, "closed_form").lambdas
            quad = spectrum_quadrature(p, sym).lambdas
            err = float(np.max(_rel(quad, closed)))
            tol = 1e-8 if (isinstance(sym, DiscIndicator) and p == 100) else 1e-10
            w = max(w, err / tol)
        worst[sym.text()] = w
    points = [
        np.allclose(spectrum_indicator(1, 1.0).lambdas, [0.75, 0.25], rtol=1e-14, atol=0),
        abs(spectrum_indicator(3, 1.0).lambda_min - 1 / 16) <= 1e-15,
        abs(spectrum_power(1, 1).lambda_min - 1 / 3) <= 1e-15,
    ]
    ok = all(v <= 1 for v in worst.values()) and all(points)
    detail = "worst err/tol " + ", ".join(f"{k}={v:.2g}" for k, v in worst.items()) + f"; point checks {points}"
    return ok, detail, 10.0


def c2_trace_identity():
    syms = [Constant(1.0), Constant(2.5), PowerVanish(1), PowerVanish(2), PowerVanish(3), ExpInverse(),
            DiscIndicator(0.5), DiscIndicator(1.0), DiscIndicator(2.0),
            RadialTabulated((0.0, 0.5, 1.0, 2.0), (1.0, 0.8, 0.3, 0.1))]
    ps = [0, 1, 2, 3, 5, 10, 20, 50, 100, 150, 200]
    worst, where = 0.0, None
    for s in syms:
        for p in ps:
            e = spectral_summary(compute_spectrum(s, p))["rel_error"]
            if e > worst:
                worst, where = e, (s.text(), p)
    return worst <= 1e-10, f"max relative trace error {worst:.2e} at {where}", None


def c3_power_min_asymptotics():
    worst, where = 0.0, None
    for k in (1, 2, 3):
        for row in min_eig_asymptotics(PowerVanish(k), range(50, 401)):
            r = abs(row["deviation"]) * row["p"] ** 2 / 5.0
            if r > worst:
                worst, where = r, (k, row["p"], row["deviation"])
    return worst <= 1, f"max |dev| p^2/5 = {worst:.3g} at (k, p, dev) = {where}", 1.0


def c4_expinv_min_bounds():
    rows = min_eig_asymptotics(ExpInverse(), (64, 100, 196, 400))
    bounds = all(r["bound_holds"] for r in rows)
    rates = [r["rate"] for r in rows]
    in_band = [1.8 <= x <= 2.2 for x in rates]
    return bounds and all(in_band), f"lower bound holds={bounds}; rates {[round(x, 4) for x in rates]} in [1.8, 2.2]: {in_band}", 30.0


def _random_pair(rng):
    kind = int(rng.integers(5))
    if kind == 0:
        base = [PowerVanish(int(rng.integers(1, 4))), ExpInverse(), DiscIndicator(float(rng.uniform(0.3, 3)))][int(rng.integers(3))]
        a, b = np.sort(rng.uniform(0, 2, 2))
        return Scaled(base, float(a)), Scaled(base, float(b))
    if kind == 1:
        r1, r2 = np.sort(rng.uniform(0.1, 4, 2))
        return DiscIndicator(float(r1)), DiscIndicator(float(r2))
    if kind == 2:
        k1, k2 = np.sort(rng.integers(1, 6, 2))
        return PowerVanish(int(k2)), PowerVanish(int(k1))
    if kind == 3:
        radii = tuple(np.cumsum(rng.uniform(0.2, 1.0, 5)) - 0.2)
        v1 = rng.uniform(0, 1, 5)
        v2 = v1 + rng.uniform(0, 0.5, 5)
        return RadialTabulated(radii, tuple(v1)), RadialTabulated(radii, tuple(v2))
    c = float(rng.uniform(1, 2))
    return ExpInverse(), Constant(c)


def c5_weyl_monotonicity():
    rng = np.random.default_rng(20240517)
    fails, worst = 0, math.inf
    for _ in range(200):
        f1, f2 = _random_pair(rng)
        p = int(rng.integers(1, 61))
        r = weyl_monotonicity_check(f1, f2, p, slack=1e-12)
        fails += not r["holds"]
        worst = min(worst, r["min_gap"])
    return fails == 0, f"{200 - fails}/200 pairs dominated; smallest sorted gap {worst:.3g}", None


def c6_kernel_asymptotics():
    spec_max = 0.0
    for p in (1, 5, 50, 400):
        s = compute_spectrum(Constant(1.0), p)
        w = np.array([0.01, 0.3, 1.0, 3.0]) * np.exp(0.7j)
        logn = log_normalized_kernel(s, 0.0, w)
        exact = -0.5 * p * np.log1p(np.abs(w) ** 2)
        spec_max = max(spec_max, float(np.max(np.abs(logn - exact) / np.abs(exact))))
    rep = kernel_gaussian_decay_check(Constant(1.0), [400], offsets=(1.0,))
    ratio = rep["near"][0]["ratio"]
    far = rep["far"][0]
    ok = spec_max <= 1e-10 and abs(ratio - 1) <= 0.01 and far["holds"]
    return ok, (f"exact-form rel err {spec_max:.1e}; ratio at |w|=p^-1/2 {ratio:.5f}; "
                f"far N {far['N']:.2e} <= {far['bound']:.2e}: {far['holds']}"), 1.0


def c7_equidistribution():
    _, zs = _zeros(Constant(1.0), 50, 400, 0)
    ks_const = ks_vs_fs(zs)
    _, zd = _zeros(DiscIndicator(1.0), 20, 1000, 0)
    half = SQRT_PI / 4
    ks_in = ks_vs_fs(zd, half)
    ks_all = ks_vs_fs(zd)
    ok = ks_const <= 0.02 and ks_in <= 0.03 and ks_all > 0.05
    return ok, (f"const p=50 KS {ks_const:.4f} (<=0.02); disc p=20 KS on [0, sqrt(pi)/4] "
                f"{ks_in:.4f} (<=0.03), global {ks_all:.4f} (>0.05)"), 60.0


def c8_number_variance():
    lead = variance_leading_term(DEFAULT_PHI)
    r100 = _linear(Constant(1.0), 100, DEFAULT_PHI, 2000, 0)
    scaled = 100 * r100.variance / lead
    r50 = _linear(Constant(1.0), 50, DEFAULT_PHI, 5000, 0)
    bip = variance_bipotential(compute_spectrum(Constant(1.0), 50), DEFAULT_PHI)["value"]
    rel = abs(bip - r50.variance) / r50.variance
    ok = abs(scaled - 1) <= 0.2 and rel <= 0.1
    return ok, f"p Var_MC / leading = {scaled:.4f} at p=100 (+-20%); bipotential vs Var_MC at p=50: {rel:.2%} (<=10%)", None


def c9_clt():
    r = _linear(Constant(1.0), 100, DEFAULT_PHI, 2000, 0)
    ok = r.ks_vs_normal <= 0.05 and abs(r.skewness) <= 0.15 and abs(r.excess_kurtosis) <= 0.3
    return ok, f"KS {r.ks_vs_normal:.4f}, skew {r.skewness:.4f}, excess kurtosis {r.excess_kurtosis:.4f}", 300.0


def c10_expectation():
    syms = (Constant(1.0), DiscIndicator(1.0), PowerVanish(1))
    phis = (RadialBump(0.5, 1.0), RadialBump(0.8, 1.0), RadialBump(1.5, 1.0))
    worst, where = 0.0, None
    for s in syms:
        for p in (10, 20, 50):
            spec = compute_spectrum(s, p)
            for phi in phis:
                r = _linear(s, p, phi, 2000, 1)
                z = abs(r.mean - expectation_exact(spec, phi)) / r.std_error
                if z > worst:
                    worst, where = z, (s.text(), p, phi.text())
    return worst <= 4, f"max |MC mean - exact| / SE = {worst:.2f} at {where} over 27 cases", None


def c11_hole():
    rep = hole_frequency(Constant(1.0), FSDisc.chart(0.3), [5, 10, 20, 40], 5000, 0)
    f = [round(float(x), 4) for x in rep.frequencies()]
    return rep.decreasing(), f"frequencies {f} for p = 5, 10, 20, 40", None


def c12_mass():
    g = Constant(1.0)
    err = 0.0
    for p in (1, 2, 5, 10, 50, 100, 200):
        mean, var = mass_exact_moments(compute_spectrum(Constant(1.0), p), g)
        err = max(err, abs(mean - (p + 1) / p) / ((p + 1) / p), abs(var - (p + 1) / p**2) / ((p + 1) / p**2))
    rep = mass_lln_report(Constant(1.0), g, 200, 0)
    _, var200 = mass_exact_moments(compute_spectrum(Constant(1.0), 200), g)
    rescaled = 200 * var200
    ok = err <= 1e-12 and abs(rep["average"] - 1) <= 0.05 and abs(rescaled - 1) <= 0.01
    return ok, (f"moment rel err {err:.1e}; LLN average {rep['average']:.4f} (1 +- 0.05); "
                f"p Var at p=200 = {rescaled:.4f}"), None


def c13_root_integrity():
    syms = (Constant(1.0), PowerVanish(1), PowerVanish(2), PowerVanish(3), ExpInverse(), DiscIndicator(1.0))
    total = bad_count = 0
    worst_res = worst_vieta = 0.0
    per = 334
    for s in syms:
        for p in (5, 20, 50, 100, 200):
            spec = compute_spectrum(s, p)
            batch = sample_sections(spec, 13, np.arange(per))
            zs = find_roots_batch(batch.coeffs, batch.truncated_tail)
            for i, z in enumerate(zs):
                total += 1
                bad_count += len(z.roots) + z.mult_infinity != p
                worst_res = max(worst_res, z.residual_max)
                if z.mult_infinity == 0:
                    worst_vieta = max(worst_vieta, vieta_error(batch.coeffs[i], z))
    ok = bad_count == 0 and worst_res <= 1e-8 and worst_vieta <= 1e-8
    return ok, f"{total} samples, count violations {bad_count}, max residual {worst_res:.1e}, max Vieta {worst_vieta:.1e}", None


def c14_determinism():
    from .cli import main

    runs = [
        ["spectrum", "--symbol", "disc:1", "--p", "1"],
        ["sample-zeros", "--symbol", "expinv", "--p", "30", "--trials", "50", "--seed", "3"],
        ["histogram", "--symbol", "const:1", "--p", "20", "--rn", "1000", "--seed", "7"],
        ["clt", "--symbol", "const:1", "--p", "20", "--trials", "1000", "--seed", "5"],
        ["hole", "--p-list", "5,10", "--trials", "400", "--seed", "9"],
        ["mass", "--p", "20", "--seed", "2", "--format", "json"],
        ["expectation", "--symbol", "disc:1", "--p", "10", "--phi", "bump:0.8", "--trials", "200"],
    ]
    tmp = Path(tempfile.mkdtemp(prefix="tzl-det-"))
    mismatched = []
    try:
        for k, args in enumerate(runs):
            outs = []
            for rep in range(2):
                # same output path both times so the recorded config is identical
                out = tmp / str(k)
                shutil.rmtree(out, ignore_errors=True)
                code = main([*args, "--threads", "1", "--out", str(out)])
                if code != 0:
                    mismatched.append(f"{args[0]} exit {code}")
                files = {}
                for f in sorted(out.iterdir()):
                    data = f.read_bytes()
                    if f.name == "run.json":
                        # wall time is the only field allowed to differ
                        data = b"\n".join(l for l in data.split(b"\n") if b"wall_time_s" not in l)
                    files[f.name] = data
                outs.append(files)
            if outs[0] != outs[1]:
                mismatched.append(args[0])
    finally:
        shutil.rmtree(tmp, ignore_errors=True)
    return not mismatched, f"{len(runs)} commands rerun; mismatches: {mismatched or 'none'}", None


CRITERIA = [
    (1, "Spectrum exactness", c1_spectrum_exactness, False),
    (2, "Trace identity", c2_trace_identity, False),
    (3, "PowerVanish lambda_min expansion", c3_power_min_asymptotics, False),
    (4, "ExpInverse lambda_min bounds", c4_expinv_min_bounds, False),
    (5, "Weyl monotonicity", c5_weyl_monotonicity, False),
    (6, "Kernel asymptotics", c6_kernel_asymptotics, False),
    (7, "Equidistribution", c7_equidistribution, True),
    (8, "Number variance", c8_number_variance, True),
    (9, "CLT", c9_clt, True),
    (10, "Expectation current", c10_expectation, True),
    (11, "Hole probability", c11_hole, True),
    (12, "Mass LLN", c12_mass, False),
    (13, "Root-finder integrity", c13_root_integrity, True),
    (14, "Determinism", c14_determinism, True),
]


def run_criterion(number: int) -> CriterionResult:
    for n, title, fn, _ in CRITERIA:
        if n == number:
            t = time.perf_counter()
            ok, detail, budget = fn()
            dt = time.perf_counter() - t
            if budget is not None and dt > budget:
                ok = False
                detail += f"; runtime {dt:.1f} s over the {budget:g} s budget"
            return CriterionResult(n, title, bool(ok), detail, dt)
    raise KeyError(number)


def run_all(quick: bool = False, stream=sys.stdout) -> list[CriterionResult]:
    out = []
    for n, title, _, slow in CRITERIA:
        if quick and slow:
            r = CriterionResult(n, title, True, "skipped (--quick)", 0.0, skipped=True)
        else:
            r = run_criterion(n)
        out.append(r)
        if stream is not None:
            print(r.line(), file=stream, flush=True)
    return out
