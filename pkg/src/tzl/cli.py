"""Command-line front end: ``tzl <command> [options]``.

Every run writes its artifacts and a ``run.json`` manifest into ``--out``.
Exit status is 0 on success, 1 on a precondition error and 2 when a numerical
method fails to converge.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import platform
import secrets
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .basis import P_MAX
from .jacobi import JacobiConvergenceError
from .quadrature import QuadratureError
from .roots import MaxIterationsError, zeros_to_csv
from .sampler import kernel_gaussian_decay_check
from .spectra import PreconditionError, compute_spectrum, spectral_summary
from .stats import (
    FSDisc,
    LogProfile,
    RadialBump,
    TestFunction,
    all_zeros,
    clt_report,
    expectation_terms,
    fs_histogram,
    hole_frequency,
    ks_vs_fs,
    linear_statistic_samples,
    mass_csv,
    mass_exact_moments,
    mass_lln_report,
    report_from_samples,
    variance_bipotential,
    variance_leading_term,
)
from .symbols import parse_symbol

COMMANDS = ("spectrum", "sample-zeros", "histogram", "clt", "variance", "expectation",
            "hole", "mass", "kernel-check", "selftest")

SCHEMAS = {
    "spectrum.csv": [("j", int), ("lambda", float), ("log_lambda", float)],
    "zeros.csv": [("trial", int), ("re", float), ("im", float), ("r_fs", float)],
    "hist.csv": [("bin_lo", float), ("bin_hi", float), ("count", int), ("density", float), ("psi_mid", float)],
    "clt.csv": [("trial", int), ("Z", float), ("Z_standardized", float)],
    "hole.csv": [("p", int), ("trials", int), ("holes", int), ("frequency", float)],
    "mass.csv": [("p", int), ("Y", float)],
}

# options that make up a run configuration, with their defaults
DEFAULTS = {
    "symbol": "const:1",
    "p": 20,
    "p_list": None,
    "trials": None,
    "rn": None,
    "seed": "0",
    "bins": 50,
    "phi": "bump:1,1",
    "region": 0.3,
    "format": "csv",
    "out": "tzl-out",
    "threads": None,
    "quick": False,
}


class SchemaError(ValueError):
    pass


def parse_phi(text: str) -> TestFunction:
    """``bump:rho0[,amplitude]`` or ``log``."""
    head, _, arg = text.strip().partition(":")
    if head == "bump":
        parts = [float(x) for x in arg.split(",") if x]
        if not 1 <= len(parts) <= 2:
            raise ValueError(f"malformed test function {text!r}")
        return RadialBump(*parts)
    if head == "log" and not arg:
        return LogProfile()
    raise ValueError(f"unknown test function {text!r}")


def parse_seed(value) -> int:
    if isinstance(value, str) and value.strip().lower() == "random":
        return secrets.randbits(64)
    seed = int(value)
    if not 0 <= seed < 2**64:
        raise ValueError("seed must be a 64-bit unsigned integer")
    return seed


def _number(x):
    """JSON-safe number: decimal strings outside the safe double exponent range."""
    if isinstance(x, (np.floating, float)):
        x = float(x)
        if not math.isfinite(x) or (x != 0 and not 1e-300 <= abs(x) <= 1e300):
            return repr(x)
        return x
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, np.ndarray):
        return [_number(v) for v in x.tolist()]
    if isinstance(x, dict):
        return {str(k): _number(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_number(v) for v in x]
    return x


def dump_json(obj) -> str:
    return json.dumps(_number(obj), indent=2, sort_keys=True) + "\n"


def validate_csv(name: str, text: str) -> None:
    schema = SCHEMAS[name]
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0] != [c for c, _ in schema]:
        raise SchemaError(f"{name}: bad header {rows[:1]}")
    for k, row in enumerate(rows[1:], 2):
        if len(row) != len(schema):
            raise SchemaError(f"{name}:{k}: expected {len(schema)} fields")
        for value, (col, typ) in zip(row, schema):
            try:
                typ(value)
            except ValueError:
                raise SchemaError(f"{name}:{k}: {col}={value!r} is not {typ.__name__}") from None


def csv_to_records(name: str, text: str) -> list[dict]:
    schema = dict(SCHEMAS[name])
    return [{k: schema[k](v) for k, v in row.items()} for row in csv.DictReader(io.StringIO(text))]


class Run:
    """Collects artifacts and writes them, validated, at the end."""

    def __init__(self, config: dict):
        self.config = config
        self.fmt = config["format"]
        self.out = Path(config["out"])
        self.files: dict[str, str] = {}
        self.report: dict = {}

    def table(self, name: str, text: str) -> None:
        validate_csv(name, text)
        if self.fmt == "json":
            self.files[name.replace(".csv", ".json")] = dump_json(csv_to_records(name, text))
        else:
            self.files[name] = text

    def write(self, wall: float) -> None:
        self.out.mkdir(parents=True, exist_ok=True)
        if self.report:
            self.files["report.json"] = dump_json(self.report)
        for name, text in self.files.items():
            with open(self.out / name, "w", newline="") as fh:
                fh.write(text)
        manifest = {
            "config": self.config,
            "seed": self.config["seed"],
            "artifacts": sorted(self.files),
            "versions": versions(),
            "wall_time_s": round(wall, 3),
        }
        with open(self.out / "run.json", "w", newline="") as fh:
            fh.write(dump_json(manifest))


def versions() -> dict:
    import numba
    import scipy

    return {"tzl": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "numba": numba.__version__, "python": platform.python_version()}


def set_threads(n) -> None:
    n = n if n is not None else os.environ.get("TZL_THREADS")
    if n is None:
        return
    import numba

    n = int(n)
    if n < 1:
        raise ValueError("threads must be >= 1")
    numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))


def _p_list(cfg) -> list[int]:
    if cfg["p_list"]:
        vals = cfg["p_list"]
        vals = [int(x) for x in (vals.split(",") if isinstance(vals, str) else vals)]
    else:
        vals = [int(cfg["p"])]
    for p in vals:
        if not 0 <= p <= P_MAX:
            raise PreconditionError(f"degree {p} outside [0, {P_MAX}]")
    return vals


def _trials(cfg, default: int) -> int:
    if cfg["trials"] is not None:
        return int(cfg["trials"])
    if cfg["rn"] is not None:
        return int(cfg["rn"])
    return default


# ------------------------------------------------------------------ commands


def cmd_spectrum(cfg, run: Run):
    sym = parse_symbol(cfg["symbol"])
    for p in _p_list(cfg):
        s = compute_spectrum(sym, p)
        name = "spectrum.csv" if cfg["p_list"] is None else f"spectrum_p{p}.csv"
        SCHEMAS.setdefault(name, SCHEMAS["spectrum.csv"])
        run.table(name, s.to_csv())
        run.report[f"p{p}"] = {**spectral_summary(s), "method": s.method, "underflow": s.underflow}
    if cfg["p_list"] is None and run.fmt == "csv":
        sys.stdout.write(run.files["spectrum.csv"])


def _zeros_run(cfg, run: Run, default_total: int = 20000):
    sym = parse_symbol(cfg["symbol"])
    p = _p_list(cfg)[0]
    if p < 1:
        raise PreconditionError("sections of degree 0 have no zeros")
    trials = _trials(cfg, max(1, default_total // p))
    spec = compute_spectrum(sym, p)
    idx, zs = all_zeros(spec, cfg["seed"], trials)
    run.table("zeros.csv", zeros_to_csv(zs, idx))
    run.report.update({
        "p": p, "trials": trials, "zeros": int(sum(z.degree for z in zs)),
        "truncated_tail_trials": int(sum(z.truncated_tail for z in zs)),
        "residual_max": max((z.residual_max for z in zs), default=0.0),
    })
    return spec, zs


def cmd_sample_zeros(cfg, run: Run):
    _zeros_run(cfg, run)


def cmd_histogram(cfg, run: Run):
    spec, zs = _zeros_run(cfg, run)
    h = fs_histogram(zs, int(cfg["bins"]))
    run.table("hist.csv", h.to_csv())
    half = math.sqrt(math.pi) / 4
    run.report.update({"ks_vs_fs": ks_vs_fs(zs), "ks_inner_half": ks_vs_fs(zs, half),
                       "ks_inner_half_conditional": ks_vs_fs(zs, half, conditional=True)})


def cmd_clt(cfg, run: Run):
    sym = parse_symbol(cfg["symbol"])
    p = _p_list(cfg)[0]
    phi = parse_phi(cfg["phi"])
    spec = compute_spectrum(sym, p)
    rep = clt_report(spec, phi, _trials(cfg, 2000), cfg["seed"])
    run.table("clt.csv", rep.to_csv())
    run.report.update(rep.to_dict())
    run.report["leading_variance"] = variance_leading_term(phi) / p


def cmd_variance(cfg, run: Run):
    sym = parse_symbol(cfg["symbol"])
    phi = parse_phi(cfg["phi"])
    lead = variance_leading_term(phi)
    rows = {}
    for p in _p_list(cfg):
        spec = compute_spectrum(sym, p)
        v = variance_bipotential(spec, phi)
        row = {"bipotential": v["value"], "leading": lead / p, "p_times_bipotential": p * v["value"],
               "leading_constant": lead}
        if cfg["trials"]:
            idx, z = linear_statistic_samples(spec, phi, int(cfg["trials"]), cfg["seed"])
            rep = report_from_samples(z, idx)
            row.update({"mc_variance": rep.variance, "mc_variance_se": rep.variance_std_error})
        rows[f"p{p}"] = row
    run.report.update(rows)


def cmd_expectation(cfg, run: Run):
    sym = parse_symbol(cfg["symbol"])
    phi = parse_phi(cfg["phi"])
    for p in _p_list(cfg):
        spec = compute_spectrum(sym, p)
        a, b = expectation_terms(spec, phi)
        row = {"exact": a + b, "flat_term": a, "kernel_term": b}
        if cfg["trials"]:
            idx, z = linear_statistic_samples(spec, phi, int(cfg["trials"]), cfg["seed"])
            row.update({"mc_mean": float(np.mean(z)), "mc_se": float(np.std(z, ddof=1) / math.sqrt(z.size))})
            row["z_score"] = (row["mc_mean"] - row["exact"]) / row["mc_se"] if row["mc_se"] > 0 else 0.0
        run.report[f"p{p}"] = row


def cmd_hole(cfg, run: Run):
    sym = parse_symbol(cfg["symbol"])
    region = FSDisc.chart(float(cfg["region"]))
    ps = _p_list(cfg) if cfg["p_list"] else [5, 10, 20, 40]
    rep = hole_frequency(sym, region, ps, _trials(cfg, 5000), cfg["seed"])
    run.table("hole.csv", rep.to_csv())
    run.report.update({"region_chart_radius": float(cfg["region"]), "region_volume": region.volume,
                       "decreasing": rep.decreasing(), "rows": rep.rows})


def cmd_mass(cfg, run: Run):
    sym = parse_symbol(cfg["symbol"])
    n = _p_list(cfg)[0]
    if n < 1:
        raise PreconditionError("mass LLN needs N >= 1")
    g = parse_symbol("const:1")
    rep = mass_lln_report(sym, g, n, cfg["seed"])
    run.table("mass.csv", mass_csv(rep["p"], rep["Y"]))
    mean, var = mass_exact_moments(compute_spectrum(sym, n), g)
    run.report.update({"N": n, "average": rep["average"], "exact_average": rep["exact_average"],
                       "target": rep["target"], "exact_mean_at_N": mean, "exact_variance_at_N": var,
                       "N_times_variance": n * var})


def cmd_kernel_check(cfg, run: Run):
    sym = parse_symbol(cfg["symbol"])
    ps = _p_list(cfg) if cfg["p_list"] else [100, 400]
    run.report.update(kernel_gaussian_decay_check(sym, ps))


def cmd_selftest(cfg, run: Run):
    from .acceptance import run_all

    results = run_all(quick=bool(cfg["quick"]), stream=sys.stdout)
    run.report["criteria"] = [r.to_dict() for r in results]
    if not all(r.passed for r in results):
        run.report["status"] = "fail"
        return 3
    run.report["status"] = "pass"
    return 0


HANDLERS = {
    "spectrum": cmd_spectrum, "sample-zeros": cmd_sample_zeros, "histogram": cmd_histogram,
    "clt": cmd_clt, "variance": cmd_variance, "expectation": cmd_expectation, "hole": cmd_hole,
    "mass": cmd_mass, "kernel-check": cmd_kernel_check, "selftest": cmd_selftest,
}


# -------------------------------------------------------------------- parsing


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with any of the options below (flags win)")
    common.add_argument("--symbol", help="const:c | power:k | expinv | disc:r | tab:r,v;...")
    common.add_argument("--p", type=int, help="degree (for mass: the largest degree N)")
    common.add_argument("--p-list", dest="p_list", help="comma-separated degrees")
    common.add_argument("--trials", type=int)
    common.add_argument("--rn", type=int, help="repetitions (default 20000 // p for zero histograms)")
    common.add_argument("--seed", help="64-bit seed or 'random' (default 0)")
    common.add_argument("--bins", type=int)
    common.add_argument("--phi", help="test function: bump:rho0[,A] | log")
    common.add_argument("--region", type=float, help="chart radius of the hole disc about 0")
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--out", help="output directory")
    common.add_argument("--threads", type=int, help="worker threads (also TZL_THREADS)")
    common.add_argument("--quick", action="store_true", default=None, help="selftest: skip the slow suites")
    parser = argparse.ArgumentParser(prog="tzl", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"tzl {__version__}")
    sub = parser.add_subparsers(dest="command")
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def resolve_config(argv) -> dict:
    """Merge defaults, an optional JSON config and explicit flags, in that order."""
    argv = list(argv)
    parser = build_parser()
    file_cfg: dict = {}
    if "--config" in argv:
        path = argv[argv.index("--config") + 1]
        with open(path) as fh:
            file_cfg = json.load(fh)
        if not isinstance(file_cfg, dict):
            raise ValueError("config file must hold a JSON object")
        file_cfg = {k.replace("-", "_"): v for k, v in file_cfg.items()}
        unknown = set(file_cfg) - set(DEFAULTS) - {"command"}
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        if not any(a in COMMANDS for a in argv) and "command" in file_cfg:
            argv = [file_cfg["command"], *argv]
    ns = parser.parse_args(argv)
    if ns.command is None:
        parser.error("a command is required")
    cfg = dict(DEFAULTS)
    cfg.update({k: v for k, v in file_cfg.items() if k != "command"})
    cfg.update({k: v for k, v in vars(ns).items() if k in DEFAULTS and v is not None})
    cfg["command"] = ns.command
    cfg["seed"] = parse_seed(cfg["seed"])
    return cfg


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = resolve_config(argv)
    except SystemExit as exc:
        # argparse usage errors are bad input, not numerical failures
        return 0 if exc.code in (0, None) else 1
    except (ValueError, OSError) as exc:
        print(f"tzl: error: {exc}", file=sys.stderr)
        return 1
    start = time.perf_counter()
    run = Run(cfg)
    try:
        set_threads(cfg["threads"])
        status = HANDLERS[cfg["command"]](cfg, run) or 0
        run.write(time.perf_counter() - start)
    except (MaxIterationsError, QuadratureError, JacobiConvergenceError) as exc:
        print(f"tzl: convergence failure: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"tzl: error: {exc}", file=sys.stderr)
        return 1
    return status


if __name__ == "__main__":
    sys.exit(main())
