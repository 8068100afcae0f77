"""Command-line entry point: fit, test, simulate, mc, power-curve, kernelvar.

Test results are emitted as JSON (stdout or ``--out``), tables and curves as
CSV.  Every result file written to disk is accompanied by a
``<file>.manifest.json`` sidecar holding the resolved parameters (so a run
can be replayed bit-identically) and, in a separate block, wall-clock
timing.  Exit codes: 0 success, 1 usage or data error, 2 numerical error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .causality import wald_test, wild_bootstrap_test
from .dataio import (
    Dataset,
    demean,
    difference,
    load_csv,
    select_columns,
    select_partition,
    write_csv,
)
from .dgp import DEFAULT_AR, VarianceProfile, simulate_var1
from .errors import DataError, NumericalError
from .kernelvar import nw_covariance
from .montecarlo import ExperimentConfig, power_curve, run_experiment
from .varfit import box_pierce_diagnostic, coefficient_se_matrices, fit_ols

MANIFEST_VERSION = 1


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse parser that raises instead of exiting with status 2."""

    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _fmt(x: float) -> str:
    return format(x, ".17g")


def _resolve_seed(args) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    env = os.environ.get("HETCAUSE_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"HETCAUSE_SEED must be an integer, got {env!r}")
    return 0


def _load_dataset(args) -> Dataset:
    ds = load_csv(
        args.input,
        delimiter=args.delimiter,
        header=not args.no_header,
        time_column=args.time_column,
    )
    if args.columns:
        ds = select_columns(ds, [c.strip() for c in args.columns.split(",")])
    if args.diff:
        ds = difference(ds, args.diff)
    if getattr(args, "demean", False):
        ds = demean(ds)
    return ds


def _add_ingestion_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--input", required=True, help="CSV file to analyze")
    parser.add_argument("--delimiter", default=",", help="CSV field separator")
    parser.add_argument("--no-header", action="store_true",
                        help="file has no header line; columns named x1..xd")
    parser.add_argument("--time-column", default=None,
                        help="column to treat as time labels (matched by name)")
    parser.add_argument("--columns", default=None,
                        help="comma-separated column names to reorder/select")
    parser.add_argument("--diff", type=int, default=0, metavar="N",
                        help="difference the series N times before analysis")
    parser.add_argument("--demean", action="store_true",
                        help="subtract column means (the model has no intercept)")


def _parse_levels(text: str) -> tuple[float, ...]:
    try:
        levels = tuple(float(tok) for tok in text.split(","))
    except ValueError:
        raise UsageError(f"cannot parse levels {text!r}")
    return levels

def _parse_int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(tok) for tok in text.split(","))
    except ValueError:
        raise UsageError(f"cannot parse integer list {text!r}")


def _parse_c_values(text: str) -> list[float]:
    """Either comma-separated values or a start:stop:step range (inclusive)."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise UsageError(f"range must be start:stop:step, got {text!r}")
        try:
            start, stop, step = (float(p) for p in parts)
        except ValueError:
            raise UsageError(f"cannot parse range {text!r}")
        if step <= 0:
            raise UsageError("range step must be positive")
        n = int(np.floor((stop - start) / step + 1e-9)) + 1
        return [start + k * step for k in range(n)]
    try:
        return [float(tok) for tok in text.split(",")]
    except ValueError:
        raise UsageError(f"cannot parse c values {text!r}")


def _parse_methods(text: str) -> tuple[str, ...]:
    methods = tuple(tok.strip() for tok in text.split(","))
    unknown = [m for m in methods if m not in ("st", "w", "h", "b")]
    if unknown:
        raise UsageError(f"unknown methods {unknown}; choose from st,w,h,b")
    return methods


def _manifest(subcommand: str, params: dict, seed) -> dict:
    return {
        "manifest_version": MANIFEST_VERSION,
        "subcommand": subcommand,
        "parameters": params,
        "seed": seed,
        "library_version": __version__,
    }


def _write_manifest(out_path: str, manifest: dict, started: float) -> None:
    doc = {
        "manifest": manifest,
        "timing": {
            "started_at": datetime.fromtimestamp(started, timezone.utc).isoformat(),
            "duration_seconds": time.time() - started,
        },
    }
    with open(out_path + ".manifest.json", "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def _emit_json(payload, out: str | None, manifest: dict, started: float) -> None:
    text = json.dumps(payload, indent=2) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
        _write_manifest(out, manifest, started)


def _emit_csv(header: list[str], rows: list[list[str]], out: str,
              manifest: dict, started: float) -> None:
    lines = [",".join(header)] + [",".join(row) for row in rows]
    with open(out, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    _write_manifest(out, manifest, started)


def _cmd_fit(args, started: float) -> int:
    ds = _load_dataset(args)
    fit = fit_ols(ds, args.p)
    se = coefficient_se_matrices(fit)
    payload = {
        "p": fit.p,
        "d": fit.d,
        "T_effective": fit.T_effective,
        "series": list(ds.series_names),
        "coefficients": [a.tolist() for a in fit.coefficients],
        "robust_se": [s.tolist() for s in se],
    }
    if args.diagnostic_lags:
        payload["box_pierce"] = box_pierce_diagnostic(fit, args.diagnostic_lags)
    params = {
        "input": args.input, "p": args.p, "diff": args.diff,
        "columns": args.columns, "demean": args.demean,
        "diagnostic_lags": args.diagnostic_lags,
    }
    _emit_json(payload, args.out, _manifest("fit", params, None), started)
    return 0


def _cmd_test(args, started: float) -> int:
    if args.varhac_m is not None and args.varhac_aic:
        raise UsageError("--varhac-m conflicts with --varhac-aic")
    methods = _parse_methods(args.methods)
    ds = _load_dataset(args)
    select_partition(ds, args.d1)  # validates the split
    fit = fit_ols(ds, args.p)
    seed = _resolve_seed(args)
    results = []
    for method in methods:
        if method == "b":
            res = wild_bootstrap_test(fit.residuals, args.d1, B=args.B, seed=seed)
        elif method == "h":
            res = wald_test(fit.residuals, args.d1, weight="h", varhac_m=args.varhac_m)
        else:
            res = wald_test(fit.residuals, args.d1, weight=method)
        results.append(res.to_dict())
    params = {
        "input": args.input, "p": args.p, "d1": args.d1, "diff": args.diff,
        "columns": args.columns, "demean": args.demean,
        "methods": list(methods), "B": args.B,
        "varhac_m": args.varhac_m, "varhac_aic": args.varhac_aic,
    }
    _emit_json(results, args.out, _manifest("test", params, seed), started)
    return 0


def _cmd_simulate(args, started: float) -> int:
    if args.case == 1:
        if args.c not in (None, 0.0):
            raise UsageError("case 1 has no cross covariance; omit --c or use 0")
        profile = VarianceProfile.case1(args.a, args.b)
    else:
        profile = VarianceProfile.case2(args.a, args.b, 0.5 if args.c is None else args.c)
    seed = _resolve_seed(args)
    ds = simulate_var1(DEFAULT_AR, profile, args.T, seed)
    write_csv(ds, args.out)
    params = {
        "case": args.case, "a": args.a, "b": args.b,
        "c": profile.c, "T": args.T, "out": args.out,
    }
    _write_manifest(args.out, _manifest("simulate", params, seed), started)
    return 0


def _mc_config(args, sample_sizes, levels) -> ExperimentConfig:
    N = args.N
    B = args.B
    if args.fast:
        N = N if N is not None else 300
        B = B if B is not None else 199
    if args.case == 1:
        if args.c not in (None, 0.0):
            raise UsageError("case 1 has no cross covariance; omit --c or use 0")
        c = 0.0
    else:
        c = 0.5 if args.c is None else args.c
    return ExperimentConfig(
        case=args.case,
        a=args.a,
        b=args.b,
        c=c,
        sample_sizes=sample_sizes,
        levels=levels,
        replications=N if N is not None else 1000,
        bootstrap_B=B if B is not None else 299,
        seed=_resolve_seed(args),
        methods=_parse_methods(args.methods),
        varhac_m=None,
        parallelism=args.jobs,
    )


def _cmd_mc(args, started: float) -> int:
    config = _mc_config(args, _parse_int_list(args.T), _parse_levels(args.levels))
    table = run_experiment(config)
    rows = [
        [str(T), _fmt(alpha), method, _fmt(freq), str(n)]
        for (T, alpha, method, freq, n) in table.rows()
    ]
    params = {
        "case": config.case, "a": config.a, "b": config.b, "c": config.c,
        "T": list(config.sample_sizes), "levels": list(config.levels),
        "N": config.replications, "B": config.bootstrap_B,
        "methods": list(config.methods), "jobs": config.parallelism,
    }
    _emit_csv(["T", "alpha", "method", "reject_freq", "N"], rows, args.out,
              _manifest("mc", params, config.seed), started)
    return 0


def _cmd_power_curve(args, started: float) -> int:
    args.case = 2
    args.c = 0.0  # per-point c values come from --c
    config = _mc_config(args, (args.T,), (args.level,))
    points = power_curve(config, _parse_c_values(args.c_values))
    rows = [
        [_fmt(pt.c), pt.method, _fmt(pt.frequency), str(config.replications)]
        for pt in points
    ]
    params = {
        "a": config.a, "b": config.b, "c_values": args.c_values,
        "T": args.T, "level": args.level,
        "N": config.replications, "B": config.bootstrap_B,
        "methods": list(config.methods), "jobs": config.parallelism,
    }
    _emit_csv(["c", "method", "reject_freq", "N"], rows, args.out,
              _manifest("power-curve", params, config.seed), started)
    return 0


def _cmd_kernelvar(args, started: float) -> int:
    ds = _load_dataset(args)
    select_partition(ds, args.d1)
    fit = fit_ols(ds, args.p)
    curve = nw_covariance(
        fit.residuals, args.d1, bandwidth=args.bandwidth, grid_size=args.grid_size
    )
    d = curve.estimates.shape[1]
    rows = []
    for g, r in enumerate(curve.grid):
        for i in range(d):
            for j in range(d):
                rows.append([_fmt(r), str(i + 1), str(j + 1),
                             _fmt(curve.estimates[g, i, j])])
    params = {
        "input": args.input, "p": args.p, "d1": args.d1, "diff": args.diff,
        "columns": args.columns, "demean": args.demean,
        "bandwidth": curve.bandwidth, "grid_size": args.grid_size,
    }
    _emit_csv(["r", "i", "j", "sigma_hat"], rows, args.out,
              _manifest("kernelvar", params, None), started)
    return 0


def build_parser() -> _Parser:
    parser = _Parser(
        prog="hetcause",
        description="Instantaneous-causality tests for VAR processes with "
                    "time-varying innovation variance.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", metavar="SUBCOMMAND")

    p_fit = sub.add_parser("fit", help="fit a VAR(p) by OLS and report coefficients")
    _add_ingestion_flags(p_fit)
    p_fit.add_argument("--p", type=int, required=True, help="lag order")
    p_fit.add_argument("--diagnostic-lags", type=int, default=0, metavar="H",
                       help="also run the (heteroscedasticity-naive) Box-Pierce "
                            "diagnostic with H lags")
    p_fit.add_argument("--out", default=None, help="write JSON here instead of stdout")
    p_fit.set_defaults(func=_cmd_fit)

    p_test = sub.add_parser("test", help="run the instantaneous-causality tests")
    _add_ingestion_flags(p_test)
    p_test.add_argument("--p", type=int, required=True, help="lag order")
    p_test.add_argument("--d1", type=int, required=True,
                        help="size of the leading block X1")
    p_test.add_argument("--methods", default="st,w,b",
                        help="comma list from st,w,h,b")
    p_test.add_argument("--B", type=int, default=399,
                        help="bootstrap replications for method b")
    p_test.add_argument("--seed", type=int, default=None,
                        help="RNG seed (falls back to HETCAUSE_SEED, then 0)")
    p_test.add_argument("--varhac-m", type=int, default=None,
                        help="fixed VARHAC order for method h")
    p_test.add_argument("--varhac-aic", action="store_true",
                        help="choose the VARHAC order by AIC (default)")
    p_test.add_argument("--out", default=None, help="write JSON here instead of stdout")
    p_test.set_defaults(func=_cmd_test)

    p_sim = sub.add_parser("simulate", help="simulate the bivariate VAR(1) DGP")
    p_sim.add_argument("--case", type=int, choices=(1, 2), required=True)
    p_sim.add_argument("--a", type=float, default=1.1)
    p_sim.add_argument("--b", type=float, default=11.0)
    p_sim.add_argument("--c", type=float, default=None)
    p_sim.add_argument("--T", type=int, required=True, help="sample size")
    p_sim.add_argument("--seed", type=int, default=None)
    p_sim.add_argument("--out", required=True, help="CSV output path")
    p_sim.set_defaults(func=_cmd_simulate)

    for name, helptext in (
        ("mc", "Monte Carlo size/power table"),
        ("power-curve", "rejection frequency as c varies"),
    ):
        p_mc = sub.add_parser(name, help=helptext)
        p_mc.add_argument("--a", type=float, default=1.1)
        p_mc.add_argument("--b", type=float, default=11.0)
        p_mc.add_argument("--N", type=int, default=None,
                          help="Monte Carlo replications (default 1000)")
        p_mc.add_argument("--B", type=int, default=None,
                          help="bootstrap replications (default 299)")
        p_mc.add_argument("--seed", type=int, default=None)
        p_mc.add_argument("--methods", default="st,w,b")
        p_mc.add_argument("--jobs", type=int, default=1,
                          help="parallel workers; results do not depend on this")
        p_mc.add_argument("--fast", action="store_true",
                          help="CI profile: N=300, B=199 unless given explicitly")
        p_mc.add_argument("--out", required=True, help="CSV output path")
        if name == "mc":
            p_mc.add_argument("--case", type=int, choices=(1, 2), required=True)
            p_mc.add_argument("--c", type=float, default=None,
                              help="cross-covariance scale for case 2 (default 0.5)")
            p_mc.add_argument("--T", default="50,100,200,500,1000",
                              help="comma list of sample sizes")
            p_mc.add_argument("--levels", default="0.01,0.05,0.10",
                              help="comma list of nominal levels")
            p_mc.set_defaults(func=_cmd_mc)
        else:
            p_mc.add_argument("--c", dest="c_values", default="0.05:0.65:0.05",
                              help="c grid: comma list or start:stop:step")
            p_mc.add_argument("--T", type=int, default=500, help="sample size")
            p_mc.add_argument("--level", type=float, default=0.05,
                              help="nominal level")
            p_mc.set_defaults(func=_cmd_power_curve)

    p_kv = sub.add_parser("kernelvar", help="kernel estimate of the covariance curve")
    _add_ingestion_flags(p_kv)
    p_kv.add_argument("--p", type=int, required=True, help="lag order")
    p_kv.add_argument("--d1", type=int, required=True)
    p_kv.add_argument("--bandwidth", type=float, default=None,
                      help="kernel bandwidth (default T^(-1/5))")
    p_kv.add_argument("--grid-size", type=int, default=200)
    p_kv.add_argument("--out", required=True, help="CSV output path")
    p_kv.set_defaults(func=_cmd_kernelvar)

    return parser


def _report_error(kind: str, message: str) -> None:
    sys.stderr.write(json.dumps({"error": {"kind": kind, "message": message}}) + "\n")


def dispatch(argv: list[str] | None = None) -> int:
    started = time.time()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "subcommand", None) is None:
            raise UsageError("a subcommand is required; see --help")
        return args.func(args, started)
    except UsageError as exc:
        _report_error("usage", str(exc))
        return 1
    except (DataError, FileNotFoundError, ValueError) as exc:
        _report_error("data", str(exc))
        return 1
    except NumericalError as exc:
        _report_error("numerical", str(exc))
        return 2


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
