"""Command-line front end: one verb per workflow, JSON reports on stdout.

Matrices travel as headerless CSV (17 significant digits per entry),
traces as CSV with the header ``iter,objective,accepted``.  Every report
embeds the package version and the fully resolved configuration, seeds
included, so a run is reproducible bit for bit from its own output.
stdout carries the report only; diagnostics go to stderr.  Exit codes:
0 success, 1 runtime failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .algorithms import BlockRaConfig, RunResult, block_ra1, block_ra2, standard_ra
from .bench import enumerate_starts, run_table_benchmark
from .dependence import (
    EXACT_PARTITION_CAP,
    multivariate_dependence_exact,
    multivariate_dependence_sampled,
    spearman,
)
from .gof import TargetDistribution, default_thresholds, median_threshold, verdict
from .matrix import (
    RearrangementMatrix,
    read_matrix_csv,
    row_sums,
    sample_variance,
    write_matrix_csv,
)
from .mcmc import McmcConfig, mcmc_block_ra, resolve_rate
from .oracle import (
    brute_force_minimum,
    haus_integer_matrix,
    haus_integer_minimum,
    make_zero_sum_normal_matrix,
)
from .targetfit import FitConfig, MarginSpec, fit_sum_to_target, spread_dependence

__all__ = ["build_parser", "main"]


class UsageError(Exception):
    """Bad flag combination that argparse alone cannot catch."""


def _uint64(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return value


def _report(body: dict, verb: str, config: dict) -> dict:
    # Result keys first so the headline numbers lead the report.
    out = dict(body)
    out["verb"] = verb
    out["version"] = __version__
    out["config"] = config
    return out


def _write_json(report: dict, out_path: Optional[str]) -> None:
    text = json.dumps(report, indent=2) + "\n"
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _write_trace(path: str, rows: Sequence[tuple[int, float, int]]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("iter,objective,accepted\n")
        for it, obj, acc in rows:
            fh.write(f"{it},{obj:.17g},{acc}\n")


def _sweep_trace_rows(trace: Sequence[float]) -> list[tuple[int, float, int]]:
    # Row 0 is the starting objective; accepted marks a strict decrease.
    rows = []
    prev = np.inf
    for k, obj in enumerate(trace):
        rows.append((k, float(obj), int(k > 0 and obj < prev)))
        prev = obj
    return rows


def _read_column(path: str, name: str) -> np.ndarray:
    values = np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=1)
    if values.ndim != 1:
        raise UsageError(f"--{name} must be a single-column CSV")
    return values


def _target_from_name(name: str) -> TargetDistribution:
    # The two laws of the fit workflow: standard normal and U[-1,1].
    if name == "normal":
        return TargetDistribution.normal(0.0, 1.0)
    return TargetDistribution.uniform(-1.0, 1.0)


# ---------------------------------------------------------------- verbs


def _cmd_rearrange(args: argparse.Namespace) -> dict:
    mat = read_matrix_csv(args.input)
    cfg = BlockRaConfig(
        n_sim=args.n_sim,
        rho_stop=getattr(args, "rho_stop", -0.9999),
        improvement_tol=args.improvement_tol,
        max_sweeps=args.max_sweeps,
        rng_seed=getattr(args, "seed", 0),
    )
    if getattr(args, "enumerate_starts", False):
        census = enumerate_starts(mat, cfg)
        body = {
            "starts": census.starts,
            "limits": [{"objective": v, "starts": c} for v, c in census.limits],
            "m": mat.m,
            "n": mat.n,
        }
        config = {
            "input": args.input,
            "enumerate_starts": True,
            "n_sim": cfg.n_sim,
            "improvement_tol": cfg.improvement_tol,
            "max_sweeps": cfg.max_sweeps,
            "rng_seed": cfg.rng_seed,
        }
        return _report(body, args.verb, config)
    runner = {"ra": standard_ra, "bra1": block_ra1, "bra2": block_ra2}[args.verb]
    result: RunResult = runner(mat, cfg)
    if args.matrix_out:
        write_matrix_csv(result.final_matrix, args.matrix_out)
    if args.trace_out:
        _write_trace(args.trace_out, _sweep_trace_rows(result.objective_trace))
    body = result.to_dict()
    body.pop("objective_trace")
    body["start_objective"] = float(result.objective_trace[0])
    body["m"], body["n"] = mat.m, mat.n
    config = {
        "input": args.input,
        "n_sim": cfg.n_sim,
        "n_sim_resolved": cfg.resolve_n_sim(mat.n),
        "improvement_tol": cfg.improvement_tol,
        "max_sweeps": cfg.max_sweeps,
        "matrix_out": args.matrix_out,
        "trace_out": args.trace_out,
    }
    if args.verb == "bra1":
        config["rho_stop"] = cfg.rho_stop
    if args.verb in ("bra1", "bra2"):
        config["rng_seed"] = cfg.rng_seed
    return _report(body, args.verb, config)


def _cmd_mcmc(args: argparse.Namespace) -> dict:
    mat = read_matrix_csv(args.input)
    cfg = McmcConfig(
        r=args.rate,
        n_iter=args.iterations,
        rng_seed=args.seed,
        absorb_tol=args.absorb_tol,
    )
    start_objective = sample_variance(row_sums(mat))
    trace = mcmc_block_ra(mat, cfg)
    if args.matrix_out:
        write_matrix_csv(trace.best_matrix, args.matrix_out)
    if args.trace_out:
        rows = [(0, start_objective, 0)]
        rows += [
            (k + 1, float(obj), int(acc))
            for k, (obj, acc) in enumerate(zip(trace.objective_per_iter, trace.accepted))
        ]
        _write_trace(args.trace_out, rows)
    body = trace.to_dict()
    body["start_objective"] = start_objective
    body["m"], body["n"] = mat.m, mat.n
    config = {
        "input": args.input,
        "rng_seed": cfg.rng_seed,
        "n_iter": cfg.n_iter,
        "r": cfg.r,
        "r_resolved": resolve_rate(mat, cfg),
        "absorb_tol": cfg.absorb_tol,
        "objective": cfg.objective.kind,
        "matrix_out": args.matrix_out,
        "trace_out": args.trace_out,
    }
    return _report(body, "mcmc", config)


def _cmd_oracle(args: argparse.Namespace) -> dict:
    config = {
        "mode": args.mode,
        "matrix_out": args.matrix_out,
    }
    if args.mode == "brute":
        if not args.input:
            raise UsageError("oracle --mode brute needs --input")
        mat = read_matrix_csv(args.input)
        result = brute_force_minimum(mat, max_arrangements=args.max_arrangements)
        if args.matrix_out:
            write_matrix_csv(result.argmin_matrix, args.matrix_out)
        body = {
            "min_variance": result.min_variance,
            "arrangements_scanned": result.arrangements_scanned,
            "m": mat.m,
            "n": mat.n,
        }
        config.update(input=args.input, max_arrangements=args.max_arrangements)
        return _report(body, "oracle", config)

    if args.m is None or args.n is None:
        raise UsageError(f"oracle --mode {args.mode} needs --m and --n")
    config.update(m=args.m, n=args.n)
    if args.mode == "haus":
        min_variance, lo_value, count_lo = haus_integer_minimum(args.m, args.n)
        if args.matrix_out:
            write_matrix_csv(haus_integer_matrix(args.m, args.n), args.matrix_out)
        body = {
            "min_variance": min_variance,
            "lo_value": lo_value,
            "count_lo": count_lo,
        }
        return _report(body, "oracle", config)

    # zerosum: emit the construction whose row sums vanish identically.
    mat = make_zero_sum_normal_matrix(args.m, args.n, rng_seed=args.seed)
    if args.matrix_out:
        write_matrix_csv(mat, args.matrix_out)
    body = {"row_sum_variance": sample_variance(row_sums(mat)), "m": args.m, "n": args.n}
    config["rng_seed"] = args.seed
    return _report(body, "oracle", config)


def _cmd_measure(args: argparse.Namespace) -> dict:
    mat = read_matrix_csv(args.input)
    mode = args.mode
    if mode == "auto":
        mode = "exact" if mat.n <= EXACT_PARTITION_CAP else "sampled"
    if mode == "exact":
        report = multivariate_dependence_exact(mat)
    else:
        report = multivariate_dependence_sampled(mat, args.n_samples, args.seed)
    body = report.to_dict()
    body["row_sum_variance"] = sample_variance(row_sums(mat))
    body["m"], body["n"] = mat.m, mat.n
    config = {
        "input": args.input,
        "mode": args.mode,
        "mode_resolved": mode,
        "n_samples": args.n_samples,
        "rng_seed": args.seed,
    }
    return _report(body, "measure", config)


def _cmd_fit_sum(args: argparse.Namespace) -> dict:
    if args.initial_scale is not None and not args.initial_scale > 0:
        raise UsageError("--initial-scale must be positive")
    if args.margins == "uniform":
        start = 1.5 if args.initial_scale is None else args.initial_scale
        margins = MarginSpec.uniform_symmetric(args.n, a=start)
    else:
        start = 0.4 if args.initial_scale is None else args.initial_scale
        margins = MarginSpec.normal(args.n, sigma=start)
    target = _target_from_name(args.target)
    cfg = FitConfig(
        n_sim=args.n_sim,
        rel_tol=args.rel_tol,
        max_passes=args.max_passes,
        rng_seed=args.seed,
    )
    report = fit_sum_to_target(margins, target, args.m, cfg)
    if args.matrix_out:
        write_matrix_csv(report.final_matrix, args.matrix_out)
    if args.emit_joint:
        # First two margin columns: the fitted dependence sample.
        write_matrix_csv(report.final_matrix.values[:, :2], args.emit_joint)
    body = report.to_dict()
    body["m"] = args.m
    config = {
        "margins": args.margins,
        "n": args.n,
        "initial_scale": start,
        "target": args.target,
        "m": args.m,
        "rng_seed": cfg.rng_seed,
        "n_sim": cfg.n_sim,
        "rel_tol": cfg.rel_tol,
        "max_passes": cfg.max_passes,
        "grid_points": cfg.grid_points,
        "matrix_out": args.matrix_out,
        "emit_joint": args.emit_joint,
    }
    return _report(body, "fit-sum", config)


def _cmd_spread(args: argparse.Namespace) -> dict:
    fp = _read_column(args.fp, "fp")
    fg = _read_column(args.fg, "fg")
    fs = _read_column(args.fs, "fs")
    if not fp.size == fg.size == fs.size:
        raise UsageError(
            f"quantile tables disagree on length: fp={fp.size} fg={fg.size} fs={fs.size}"
        )
    cfg = BlockRaConfig(rng_seed=args.seed, max_sweeps=args.max_sweeps)
    result = spread_dependence(fp, fg, fs, fp.size, cfg)
    if args.emit_joint:
        write_matrix_csv(result.copula, args.emit_joint)
    body = result.to_dict()
    body["rho_joint"] = spearman(result.copula.values[:, 0], result.copula.values[:, 1])
    config = {
        "fp": args.fp,
        "fg": args.fg,
        "fs": args.fs,
        "m": int(fp.size),
        "rng_seed": cfg.rng_seed,
        "max_sweeps": cfg.max_sweeps,
        "emit_joint": args.emit_joint,
    }
    return _report(body, "spread", config)


def _cmd_gof(args: argparse.Namespace) -> dict:
    values = _read_column(args.input, "input")
    target = _target_from_name(args.target)
    m = args.m if args.m is not None else int(values.size)
    thresholds = default_thresholds(
        target, m, ks_asymptotic=args.ks_asymptotic, n_replicates=args.reps, rng_seed=args.seed
    )
    v = verdict(values, target, m, thresholds)
    body = v.to_dict()
    config = {
        "input": args.input,
        "target": args.target,
        "m": m,
        "ks_asymptotic": args.ks_asymptotic,
        "reps": args.reps,
        "rng_seed": args.seed,
    }
    return _report(body, "gof", config)


def _cmd_thresholds(args: argparse.Namespace) -> dict:
    target = _target_from_name(args.target)
    level = median_threshold(args.test, target, args.m, n_replicates=args.reps, rng_seed=args.seed)
    body = {"test": args.test, "threshold": level}
    config = {
        "test": args.test,
        "target": args.target,
        "m": args.m,
        "reps": args.reps,
        "rng_seed": args.seed,
    }
    return _report(body, "thresholds", config)


def _cmd_bench(args: argparse.Namespace) -> dict:
    report = run_table_benchmark(
        args.table,
        replicates=args.replicates,
        rng_seed=args.seed,
        m=args.m,
        n=args.n,
        jobs=args.jobs,
    )
    body = {
        "table": report.table,
        "replicates": report.replicates,
        "cells": [asdict(cell) for cell in report.cells],
    }
    config = {
        "table": args.table,
        "replicates": args.replicates,
        "rng_seed": args.seed,
        "m": args.m,
        "n": args.n,
        "jobs": args.jobs,
    }
    return _report(body, "bench", config)


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="blockra",
        description="Variance-minimizing rearrangements, dependence diagnostics, "
        "exact oracles, MCMC search, target-sum fitting, and table benchmarks.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="verb", required=True, metavar="verb")

    def add(name: str, func, help_text: str) -> argparse.ArgumentParser:
        sp = sub.add_parser(name, help=help_text)
        sp.set_defaults(func=func)
        sp.add_argument("--out", help="write the JSON report to this file instead of stdout")
        return sp

    for name, help_text in (
        ("ra", "column-cycling rearrangement to a sweep-stable point"),
        ("bra1", "block rearrangement guided by the dependence measure"),
        ("bra2", "block rearrangement over sampled partitions per pass"),
    ):
        sp = add(name, _cmd_rearrange, help_text)
        sp.add_argument("--input", required=True, help="matrix CSV, no header")
        sp.add_argument("--n-sim", type=int, help="partitions per pass (default: all up to 512)")
        sp.add_argument("--improvement-tol", type=float, default=1e-12)
        sp.add_argument("--max-sweeps", type=int, default=1000)
        sp.add_argument("--matrix-out", help="write the final matrix CSV here")
        sp.add_argument("--trace-out", help="write the per-sweep objective trace CSV here")
        if name == "bra1":
            sp.add_argument("--rho-stop", type=float, default=-0.9999)
        if name in ("bra1", "bra2"):
            sp.add_argument("--seed", type=_uint64, default=0)
        if name == "bra2":
            sp.add_argument(
                "--enumerate-starts",
                action="store_true",
                help="census every canonical column-permuted start instead of one run",
            )

    sp = add("mcmc", _cmd_mcmc, "Metropolis search with Gumbel-ranked proposals")
    sp.add_argument("--input", required=True)
    sp.add_argument("--seed", type=_uint64, default=0)
    sp.add_argument("--iterations", type=int, default=10_000)
    sp.add_argument("--rate", type=float, help="Gumbel rate (default: set from the start)")
    sp.add_argument("--absorb-tol", type=float, default=1e-14)
    sp.add_argument("--matrix-out", help="write the best visited matrix CSV here")
    sp.add_argument("--trace-out", help="write the per-iteration trace CSV here")

    sp = add("oracle", _cmd_oracle, "exact minimum-variance references")
    sp.add_argument("--mode", choices=("brute", "haus", "zerosum"), default="brute")
    sp.add_argument("--input", help="matrix CSV (brute mode)")
    sp.add_argument("--max-arrangements", type=int, default=100_000_000)
    sp.add_argument("--m", type=int, help="rows (haus and zerosum modes)")
    sp.add_argument("--n", type=int, help="columns (haus and zerosum modes)")
    sp.add_argument("--seed", type=_uint64, default=0, help="zerosum column shuffle seed")
    sp.add_argument("--matrix-out", help="write the reference matrix CSV here")

    sp = add("measure", _cmd_measure, "multivariate dependence measure of a matrix")
    sp.add_argument("--input", required=True)
    sp.add_argument("--mode", choices=("auto", "exact", "sampled"), default="auto")
    sp.add_argument("--n-samples", type=int, default=512)
    sp.add_argument("--seed", type=_uint64, default=0)

    sp = add("fit-sum", _cmd_fit_sum, "fit margin dependence so row sums match a target law")
    sp.add_argument("--margins", choices=("uniform", "normal"), required=True)
    sp.add_argument("--n", type=int, default=2, help="number of margin columns")
    sp.add_argument("--target", choices=("normal", "uniform"), required=True)
    sp.add_argument("--m", type=int, required=True, help="discretization rows")
    sp.add_argument("--seed", type=_uint64, default=0)
    sp.add_argument("--initial-scale", type=float, help="starting half-width or sigma")
    sp.add_argument("--n-sim", type=int)
    sp.add_argument("--rel-tol", type=float, default=1e-8)
    sp.add_argument("--max-passes", type=int, default=500)
    sp.add_argument("--matrix-out", help="write the fitted (n+1)-column matrix CSV here")
    sp.add_argument("--emit-joint", help="write the first two fitted columns as CSV here")

    sp = add("spread", _cmd_spread, "two-asset dependence from three marginal quantile tables")
    sp.add_argument("--fp", required=True, help="first asset quantile CSV")
    sp.add_argument("--fg", required=True, help="second asset quantile CSV")
    sp.add_argument("--fs", required=True, help="spread quantile CSV")
    sp.add_argument("--seed", type=_uint64, default=0)
    sp.add_argument("--max-sweeps", type=int, default=1000)
    sp.add_argument("--emit-joint", help="write the recovered joint sample CSV here")

    sp = add("gof", _cmd_gof, "distance verdict of a value sample against a target law")
    sp.add_argument("--input", required=True, help="single-column values CSV")
    sp.add_argument("--target", choices=("normal", "uniform"), required=True)
    sp.add_argument("--m", type=int, help="threshold sample size (default: input length)")
    sp.add_argument("--ks-asymptotic", action="store_true")
    sp.add_argument("--reps", type=int, default=41)
    sp.add_argument("--seed", type=_uint64, default=0)

    sp = add("thresholds", _cmd_thresholds, "simulated median threshold for one distance")
    sp.add_argument("--test", choices=("ks", "w2"), required=True)
    sp.add_argument("--target", choices=("normal", "uniform"), required=True)
    sp.add_argument("--m", type=int, required=True)
    sp.add_argument("--reps", type=int, default=41)
    sp.add_argument("--seed", type=_uint64, default=0)

    sp = add("bench", _cmd_bench, "re-run one comparison table at desk scale")
    sp.add_argument("--table", choices=("tcomp", "t1b", "t3b"), required=True)
    sp.add_argument("--replicates", type=int, default=200)
    sp.add_argument("--seed", type=_uint64, default=0)
    sp.add_argument("--m", type=int, help="single-cell row count")
    sp.add_argument("--n", type=int, help="single-cell column count")
    sp.add_argument("--jobs", type=int, default=1)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse already printed; keep main callable
        return int(exc.code or 0)
    try:
        report = args.func(args)
        _write_json(report, args.out)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failure: diagnostic on stderr, exit 1
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
