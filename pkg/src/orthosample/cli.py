"""Command-line interface.

Subcommands:
  run CONFIG          execute one experiment from a JSON config
  verify              run the exact-identity and finite-difference suites
  metrics A B         energy distance (and MAE) between two sample CSVs
  groundtruth         write exact conditioned samples to CSV
  report RUN_DIR      render figures for a completed run directory

Exit codes: 0 success, 1 verification failure, 2 configuration or parse
error, 3 sampler runtime error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .ensemble import ParticleEnsemble
from .errors import ConfigError, DimensionMismatch, OrthosampleError, UnstableStepSize
from .experiment import load_config, run_experiment
from .metrics import energy_distance, mae
from .targets import synthetic_constraint, synthetic_ground_truth
from .verify import format_table, verify_suite


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="orthosample",
        description="Sampling on implicit level-set manifolds with orthogonal-space updates.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one experiment from a JSON config")
    p_run.add_argument("config", type=Path, help="path to the experiment config")
    p_run.add_argument("--figures", action="store_true",
                       help="also render figures into the output directory")

    sub.add_parser("verify", help="run the identity and finite-difference suites")

    p_metrics = sub.add_parser("metrics", help="compare two sample CSV files")
    p_metrics.add_argument("samples_a", type=Path)
    p_metrics.add_argument("samples_b", type=Path)
    p_metrics.add_argument("--constraint", choices=["synthetic"], default=None,
                           help="also report each set's constraint MAE")

    p_gt = sub.add_parser("groundtruth", help="write exact conditioned samples")
    p_gt.add_argument("--n", type=int, required=True)
    p_gt.add_argument("--seed", type=int, required=True)
    p_gt.add_argument("--out", type=Path, required=True)

    p_report = sub.add_parser("report", help="render figures for a run directory")
    p_report.add_argument("run_dir", type=Path)
    p_report.add_argument("--out", type=Path, default=None,
                          help="directory for the figures (default: the run directory)")
    return parser


def _cmd_run(args) -> int:
    try:
        cfg = load_config(args.config)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    try:
        record, paths = run_experiment(cfg)
    except (ConfigError, UnstableStepSize) as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    except OrthosampleError as err:
        print(f"sampler error: {err}", file=sys.stderr)
        return 3
    final_metrics = record.metric_series[-1][1]
    summary = {
        "output_dir": str(cfg.output_dir),
        "n_iters": cfg.sampler.n_iters,
        "wall_time_s": record.wall_time,
        "final_metrics": final_metrics,
    }
    print(json.dumps(summary, sort_keys=True))
    if args.figures:
        from .figures import render_run_figures

        for path in render_run_figures(cfg.output_dir):
            print(f"figure: {path}")
    return 0


def _cmd_verify() -> int:
    results = verify_suite()
    print(format_table(results))
    failed = [r for r in results if not r.passed]
    if failed:
        print(f"{len(failed)} check(s) failed", file=sys.stderr)
        return 1
    return 0


def _cmd_metrics(args) -> int:
    try:
        a = ParticleEnsemble.read_csv(args.samples_a)
        b = ParticleEnsemble.read_csv(args.samples_b)
        report = {"energy_distance": energy_distance(a, b)}
        if args.constraint == "synthetic":
            c = synthetic_constraint()
            report["mae_a"] = mae(a, c)
            report["mae_b"] = mae(b, c)
    except (OSError, ValueError, DimensionMismatch) as err:
        print(f"metrics error: {err}", file=sys.stderr)
        return 2
    print(json.dumps(report, sort_keys=True))
    return 0


def _cmd_groundtruth(args) -> int:
    if args.n < 1:
        print(f"groundtruth error: n must be >= 1, got {args.n}", file=sys.stderr)
        return 2
    samples = synthetic_ground_truth(args.n, seed=args.seed)
    try:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        samples.write_csv(args.out)
    except OSError as err:
        print(f"groundtruth error: cannot write {args.out}: {err}", file=sys.stderr)
        return 2
    return 0


def _cmd_report(args) -> int:
    from .figures import render_run_figures

    try:
        written = render_run_figures(args.run_dir, out_dir=args.out)
    except (ConfigError, OSError, ValueError) as err:
        print(f"report error: {err}", file=sys.stderr)
        return 2
    for path in written:
        print(f"figure: {path}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "verify":
        return _cmd_verify()
    if args.command == "metrics":
        return _cmd_metrics(args)
    if args.command == "groundtruth":
        return _cmd_groundtruth(args)
    if args.command == "report":
        return _cmd_report(args)
    return 2


def entry_point() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry_point()
