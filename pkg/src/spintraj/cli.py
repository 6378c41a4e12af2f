"""Command-line interface for runs, sweeps, benchmarks, and the QC protocol."""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from .runner import (
    ConfigError,
    parse_config,
    run_ensemble,
    run_qc_protocol,
    sweep,
)


def _load_config(path, args):
    config = parse_config(Path(path).read_text())
    if args.seed is not None:
        config = dataclasses.replace(
            config, ensemble=dataclasses.replace(config.ensemble, master_seed=args.seed)
        )
    if args.output_dir is not None:
        config = dataclasses.replace(config, output_dir=args.output_dir)
    return config


def _add_common(parser):
    parser.add_argument("--workers", type=int, default=1, help="worker processes")
    parser.add_argument("--seed", type=int, default=None, help="override ensemble.master_seed")
    parser.add_argument("--output-dir", default=None, help="override output_dir")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spintraj", description="monitored spin-system trajectory simulations"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute one configured ensemble")
    p_run.add_argument("config")
    _add_common(p_run)

    p_sweep = sub.add_parser("sweep", help="run the config across parameter values")
    p_sweep.add_argument("config")
    p_sweep.add_argument("--param", required=True, choices=("omega", "alpha", "N", "J"))
    p_sweep.add_argument("--values", required=True, help="comma-separated values")
    _add_common(p_sweep)

    p_bench = sub.add_parser("benchmark", help="run a named acceptance case")
    p_bench.add_argument("case", help="case name, e.g. A1")
    _add_common(p_bench)

    p_qc = sub.add_parser("qc-protocol", help="quantum-classical correlator run")
    p_qc.add_argument("config")
    p_qc.add_argument(
        "--norm-tol",
        type=float,
        default=1e-8,
        help="allowed POVM normalization defect per step",
    )
    _add_common(p_qc)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            config = _load_config(args.config, args)
            stats = run_ensemble(config, workers=args.workers)
            for name in stats.observables:
                print(
                    f"{name}: steady mean {stats.steady_mean[name]:.6g} "
                    f"+/- {stats.steady_stderr[name]:.2g} over {stats.n_traj} trajectories"
                )
            if stats.partial:
                print(f"warning: {len(stats.failures)} trajectories failed", file=sys.stderr)
                return 1
            return 0
        if args.command == "sweep":
            config = _load_config(args.config, args)
            values = [float(v) for v in args.values.split(",") if v.strip()]
            entries = sweep(config, args.param, values, workers=args.workers)
            for value, stats in entries:
                status = "ok" if stats is not None else "failed"
                print(f"{args.param}={value:g}: {status}")
            return 0
        if args.command == "benchmark":
            from . import benchmarks

            result = benchmarks.run_case(
                args.case, workers=args.workers, output_dir=args.output_dir
            )
            return 0 if result.passed else 1
        if args.command == "qc-protocol":
            config = _load_config(args.config, args)
            estimate, _ = run_qc_protocol(
                config, workers=args.workers, norm_tol=args.norm_tol
            )
            print(
                f"correlator: {estimate.value:.6g} +/- {estimate.stderr:.2g} "
                f"({estimate.shots} shots)"
            )
            return 0
    except ConfigError as exc:
        print(exc, file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
