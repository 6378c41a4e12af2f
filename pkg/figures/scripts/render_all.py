#!/usr/bin/env python3
"""Render every figure kind from a benchmark output tree.

Expects the layout written by the simulator's
scripts/reproduce_benchmark_outputs.py:

    <input-dir>/A4/paired_trajectory.csv   -> trajectory-overlay
    <input-dir>/A8/N=64/sweep_summary.csv  -> steady-state-sweep
    <input-dir>/A8/scaling_summary.csv     -> scaling-inset
    <input-dir>/A9/qc_sweep.csv            -> qc-correlator

Missing inputs are reported and skipped; present ones render.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from spintraj_figures import FigureRecipe, render

PLAN = (
    ("trajectory-overlay", Path("A4/paired_trajectory.csv"), "trajectory_overlay.png"),
    ("steady-state-sweep", Path("A8/N=64/sweep_summary.csv"), "steady_state_sweep.png"),
    ("scaling-inset", Path("A8/scaling_summary.csv"), "scaling_inset.png"),
    ("qc-correlator", Path("A9/qc_sweep.csv"), "qc_correlator.png"),
)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("input_dir", type=Path)
    parser.add_argument("--output-dir", type=Path, default=Path("figures_out"))
    args = parser.parse_args(argv)

    args.output_dir.mkdir(parents=True, exist_ok=True)
    missing = []
    for kind, rel, name in PLAN:
        source = args.input_dir / rel
        if not source.exists():
            print(f"skip {kind}: {source} not found", file=sys.stderr)
            missing.append(kind)
            continue
        render(FigureRecipe(kind=kind, input_path=source, output_path=args.output_dir / name))
        print(f"{kind} -> {args.output_dir / name}")

    return 1 if missing else 0


if __name__ == "__main__":
    raise SystemExit(main())
