#!/usr/bin/env python3
"""Regenerate the CSV artifacts consumed by the figure package.

Runs the benchmark cases that emit data files (A4: paired trajectory,
A8: entanglement scaling, A9: quantum-classical correlator sweep) and
collects their outputs under a single directory.  Each case is
independent, so a failed case does not block the others.

Usage:
    python scripts/reproduce_benchmark_outputs.py [--output-dir DIR]
        [--workers N] [--cases A4 A8 A9]

On a single core the full set takes a few hours; pass --workers to use
more processes where available.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from spintraj import benchmarks

DATA_CASES = ("A4", "A8", "A9")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--output-dir", type=Path, default=Path("runs/figure_inputs"))
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--cases", nargs="+", default=list(DATA_CASES), choices=DATA_CASES)
    args = parser.parse_args(argv)

    failed = []
    for case in args.cases:
        out = args.output_dir / case
        out.mkdir(parents=True, exist_ok=True)
        try:
            result = benchmarks.run_case(case, workers=args.workers, output_dir=out)
        except Exception as exc:  # noqa: BLE001 - keep remaining cases running
            print(f"{case}: ERROR {type(exc).__name__}: {exc}", file=sys.stderr)
            failed.append(case)
            continue
        if not result.passed:
            failed.append(case)

    if failed:
        print(f"failed cases: {', '.join(failed)}", file=sys.stderr)
        return 1
    print(f"all outputs written under {args.output_dir}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
