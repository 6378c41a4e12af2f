#!/usr/bin/env python3
"""Render one figure kind from a simulator CSV output.

Usage:
    python render_figure.py trajectory-overlay paired_trajectory.csv out.png
    python render_figure.py steady-state-sweep sweep_summary.csv out.png --observable entropy
    python render_figure.py scaling-inset scaling_summary.csv out.png
    python render_figure.py qc-correlator qc_sweep.csv out.png
"""

import argparse
import sys

from spintraj_figures import KINDS, FigureRecipe, RecipeError, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("kind", choices=KINDS)
    parser.add_argument("input", help="input CSV path")
    parser.add_argument("output", help="output image path")
    parser.add_argument("--observable", default="entropy", help="sweep observable")
    parser.add_argument("--title", default=None)
    parser.add_argument("--dpi", type=int, default=150)
    args = parser.parse_args(argv)
    try:
        path = render(
            FigureRecipe(
                kind=args.kind,
                input_path=args.input,
                output_path=args.output,
                observable=args.observable,
                title=args.title,
                dpi=args.dpi,
            )
        )
    except (RecipeError, OSError) as exc:
        print(exc, file=sys.stderr)
        return 2
    print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
