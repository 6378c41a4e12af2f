"""Declarative figure recipes over the simulator's CSV output contract.

A recipe names a figure kind, the input table, and the output image;
``render`` turns it into a file.  The module never recomputes physics:
it is strictly a reader of the documented CSV surfaces.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

KINDS = (
    "trajectory-overlay",
    "steady-state-sweep",
    "scaling-inset",
    "qc-correlator",
)

# columns each kind requires in its input table; the steady-state sweep
# additionally treats the first header column as the swept parameter
REQUIRED_COLUMNS = {
    "trajectory-overlay": ("time", "sz_traj", "sz_exact"),
    "steady-state-sweep": ("observable", "steady_mean", "steady_stderr"),
    "scaling-inset": ("N", "entropy_max"),
    "qc-correlator": ("S", "omega", "value", "stderr"),
}


class RecipeError(ValueError):
    """Invalid recipe definition."""


class SchemaError(RecipeError):
    """Input table does not carry the columns the figure kind needs."""


@dataclass(frozen=True)
class FigureRecipe:
    """What to plot, from which file, to which image."""

    kind: str
    input_path: Path
    output_path: Path
    observable: str = "entropy"  # steady-state-sweep only
    title: str | None = None
    dpi: int = 150

    def __post_init__(self):
        if self.kind not in KINDS:
            raise RecipeError(f"unknown figure kind {self.kind!r}; choose from {KINDS}")
        object.__setattr__(self, "input_path", Path(self.input_path))
        object.__setattr__(self, "output_path", Path(self.output_path))


def load_table(path: Path) -> tuple[list, list]:
    """Read a CSV file into (header, list of row dicts of strings)."""
    with Path(path).open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise SchemaError(f"{path}: empty file, no CSV header")
        rows = list(reader)
    return list(reader.fieldnames), rows


def validate_columns(recipe: FigureRecipe, header: list) -> None:
    missing = [c for c in REQUIRED_COLUMNS[recipe.kind] if c not in header]
    if missing:
        raise SchemaError(
            f"{recipe.input_path}: missing column(s) {', '.join(missing)} "
            f"required by {recipe.kind}"
        )
