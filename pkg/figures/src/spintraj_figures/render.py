"""Rendering: one deterministic image per recipe.

Everything that could vary between runs is pinned (backend, figure
size, fonts via matplotlib defaults, PNG metadata), so re-rendering the
same recipe over the same inputs is pixel-identical.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .recipes import FigureRecipe, SchemaError, load_table, validate_columns

_FIGSIZE = (6.0, 4.0)
_PNG_METADATA = {"Software": "spintraj-figures"}


def render(recipe: FigureRecipe) -> Path:
    """Draw the recipe's figure kind and write the image file."""
    header, rows = load_table(recipe.input_path)
    validate_columns(recipe, header)
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    try:
        _DRAWERS[recipe.kind](ax, header, rows, recipe)
        if recipe.title:
            ax.set_title(recipe.title)
        recipe.output_path.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(
            recipe.output_path,
            dpi=recipe.dpi,
            metadata=_PNG_METADATA if recipe.output_path.suffix == ".png" else None,
        )
    finally:
        plt.close(fig)
    return recipe.output_path


def _column(rows, name) -> np.ndarray:
    return np.array([float(r[name]) for r in rows])


def _draw_trajectory_overlay(ax, header, rows, recipe):
    t = _column(rows, "time")
    ax.plot(t, _column(rows, "sz_traj"), label="spin-wave trajectory", lw=1.2)
    ax.plot(
        t, _column(rows, "sz_exact"), label="exact trajectory", lw=1.0, ls="--"
    )
    ax.set_xlabel(r"$\kappa t$")
    ax.set_ylabel(r"$\langle \hat{S}^z \rangle$")
    ax.legend(frameon=False)


def _draw_steady_state_sweep(ax, header, rows, recipe):
    parameter = header[0]
    keep = [
        r
        for r in rows
        if r.get("observable") == recipe.observable
        and r.get("status", "ok") == "ok"
        and r.get("steady_mean") not in (None, "")
    ]
    ax.set_xlabel(parameter)
    ax.set_ylabel(f"steady-state {recipe.observable}")
    if not keep:
        ax.annotate(
            "no completed sweep points",
            xy=(0.5, 0.5),
            xycoords="axes fraction",
            ha="center",
            va="center",
            color="tab:red",
        )
        return
    x = _column(keep, parameter)
    order = np.argsort(x)
    y = _column(keep, "steady_mean")[order]
    err = _column(keep, "steady_stderr")[order]
    ax.errorbar(x[order], y, yerr=err, marker="o", capsize=3, lw=1.2)


def _draw_scaling_inset(ax, header, rows, recipe):
    n = _column(rows, "N")
    y = _column(rows, "entropy_max")
    order = np.argsort(n)
    n, y = n[order], y[order]
    ax.semilogx(n, y, marker="o", ls="none", label="steady-state maximum")
    if len(n) >= 2:
        slope, intercept = np.polyfit(np.log(n), y, 1)
        grid = np.geomspace(n.min(), n.max(), 64)
        ax.semilogx(
            grid,
            slope * np.log(grid) + intercept,
            ls="--",
            label=f"fit: {slope:.3f} log N + {intercept:.3f}",
        )
    ax.set_xlabel("N")
    ax.set_ylabel(r"$\bar{S}_E^{\max}$")
    ax.legend(frameon=False)


def _draw_qc_correlator(ax, header, rows, recipe):
    spins = sorted({float(r["S"]) for r in rows})
    for S in spins:
        group = [r for r in rows if float(r["S"]) == S]
        w = _column(group, "omega")
        order = np.argsort(w)
        ax.errorbar(
            w[order],
            _column(group, "value")[order],
            yerr=_column(group, "stderr")[order],
            marker="o",
            capsize=3,
            lw=1.2,
            label=f"S = {S:g}",
        )
    ax.axhline(0.0, color="gray", lw=0.6)
    ax.set_xlabel(r"$\omega / \kappa$")
    ax.set_ylabel("quantum-classical correlator")
    ax.legend(frameon=False)


_DRAWERS = {
    "trajectory-overlay": _draw_trajectory_overlay,
    "steady-state-sweep": _draw_steady_state_sweep,
    "scaling-inset": _draw_scaling_inset,
    "qc-correlator": _draw_qc_correlator,
}
