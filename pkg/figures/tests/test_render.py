"""Rendering determinism, schema validation, and the four figure kinds."""

from pathlib import Path

import pytest

from spintraj_figures import FigureRecipe, RecipeError, SchemaError, render


def write(path: Path, text: str) -> Path:
    path.write_text(text)
    return path


@pytest.fixture
def tables(tmp_path):
    paths = {}
    paths["trajectory-overlay"] = write(
        tmp_path / "paired_trajectory.csv",
        "time,sz_traj,sz_exact,entropy_traj,entropy_exact,sw_density\n"
        "0,8,8,0,0,0\n"
        "0.5,6.1,6.2,0.3,0.31,0.004\n"
        "1.0,3.9,3.8,0.5,0.52,0.007\n",
    )
    paths["steady-state-sweep"] = write(
        tmp_path / "sweep_summary.csv",
        "omega,observable,steady_mean,steady_stderr,n,status\n"
        "0.95,entropy,0.21,0.01,100,ok\n"
        "0.95,sw_density,0.004,0.0002,100,ok\n"
        "1.06,entropy,0.35,0.02,100,ok\n"
        "1.2,entropy,0.3,0.02,100,ok\n",
    )
    paths["scaling-inset"] = write(
        tmp_path / "scaling_summary.csv",
        "N,omega_star,entropy_max,sw_density_peak\n"
        "16,1.06,0.21,0.009\n"
        "32,1.06,0.29,0.006\n"
        "64,1.06,0.37,0.004\n",
    )
    paths["qc-correlator"] = write(
        tmp_path / "qc_sweep.csv",
        "S,omega,value,stderr,shots\n"
        "16,0.6,170,6,64\n"
        "16,1.6,30,5,128\n"
        "32,0.6,700,30,64\n"
        "32,1.6,150,25,128\n",
    )
    return paths


class TestRender:
    @pytest.mark.parametrize(
        "kind",
        ["trajectory-overlay", "steady-state-sweep", "scaling-inset", "qc-correlator"],
    )
    def test_kinds_render(self, kind, tables, tmp_path):
        out = render(
            FigureRecipe(kind=kind, input_path=tables[kind], output_path=tmp_path / f"{kind}.png")
        )
        assert out.exists() and out.stat().st_size > 0

    def test_rerender_pixel_identical(self, tables, tmp_path):
        for kind, table in tables.items():
            a = render(FigureRecipe(kind=kind, input_path=table, output_path=tmp_path / "a.png"))
            first = a.read_bytes()
            b = render(FigureRecipe(kind=kind, input_path=table, output_path=tmp_path / "b.png"))
            assert b.read_bytes() == first

    def test_missing_column_schema_error(self, tmp_path):
        bad = write(tmp_path / "bad.csv", "time,sz_traj\n0,8\n")
        with pytest.raises(SchemaError, match="sz_exact"):
            render(
                FigureRecipe(
                    kind="trajectory-overlay", input_path=bad, output_path=tmp_path / "x.png"
                )
            )

    def test_empty_sweep_renders_warning(self, tmp_path):
        empty = write(
            tmp_path / "sweep_summary.csv",
            "omega,observable,steady_mean,steady_stderr,n,status\n"
            "0.95,,,,,RunnerError: every trajectory failed\n",
        )
        out = render(
            FigureRecipe(
                kind="steady-state-sweep", input_path=empty, output_path=tmp_path / "e.png"
            )
        )
        assert out.exists() and out.stat().st_size > 0

    def test_unknown_kind_rejected(self, tmp_path):
        with pytest.raises(RecipeError, match="unknown figure kind"):
            FigureRecipe(kind="pie-chart", input_path="x.csv", output_path="y.png")
