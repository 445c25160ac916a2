"""Tests for the figure renderers.

The key property is fidelity: every y value on a plotted line must appear
verbatim in the source CSV.  Rendering is checked for determinism (same
bytes on re-render) and for honest failure on empty or malformed input.
"""

import csv
from pathlib import Path

import pytest

from fwm_figures import FIGURES, FigureError, build_figure, render
from fwm_figures.cli import main
from fwm_figures.io import load_table

_DIR_FOR = {
    "fig2a": "gain", "fig2b": "gain", "fig2c": "gain",
    "fig4": "z",
    "fig8": "noise_omega", "fig9a": "noise_omega", "fig9b": "noise_omega",
    "fig10": "noise_delta",
    "fig11": "ppt_omega",
    "fig12a": "ppt_delta", "fig12b": "ppt_delta", "fig12c": "ppt_delta",
}


def _csv_rows(path):
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


# ---------------------------------------------------------------- rendering

@pytest.mark.parametrize("name", sorted(FIGURES))
def test_every_figure_renders(name, data_dirs, tmp_path):
    path = render(name, data_dirs[_DIR_FOR[name]], tmp_path)
    assert path == tmp_path / f"{name}.png"
    assert path.stat().st_size > 1000


def test_render_is_deterministic(data_dirs, tmp_path):
    p1 = render("fig9a", data_dirs["noise_omega"], tmp_path / "one")
    p2 = render("fig9a", data_dirs["noise_omega"], tmp_path / "two")
    assert p1.read_bytes() == p2.read_bytes()


def test_unknown_figure(tmp_path):
    with pytest.raises(FigureError, match="unknown figure"):
        render("fig99", tmp_path, tmp_path)


# ------------------------------------------------------------ honest errors

def test_empty_csv_errors_and_writes_nothing(tmp_path):
    src = tmp_path / "in"
    src.mkdir()
    (src / "noise_scan.csv").write_text("")
    out = tmp_path / "out"
    with pytest.raises(FigureError, match="empty CSV"):
        render("fig9a", src, out)
    assert not out.exists()


def test_header_only_csv_errors(tmp_path):
    src = tmp_path / "in"
    src.mkdir()
    (src / "noise_scan.csv").write_text(
        "delta2_over_2pi_MHz,theta_eff_mrad,omega_over_2pi_MHz,db_minus\n")
    with pytest.raises(FigureError, match="no data rows"):
        build_figure("fig9a", src)


def test_missing_column_errors(tmp_path):
    src = tmp_path / "in"
    src.mkdir()
    (src / "noise_scan.csv").write_text("foo,bar\n1,2\n")
    with pytest.raises(FigureError, match="missing columns"):
        build_figure("fig9a", src)


def test_missing_file_errors(tmp_path):
    with pytest.raises(FigureError, match="not found"):
        build_figure("fig9a", tmp_path)


# ----------------------------------------------------------- value fidelity

def test_nid_spectrum_values_match_csv(data_dirs, tmp_path):
    fig = build_figure("fig9a", data_dirs["noise_omega"])
    rows = _csv_rows(data_dirs["noise_omega"] / "noise_scan.csv")
    by_omega = {float(r["omega_over_2pi_MHz"]): float(r["db_minus"])
                for r in rows}
    (ax,) = fig.axes
    lines = [ln for ln in ax.get_lines() if not ln.get_label().startswith("_")]
    assert lines
    for ln in lines:
        for x, y in zip(ln.get_xdata(), ln.get_ydata()):
            assert y == by_omega[float(x)]


def test_gain_stack_values_match_csv(data_dirs):
    fig = build_figure("fig2a", data_dirs["gain"])
    rows = _csv_rows(data_dirs["gain"] / "gain_scan.csv")
    gains = {(r["channel"], int(r["mode_index"]),
              float(r["delta2_over_2pi_MHz"])): float(r["gain"])
             for r in rows}
    ax_a, ax_b = fig.axes[:2]
    for ax, channel in ((ax_a, "a"), (ax_b, "b")):
        plotted = [ln for ln in ax.get_lines() if not ln.get_label().startswith("_")]
        assert plotted
        for ln in plotted:
            mode = int(ln.get_label().split()[-1])
            for x, y in zip(ln.get_xdata(), ln.get_ydata()):
                assert y == gains[(channel, mode, float(x))]


def test_symplectic_values_match_csv(data_dirs):
    fig = build_figure("fig11", data_dirs["ppt_omega"])
    rows = _csv_rows(data_dirs["ppt_omega"] / "ppt_scan.csv")
    vals = {(r["bipartition"], float(r["omega_over_2pi_MHz"])):
            float(r["min_symplectic_eig"]) for r in rows}
    n_lines = 0
    for ax in fig.axes:
        for ln in ax.get_lines():
            if ln.get_label().startswith("_"):
                continue
            n_lines += 1
            for x, y in zip(ln.get_xdata(), ln.get_ydata()):
                assert y == vals[(ln.get_label(), float(x))]
    assert n_lines == 31


def test_symplectic_class_grouping(data_dirs):
    fig = build_figure("fig11", data_dirs["ppt_omega"])
    counts = [len([ln for ln in ax.get_lines() if not ln.get_label().startswith("_")])
              for ax in fig.axes]
    assert counts == [6, 15, 10]


def test_table_round_trip(data_dirs):
    tab = load_table(data_dirs["ppt_omega"] / "ppt_scan.csv",
                     ("bipartition", "min_symplectic_eig"))
    assert tab.n_rows == 31 * 3
    assert set(tab.unique("split_class")) == {"1x5", "2x4", "3x3"}


# ----------------------------------------------------------------- CLI shim

def test_cli_success(data_dirs, tmp_path, capsys):
    rc = main(["--spec", "fig9a", "--in", str(data_dirs["noise_omega"]),
               "--out", str(tmp_path)])
    assert rc == 0
    out = capsys.readouterr().out.strip()
    assert Path(out).exists()


def test_cli_failure_is_clean(tmp_path, capsys):
    rc = main(["--spec", "fig9a", "--in", str(tmp_path),
               "--out", str(tmp_path)])
    assert rc == 2
    assert "error:" in capsys.readouterr().err
