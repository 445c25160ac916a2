"""Figure specs and renderers for the sweep CSV outputs.

Each spec names the CSV it consumes and the layout used to display it.
Renderers only select, group and plot columns; the noise CSVs already
carry their dB columns, so no arithmetic happens here.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from matplotlib.figure import Figure

from .io import FigureError, Table, load_table

DELTA_COL = "delta2_over_2pi_MHz"
OMEGA_COL = "omega_over_2pi_MHz"
THETA_COL = "theta_eff_mrad"

DELTA_LABEL = r"$\delta/2\pi$ (MHz)"
OMEGA_LABEL = r"$\omega/2\pi$ (MHz)"

# modes below this fraction of the channel peak are left out of the line
# plots (they are still shown in the transverse-profile insets)
DISPLAY_FLOOR = 0.02


@dataclass(frozen=True)
class FigureSpec:
    """Declarative description of one figure."""

    name: str
    csv: str                      # input file inside --in
    kind: str                     # renderer key
    x: str = DELTA_COL            # abscissa column
    db: bool = True               # use dB columns where there is a choice
    sql_ref: float | None = None  # horizontal reference line (dB or linear)
    title: str = ""


# ------------------------------------------------------------------ helpers

def _check_single(tab: Table, col: str, name: str) -> float:
    vals = tab.unique(col)
    if len(vals) != 1:
        raise FigureError(
            f"{name} expects a single {col} value, got {list(vals)}")
    return float(vals[0])


def _mode_selection(tab: Table, channel: str) -> list[int]:
    """Even modes whose peak gain clears the display floor (mode 0 always)."""
    sub = tab.where(tab["channel"] == channel)
    peaks = {}
    for n in sub.unique("mode_index"):
        m = int(n)
        peaks[m] = float(np.max(sub.where(sub["mode_index"] == n)["gain"]))
    top = max(peaks.values(), default=0.0)
    keep = [m for m, g in sorted(peaks.items())
            if m % 2 == 0 and (m == 0 or g >= DISPLAY_FLOOR * top)]
    return keep


def _ref_line(ax, level):
    if level is not None:
        ax.axhline(level, color="0.4", ls="--", lw=0.8, zorder=0)


# ---------------------------------------------------------------- renderers

def _render_gain_stack(spec: FigureSpec, tab: Table) -> Figure:
    theta = _check_single(tab, THETA_COL, spec.name)
    fig = Figure(figsize=(6.0, 6.4))
    axes = fig.subplots(2, 1, sharex=True)
    for ax, channel, label in zip(axes, "ab", ("probe", "conjugate")):
        sub = tab.where(tab["channel"] == channel)
        for m in _mode_selection(tab, channel):
            line = sub.where(sub["mode_index"] == m)
            order = np.argsort(line[spec.x])
            ax.plot(line[spec.x][order], line["gain"][order],
                    label=f"n = {m:+d}" if m else "n = 0")
        ax.set_ylabel(f"{label} gain")
        ax.legend(fontsize=7, ncol=2)
    axes[1].set_xlabel(DELTA_LABEL)
    axes[0].set_title(spec.title or
                      rf"$\theta_{{\rm eff}}$ = {theta:g} mrad")

    # transverse emission profile at the gain peak: probe row over
    # conjugate row, one cell per ladder mode
    sub_a = tab.where(tab["channel"] == "a")
    d_star = float(sub_a[spec.x][np.argmax(sub_a["gain"])])
    at_peak = tab.where(tab[spec.x] == d_star)
    modes = np.sort(at_peak.unique("mode_index")).astype(int)
    grid = np.zeros((2, len(modes)))
    for i, channel in enumerate("ab"):
        ch = at_peak.where(at_peak["channel"] == channel)
        for j, m in enumerate(modes):
            grid[i, j] = float(ch.where(ch["mode_index"] == m)["gain"][0])
    inset = axes[0].inset_axes([0.60, 0.55, 0.36, 0.34])
    inset.imshow(grid, aspect="auto", cmap="inferno", interpolation="nearest")
    inset.set_yticks([0, 1], ["a", "b"], fontsize=6)
    step = max(1, len(modes) // 8)
    inset.set_xticks(range(0, len(modes), step), modes[::step], fontsize=5)
    inset.set_title(rf"profile at $\delta/2\pi$ = {d_star:g} MHz", fontsize=6)
    return fig


def _render_z_panels(spec: FigureSpec, tab: Table) -> Figure:
    thetas = tab.unique(THETA_COL)
    fig = Figure(figsize=(4.0 * len(thetas), 3.6))
    axes = np.atleast_1d(fig.subplots(1, len(thetas), sharey=True))
    for ax, theta in zip(axes, thetas):
        sub = tab.where(tab[THETA_COL] == theta)
        for channel, style in (("a", "-"), ("b", "--")):
            for m in _mode_selection(sub, channel):
                line = sub.where((sub["channel"] == channel)
                                 & (sub["mode_index"] == m))
                order = np.argsort(line["z_cm"])
                ax.plot(line["z_cm"][order], line["gain"][order], style,
                        label=f"{channel}, n = {m:+d}")
        ax.set_xlabel("z (cm)")
        ax.set_title(rf"$\theta_{{\rm eff}}$ = {float(theta):g} mrad")
        ax.legend(fontsize=6, ncol=2)
    axes[0].set_ylabel("gain")
    return fig


_NOISE_PANELS = (("db_a", "probe"), ("db_b", "conjugate"),
                 ("db_plus", "sum"), ("db_minus", "difference"))
_NOISE_LINEAR = (("var_a", "probe"), ("var_b", "conjugate"),
                 ("var_plus", "sum"), ("var_minus", "difference"))


def _point_label(theta, delta):
    return (rf"$\theta$ = {float(theta):g} mrad, "
            rf"$\delta/2\pi$ = {float(delta):g} MHz")


def _render_noise_panels(spec: FigureSpec, tab: Table) -> Figure:
    panels = _NOISE_PANELS if spec.db else _NOISE_LINEAR
    fig = Figure(figsize=(7.2, 5.6))
    axes = fig.subplots(2, 2, sharex=True).ravel()
    for ax, (col, label) in zip(axes, panels):
        for theta in tab.unique(THETA_COL):
            for delta in tab.unique(DELTA_COL):
                line = tab.where((tab[THETA_COL] == theta)
                                 & (tab[DELTA_COL] == delta))
                if line.n_rows == 0:
                    continue
                order = np.argsort(line[spec.x])
                ax.plot(line[spec.x][order], line[col][order],
                        label=_point_label(theta, delta))
        _ref_line(ax, spec.sql_ref)
        ax.set_ylabel(f"{label} ({'dB' if spec.db else 'linear'})")
    for ax in axes[2:]:
        ax.set_xlabel(OMEGA_LABEL)
    axes[0].legend(fontsize=6)
    if spec.title:
        fig.suptitle(spec.title)
    return fig


def _render_nid_spectrum(spec: FigureSpec, tab: Table) -> Figure:
    fig = Figure(figsize=(5.6, 3.8))
    ax = fig.subplots()
    col = "db_minus" if spec.db else "var_minus"
    for theta in tab.unique(THETA_COL):
        for delta in tab.unique(DELTA_COL):
            line = tab.where((tab[THETA_COL] == theta)
                             & (tab[DELTA_COL] == delta))
            if line.n_rows == 0:
                continue
            order = np.argsort(line[spec.x])
            ax.plot(line[spec.x][order], line[col][order],
                    label=_point_label(theta, delta))
    _ref_line(ax, spec.sql_ref)
    ax.set_xlabel(OMEGA_LABEL)
    ax.set_ylabel(r"$\Delta^2 I_-$ (dB rel. SQL)")
    ax.legend(fontsize=7)
    if spec.title:
        ax.set_title(spec.title)
    return fig


def _render_nid_delta(spec: FigureSpec, tab: Table) -> Figure:
    fig = Figure(figsize=(5.6, 3.8))
    ax = fig.subplots()
    cols = (("db_minus", r"$\Delta^2 I_-$"), ("db_plus", r"$\Delta^2 I_+$")) \
        if spec.db else (("var_minus", "difference"), ("var_plus", "sum"))
    for omega in tab.unique(OMEGA_COL):
        for theta in tab.unique(THETA_COL):
            line = tab.where((tab[OMEGA_COL] == omega)
                             & (tab[THETA_COL] == theta))
            if line.n_rows == 0:
                continue
            order = np.argsort(line[spec.x])
            for col, label in cols:
                ax.plot(line[spec.x][order], line[col][order],
                        label=rf"{label}, $\omega/2\pi$ = {float(omega):g} MHz")
    _ref_line(ax, spec.sql_ref)
    ax.set_xlabel(DELTA_LABEL)
    ax.set_ylabel("intensity noise (dB rel. SQL)")
    ax.legend(fontsize=7)
    if spec.title:
        ax.set_title(spec.title)
    return fig


_CLASS_ORDER = ("1x5", "2x4", "3x3")


def _render_symplectic_panels(spec: FigureSpec, tab: Table) -> Figure:
    theta = _check_single(tab, THETA_COL, spec.name)
    fig = Figure(figsize=(6.0, 8.0))
    axes = fig.subplots(3, 1, sharex=True)
    for ax, cls in zip(axes, _CLASS_ORDER):
        sub = tab.where(tab["split_class"] == cls)
        if sub.n_rows == 0:
            raise FigureError(
                f"{spec.name}: no rows with split_class = {cls}")
        for bp in sub.unique("bipartition"):
            line = sub.where(sub["bipartition"] == bp)
            order = np.argsort(line[spec.x])
            ax.plot(line[spec.x][order],
                    line["min_symplectic_eig"][order], lw=0.9, label=bp)
        _ref_line(ax, spec.sql_ref)
        ax.set_ylabel(rf"min $\tilde\nu$  ({cls})")
        ax.legend(fontsize=5, ncol=3)
    axes[-1].set_xlabel(
        OMEGA_LABEL if spec.x == OMEGA_COL else DELTA_LABEL)
    axes[0].set_title(spec.title or
                      rf"$\theta_{{\rm eff}}$ = {theta:g} mrad")
    return fig


_RENDERERS = {
    "gain_stack": _render_gain_stack,
    "z_panels": _render_z_panels,
    "noise_panels": _render_noise_panels,
    "nid_spectrum": _render_nid_spectrum,
    "nid_delta": _render_nid_delta,
    "symplectic_panels": _render_symplectic_panels,
}

_REQUIRED = {
    "gain_stack": (DELTA_COL, THETA_COL, "channel", "mode_index", "gain"),
    "z_panels": (THETA_COL, "z_cm", "channel", "mode_index", "gain"),
    "noise_panels": (DELTA_COL, THETA_COL, OMEGA_COL,
                     "db_a", "db_b", "db_plus", "db_minus"),
    "nid_spectrum": (DELTA_COL, THETA_COL, OMEGA_COL, "db_minus"),
    "nid_delta": (DELTA_COL, THETA_COL, OMEGA_COL, "db_minus", "db_plus"),
    "symplectic_panels": (THETA_COL, OMEGA_COL, "bipartition",
                          "split_class", "min_symplectic_eig"),
}

FIGURES: dict[str, FigureSpec] = {
    s.name: s for s in (
        FigureSpec("fig2a", "gain_scan.csv", "gain_stack"),
        FigureSpec("fig2b", "gain_scan.csv", "gain_stack"),
        FigureSpec("fig2c", "gain_scan.csv", "gain_stack"),
        FigureSpec("fig4", "z_scan.csv", "z_panels"),
        FigureSpec("fig8", "noise_scan.csv", "noise_panels",
                   x=OMEGA_COL, sql_ref=0.0),
        FigureSpec("fig9a", "noise_scan.csv", "nid_spectrum",
                   x=OMEGA_COL, sql_ref=0.0),
        FigureSpec("fig9b", "noise_scan.csv", "nid_spectrum",
                   x=OMEGA_COL, sql_ref=0.0),
        FigureSpec("fig10", "noise_scan.csv", "nid_delta",
                   x=DELTA_COL, sql_ref=0.0),
        FigureSpec("fig11", "ppt_scan.csv", "symplectic_panels",
                   x=OMEGA_COL, sql_ref=1.0),
        FigureSpec("fig12a", "ppt_scan.csv", "symplectic_panels",
                   x=DELTA_COL, sql_ref=1.0),
        FigureSpec("fig12b", "ppt_scan.csv", "symplectic_panels",
                   x=DELTA_COL, sql_ref=1.0),
        FigureSpec("fig12c", "ppt_scan.csv", "symplectic_panels",
                   x=DELTA_COL, sql_ref=1.0),
    )
}


# -------------------------------------------------------------- entry points

def build_figure(name: str, in_dir: Path) -> Figure:
    """Load the CSV for a named figure and build (but do not save) it."""
    try:
        spec = FIGURES[name]
    except KeyError:
        raise FigureError(
            f"unknown figure '{name}' (have {sorted(FIGURES)})") from None
    tab = load_table(Path(in_dir) / spec.csv, _REQUIRED[spec.kind])
    return _RENDERERS[spec.kind](spec, tab)


def render(name: str, in_dir: Path, out_dir: Path) -> Path:
    """Render one figure to <out_dir>/<name>.png and return the path.

    The PNG is written without timestamps, so identical inputs give
    byte-identical output.
    """
    fig = build_figure(name, in_dir)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{name}.png"
    fig.savefig(path, dpi=150, format="png")
    return path
