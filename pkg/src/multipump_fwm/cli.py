"""Command-line orchestration: config parsing, sweeps and CSV/JSON emission.

Subcommands: gain-scan, z-scan, noise-scan, ppt-scan, convergence,
calibrate-n.  Configuration is a JSON document quoting frequencies as
nu = omega/2pi in MHz and angles in mrad; grids are lists or
{"start", "stop", "num"} ranges.  Presets for the standard figure layouts
live in presets/.  Output is deterministic CSV (row order fixed by the
grid; floats printed with %.12g) plus optional covariance-matrix JSON
snapshots, so re-running an identical config is byte-identical regardless
of worker count.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import entangle as en
from . import floquet as fq
from . import propagate as pg
from . import spectra as sp
from .params import (Geometry, PhysicalParams, doppler_sigma_for_fwhm,
                     from_mhz)

__all__ = ["RunConfig", "load_config", "emit_config", "main",
           "cmd_gain_scan", "cmd_z_scan", "cmd_noise_scan", "cmd_ppt_scan",
           "cmd_convergence", "cmd_calibrate_n", "PRESET_DIR"]

PRESET_DIR = Path(__file__).resolve().parents[2] / "presets"

_FMT = "%.12g"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    """One sweep definition; all frequencies in /2pi MHz, angles in mrad."""

    # physical parameters
    omega0_rabi_mhz: float = 0.0
    pump_pm_rabi_mhz: tuple[tuple[float, float], ...] = ((220.0, 220.0),)
    delta1_mhz: float = 900.0
    gamma_sp_mhz: float = 5.7
    gamma_d_mhz: float = 1.0
    omega_hf_mhz: float = 3035.0
    g_a_mhz: float = 0.28
    g_b_mhz: float = 0.28
    n_atoms: float = 1.549e9
    cell_length_m: float = 0.0125
    wavelength_m: float = 795e-9
    doppler_fwhm_mhz: float = 540.0      # 0 = cold vapor

    # numerics
    q_cut: int = 20
    q_ref: int = 18                      # convergence reference truncation
    doppler_nodes: int = 32
    n_phi: int = 1024

    # sweep grids (singletons allowed)
    theta_eff_mrad: tuple[float, ...] = (3.0,)
    delta2_mhz: tuple[float, ...] = (5.5,)
    omega_mhz: tuple[float, ...] = (2.0,)
    z_cm: tuple[float, ...] = (1.25,)

    # detection / extraction
    alpha: float = 1.0
    eta: float = 0.95
    modes: tuple[int, ...] = (-4, -2, 0, 2, 4)
    save_cm: bool = False

    # execution
    workers: int = 1
    seed: int = 0                        # randomized test utilities only
    out_dir: str = "out"

    def __post_init__(self):
        for name in ("theta_eff_mrad", "delta2_mhz", "omega_mhz", "z_cm"):
            if not getattr(self, name):
                raise ConfigError(f"grid '{name}' must be nonempty")
        if not 0.0 <= self.eta <= 1.0:
            raise ConfigError("eta must lie in [0, 1]")
        offsets = tuple(range(1, len(self.pump_pm_rabi_mhz) + 1))
        if offsets and self.q_cut < max(offsets):
            raise ConfigError("q_cut must be >= the largest pump offset")
        if self.q_ref < 0 or self.q_cut < 0:
            raise ConfigError("truncations must be >= 0")
        object.__setattr__(self, "pump_pm_rabi_mhz",
                           tuple(tuple(p) for p in self.pump_pm_rabi_mhz))
        for name in ("theta_eff_mrad", "delta2_mhz", "omega_mhz", "z_cm",
                     "modes"):
            object.__setattr__(self, name, tuple(getattr(self, name)))

    # ---------------------------------------------------------- conversion

    def physical(self, delta2_mhz: float) -> PhysicalParams:
        sigma = (doppler_sigma_for_fwhm(self.doppler_fwhm_mhz,
                                        self.wavelength_m)
                 if self.doppler_fwhm_mhz > 0 else 0.0)
        return PhysicalParams(
            omega0_rabi=from_mhz(self.omega0_rabi_mhz),
            delta1=from_mhz(self.delta1_mhz),
            delta2=from_mhz(delta2_mhz),
            gamma_sp=from_mhz(self.gamma_sp_mhz),
            gamma_d=from_mhz(self.gamma_d_mhz),
            omega_hf=from_mhz(self.omega_hf_mhz),
            g_a=from_mhz(self.g_a_mhz),
            g_b=from_mhz(self.g_b_mhz),
            n_atoms=self.n_atoms,
            cell_length=self.cell_length_m,
            wavelength=self.wavelength_m,
            doppler_sigma=sigma,
            omega_pm_rabi=tuple(
                (from_mhz(p), from_mhz(m)) for p, m in self.pump_pm_rabi_mhz),
        )

    def geometry(self, theta_mrad: float) -> Geometry:
        return Geometry.from_theta_eff(theta_mrad * 1e-3, self.wavelength_m)

    def layout(self, q: int | None = None) -> fq.FloquetLayout:
        offsets = tuple(range(1, len(self.pump_pm_rabi_mhz) + 1))
        if self.omega0_rabi_mhz > 0 and not offsets:
            offsets = ()
        return fq.FloquetLayout(q_cut=q if q is not None else self.q_cut,
                                pump_offsets=offsets)

    def doppler(self) -> pg.DopplerSpec:
        sigma = (doppler_sigma_for_fwhm(self.doppler_fwhm_mhz,
                                        self.wavelength_m)
                 if self.doppler_fwhm_mhz > 0 else 0.0)
        return pg.DopplerSpec(sigma=sigma, n_nodes=self.doppler_nodes)


# ---------------------------------------------------------------- config IO

def _expand_grid(value):
    if isinstance(value, dict):
        missing = {"start", "stop", "num"} - set(value)
        if missing:
            raise ConfigError(f"grid range missing keys: {sorted(missing)}")
        return tuple(float(x) for x in
                     np.linspace(value["start"], value["stop"],
                                 int(value["num"])))
    if isinstance(value, (int, float)):
        return (float(value),)
    return tuple(float(x) for x in value)


def load_config(path_or_dict) -> RunConfig:
    if isinstance(path_or_dict, (str, Path)):
        with open(path_or_dict) as f:
            raw = json.load(f)
    else:
        raw = dict(path_or_dict)
    known = {f.name for f in dataclasses.fields(RunConfig)}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    for key in ("theta_eff_mrad", "delta2_mhz", "omega_mhz", "z_cm"):
        if key in raw:
            raw[key] = _expand_grid(raw[key])
    if "modes" in raw:
        raw["modes"] = tuple(int(n) for n in raw["modes"])
    if "pump_pm_rabi_mhz" in raw:
        raw["pump_pm_rabi_mhz"] = tuple(
            tuple(float(x) for x in pair) for pair in raw["pump_pm_rabi_mhz"])
    try:
        return RunConfig(**raw)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def emit_config(config: RunConfig) -> str:
    return json.dumps(dataclasses.asdict(config), indent=2, sort_keys=True)


# ------------------------------------------------------------- CSV plumbing

def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_FMT % x if isinstance(x, float) else x for x in row])


def _cm_snapshot(path: Path, cm: sp.CovarianceMatrix, point: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    doc = {
        "point": point,
        "eta": cm.eta,
        "omega_over_2pi_MHz": point.get("omega_mhz", 0.0),
        "modes": list(cm.modes),
        "ordering": "per mode n: (P_a^(n), Q_a^(n), P_b^(n), Q_b^(n))",
        "v": [[float(_FMT % x) for x in row] for row in cm.v],
    }
    with open(path, "w") as f:
        json.dump(doc, f, indent=1, sort_keys=True)


def _pool_map(func, jobs, workers: int):
    if workers <= 1 or len(jobs) <= 1:
        return [func(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, jobs))


# --------------------------------------------------------------- gain scans

def _gain_point(job):
    config, theta, d2, z_list = job
    p = config.physical(d2)
    lay = config.layout()
    r = pg.build_R(p, config.geometry(theta), lay, config.doppler(),
                   n_phi=config.n_phi)
    rows = []
    for z in z_list:
        t = pg.mode_gains(r, lay, config.alpha, z=z * 1e-2)
        for ch, g, ph in (("a", t.gain_a, t.phase_a),
                          ("b", t.gain_b, t.phase_b)):
            for i, n in enumerate(t.mode_indices):
                rows.append([d2, theta, z, ch, int(n),
                             float(g[i]), float(ph[i])])
    return rows


_GAIN_HEADER = ["delta2_over_2pi_MHz", "theta_eff_mrad", "z_cm", "channel",
                "mode_index", "gain", "phase_rad"]


def cmd_gain_scan(config: RunConfig, out: Path) -> Path:
    z = [config.cell_length_m * 100.0]
    jobs = [(config, th, d2, z) for th in config.theta_eff_mrad
            for d2 in config.delta2_mhz]
    rows = [r for chunk in _pool_map(_gain_point, jobs, config.workers)
            for r in chunk]
    path = out / "gain_scan.csv"
    _write_csv(path, _GAIN_HEADER, rows)
    return path


def cmd_z_scan(config: RunConfig, out: Path) -> Path:
    jobs = [(config, th, d2, list(config.z_cm))
            for th in config.theta_eff_mrad for d2 in config.delta2_mhz]
    rows = [r for chunk in _pool_map(_gain_point, jobs, config.workers)
            for r in chunk]
    path = out / "z_scan.csv"
    _write_csv(path, _GAIN_HEADER, rows)
    return path


# -------------------------------------------------------------- noise scans

def _covariance_point(job):
    config, theta, d2, om = job
    p = config.physical(d2)
    lay = config.layout()
    cm, gains = sp.noise_covariance(
        p, config.geometry(theta), lay, from_mhz(om), config.doppler(),
        alpha=config.alpha, eta=config.eta, modes=config.modes,
        n_phi=config.n_phi)
    return cm, gains


def _noise_point(job):
    config, theta, d2, om = job
    cm, gains = _covariance_point(job)
    tot = en.total_noise_difference(cm)
    spec = en.intensity_spectra(cm, gains, modes=config.modes)
    row = [d2, theta, om, config.eta, tot,
           spec.var_a, spec.var_b, spec.var_plus, spec.var_minus, spec.sql,
           spec.db("a"), spec.db("b"), spec.db("plus"), spec.db("minus")]
    return row, cm


_NOISE_HEADER = ["delta2_over_2pi_MHz", "theta_eff_mrad",
                 "omega_over_2pi_MHz", "eta", "total_nd",
                 "var_a", "var_b", "var_plus", "var_minus", "sql",
                 "db_a", "db_b", "db_plus", "db_minus"]


def cmd_noise_scan(config: RunConfig, out: Path) -> Path:
    jobs = [(config, th, d2, om) for th in config.theta_eff_mrad
            for d2 in config.delta2_mhz for om in config.omega_mhz]
    results = _pool_map(_noise_point, jobs, config.workers)
    rows = [row for row, _cm in results]
    path = out / "noise_scan.csv"
    _write_csv(path, _NOISE_HEADER, rows)
    if config.save_cm:
        for i, ((_, th, d2, om), (_, cm)) in enumerate(zip(jobs, results)):
            _cm_snapshot(out / f"cm_{i:04d}.json", cm,
                         {"theta_eff_mrad": th, "delta2_mhz": d2,
                          "omega_mhz": om})
    return path


# ---------------------------------------------------------------- PPT scans

def _ppt_point(job):
    config, theta, d2, om = job
    cm, _gains = _covariance_point(job)
    rows = []
    for bp in en.enumerate_bipartitions(6):
        ev = en.ppt_min_eigenvalue(cm, bp)
        rows.append([d2, theta, om, config.eta, str(bp), bp.split_class,
                     float(ev)])
    return rows


_PPT_HEADER = ["delta2_over_2pi_MHz", "theta_eff_mrad", "omega_over_2pi_MHz",
               "eta", "bipartition", "split_class", "min_symplectic_eig"]


def cmd_ppt_scan(config: RunConfig, out: Path) -> Path:
    jobs = [(config, th, d2, om) for th in config.theta_eff_mrad
            for d2 in config.delta2_mhz for om in config.omega_mhz]
    rows = [r for chunk in _pool_map(_ppt_point, jobs, config.workers)
            for r in chunk]
    path = out / "ppt_scan.csv"
    _write_csv(path, _PPT_HEADER, rows)
    return path


# -------------------------------------------------------------- convergence

def cmd_convergence(config: RunConfig, out: Path) -> Path:
    rows = []
    for theta in config.theta_eff_mrad:
        p = config.physical(config.delta2_mhz[0])
        res = pg.convergence_check(
            p, config.geometry(theta),
            np.array([from_mhz(d) for d in config.delta2_mhz]),
            config.q_cut, config.q_ref, doppler=config.doppler(),
            alpha=config.alpha, n_phi=config.n_phi,
            modes=tuple(config.modes))
        for (ch, n), vals in sorted(res.items()):
            for d2, v in zip(config.delta2_mhz, vals):
                rows.append([d2, theta, config.q_cut, config.q_ref, ch,
                             int(n), float(v)])
    path = out / "convergence.csv"
    _write_csv(path, ["delta2_over_2pi_MHz", "theta_eff_mrad", "q", "q_ref",
                      "channel", "mode_index", "rel_residual"], rows)
    return path


# -------------------------------------------------------------- calibration

def cmd_calibrate_n(config: RunConfig, out: Path,
                    target_gain: float = 5.0) -> Path:
    p = config.physical(config.delta2_mhz[0])
    if p.omega0_rabi == 0.0 and p.omega_pm_rabi:
        # single-pump reference configuration: reuse the pump-pair drive
        p = p.with_(omega0_rabi=p.omega_pm_rabi[0][0])
    n = pg.calibrate_n(p, target_gain, doppler=config.doppler())
    updated = dataclasses.replace(config, n_atoms=n)
    path = out / "calibrated_config.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(emit_config(updated))
    return path


# --------------------------------------------------------------------- main

_COMMANDS = {
    "gain-scan": cmd_gain_scan,
    "z-scan": cmd_z_scan,
    "noise-scan": cmd_noise_scan,
    "ppt-scan": cmd_ppt_scan,
    "convergence": cmd_convergence,
    "calibrate-n": cmd_calibrate_n,
}


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="mpfwm",
        description="Multimode four-wave-mixing sweeps "
                    "(gain, noise, entanglement)")
    ap.add_argument("command", choices=sorted(_COMMANDS))
    ap.add_argument("--config", help="JSON config file")
    ap.add_argument("--preset", help="named preset from presets/")
    ap.add_argument("--out", help="output directory (overrides config)")
    ap.add_argument("--workers", type=int, help="worker processes")
    ap.add_argument("--target-gain", type=float, default=5.0,
                    help="calibrate-n target (default 5)")
    return ap


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.preset and args.config:
            raise ConfigError("give either --preset or --config, not both")
        if args.preset:
            path = PRESET_DIR / f"{args.preset}.json"
            if not path.exists():
                raise ConfigError(
                    f"unknown preset '{args.preset}' (searched {path})")
            config = load_config(path)
        elif args.config:
            config = load_config(args.config)
        else:
            config = RunConfig()
        if args.workers is not None:
            config = dataclasses.replace(config, workers=args.workers)
        out = Path(args.out) if args.out else Path(config.out_dir)
        cmd = _COMMANDS[args.command]
        if args.command == "calibrate-n":
            path = cmd(config, out, args.target_gain)
        else:
            path = cmd(config, out)
        print(path)
        return 0
    except Exception as exc:                      # noqa: BLE001
        json.dump({"error": type(exc).__name__, "message": str(exc)},
                  sys.stderr)
        sys.stderr.write("\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
