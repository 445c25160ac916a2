"""Generates small but genuine sweep CSVs once per session.

The figure package is exercised against files written by the actual sweep
commands (reduced grids, cold vapor, small truncation) so the column
contract is tested end to end, not against hand-typed fixtures.
"""

import pytest

from multipump_fwm import cli as mp


def _base(**kw):
    cfg = dict(
        q_cut=2, q_ref=2, n_phi=64, doppler_fwhm_mhz=0.0, doppler_nodes=1,
        modes=(-2, 0, 2), theta_eff_mrad=(3.0,), delta2_mhz=(5.5,),
        omega_mhz=(2.0,), workers=1,
    )
    cfg.update(kw)
    return mp.RunConfig(**cfg)


@pytest.fixture(scope="session")
def data_dirs(tmp_path_factory):
    root = tmp_path_factory.mktemp("sweeps")
    dirs = {}

    d = root / "gain"
    mp.cmd_gain_scan(_base(delta2_mhz=(0.0, 3.0, 5.5, 8.0, 12.0)), d)
    dirs["gain"] = d

    d = root / "z"
    mp.cmd_z_scan(_base(theta_eff_mrad=(3.0, 6.0),
                        z_cm=(0.0, 0.4, 0.8, 1.25)), d)
    dirs["z"] = d

    d = root / "noise_omega"
    mp.cmd_noise_scan(_base(omega_mhz=(0.5, 2.0, 5.0, 9.0)), d)
    dirs["noise_omega"] = d

    d = root / "noise_delta"
    mp.cmd_noise_scan(_base(delta2_mhz=(2.0, 5.5, 9.0, 13.0)), d)
    dirs["noise_delta"] = d

    d = root / "ppt_omega"
    mp.cmd_ppt_scan(_base(omega_mhz=(0.5, 2.0, 5.0)), d)
    dirs["ppt_omega"] = d

    d = root / "ppt_delta"
    mp.cmd_ppt_scan(_base(delta2_mhz=(2.0, 5.5, 9.0)), d)
    dirs["ppt_delta"] = d

    return dirs
