"""Intensity-difference squeezing across the analysis band.

The probe/conjugate pairs are born together, so the *difference* of the
two photocurrents fluctuates less than two independent coherent beams
(the standard quantum limit, SQL) — but only inside the gain bandwidth.
This demo sweeps the analysis frequency omega at the 3 mrad operating
point and prints where the difference noise crosses back above the SQL.

Run:  python3 demos/squeezing_spectrum.py   (~2 min, reduced numerics)
"""

import numpy as np

from multipump_fwm import entangle as en
from multipump_fwm import floquet as fq
from multipump_fwm import propagate as pg
from multipump_fwm import spectra as sp
from multipump_fwm.params import (Geometry, PhysicalParams,
                                  doppler_sigma_for_fwhm, from_mhz)

SIGMA = doppler_sigma_for_fwhm(540.0, 795e-9)

PARAMS = PhysicalParams(
    omega0_rabi=0.0,
    omega_pm_rabi=((from_mhz(220.0), from_mhz(220.0)),),
    delta1=from_mhz(900.0), delta2=from_mhz(5.5),
    gamma_sp=from_mhz(5.7), gamma_d=from_mhz(1.0),
    omega_hf=from_mhz(3035.0),
    g_a=from_mhz(0.28), g_b=from_mhz(0.28),
    n_atoms=1.549e9, cell_length=0.0125, wavelength=795e-9,
    doppler_sigma=SIGMA,
)

Q, N_PHI, NODES = 8, 256, 8
ETA = 0.95                       # detection efficiency
# the photodiodes see the whole beams, i.e. every bright ladder order
MODES = (-4, -2, 0, 2, 4)
OMEGAS_MHZ = (0.5, 1.0, 2.0, 3.0, 5.0, 7.0, 9.0, 11.0)


def main() -> None:
    geom = Geometry.from_theta_eff(3e-3, PARAMS.wavelength)
    lay = fq.FloquetLayout(q_cut=Q, pump_offsets=(1,))
    dop = pg.DopplerSpec(SIGMA, n_nodes=NODES)

    print("Intensity-difference noise vs analysis frequency")
    print(f"theta_eff = 3 mrad, delta/2pi = 5.5 MHz, eta = {ETA}\n")
    print(f"  {'omega/2pi':>10} {'diff (dB)':>10} {'sum (dB)':>10}")

    db_minus = []
    for om in OMEGAS_MHZ:
        cm, gains = sp.noise_covariance(
            PARAMS, geom, lay, from_mhz(om), dop,
            alpha=1.0, eta=ETA, modes=MODES, n_phi=N_PHI)
        spec = en.intensity_spectra(cm, gains, modes=MODES)
        db_minus.append(spec.db("minus"))
        print(f"  {om:>10.1f} {spec.db('minus'):>10.2f} "
              f"{spec.db('plus'):>10.2f}")

    db_minus = np.asarray(db_minus)
    idx = np.flatnonzero((db_minus[:-1] < 0.0) & (db_minus[1:] >= 0.0))
    if idx.size:
        i = idx[0]
        x0, x1 = OMEGAS_MHZ[i], OMEGAS_MHZ[i + 1]
        y0, y1 = db_minus[i], db_minus[i + 1]
        cross = x0 - y0 * (x1 - x0) / (y1 - y0)
        print(f"\nSQL crossing near omega/2pi = {cross:.1f} MHz:")
        print("inside the gain bandwidth the pair correlations beat the")
        print("SQL; beyond it the medium amplifies uncorrelated vacuum.")
    else:
        print("\nno SQL crossing inside the scanned band")


if __name__ == "__main__":
    main()
