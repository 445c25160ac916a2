"""How the pump angle shapes the emitted mode ladder.

Two pumps tilted by theta create a spatially periodic dressing of the
vapor, so a seeded probe scatters into a ladder of transverse modes
n = 0, +-2, +-4, ... (odd orders stay dark by the pair-emission parity).
The walk-off phase ~ (n^2 - 1) delta_kz z acts like a confining
potential: small angles let the ladder spread, large angles pin the
light to the seeded order.

Run:  python3 demos/gain_ladder.py
(~1 min; uses a reduced truncation/velocity grid, which changes the
numbers at the few-percent level but not the structure.)
"""

import numpy as np

from multipump_fwm import floquet as fq
from multipump_fwm import propagate as pg
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

# reduced numerics so the demo runs in ~a minute
Q, N_PHI, NODES = 8, 256, 8
DOPPLER = pg.DopplerSpec(SIGMA, n_nodes=NODES)


def ladder(theta_mrad: float, delta_mhz: float) -> pg.GainTable:
    p = PARAMS.with_(delta2=from_mhz(delta_mhz))
    geom = Geometry.from_theta_eff(theta_mrad * 1e-3, p.wavelength)
    lay = fq.FloquetLayout(q_cut=Q, pump_offsets=(1,))
    r = pg.build_R(p, geom, lay, DOPPLER, n_phi=N_PHI)
    return pg.mode_gains(r, lay, 1.0, z=p.cell_length)


def show(theta_mrad: float, delta_mhz: float) -> None:
    t = ladder(theta_mrad, delta_mhz)
    print(f"\ntheta_eff = {theta_mrad} mrad, delta/2pi = {delta_mhz} MHz")
    print(f"  {'mode':>5} {'probe gain':>12} {'conj gain':>12}")
    for i, n in enumerate(t.mode_indices):
        if n % 2:
            continue                       # odd orders are dark
        mark = " <-- seeded" if n == 0 else ""
        print(f"  {int(n):>+5d} {t.gain_a[i]:>12.4f} "
              f"{t.gain_b[i]:>12.4f}{mark}")
    pop_a = pg.populated_modes(t, "a")
    pop_b = pg.populated_modes(t, "b")
    print(f"  above 5% of peak: probe {pop_a}, conjugate {pop_b}")


def main() -> None:
    print("Gain ladder vs pump angle (fixed two-photon detuning)")
    for theta in (3.0, 4.5, 6.0):
        show(theta, 5.5)
    print("\nTakeaway: tripling the angle strengthens the n^2 walk-off")
    print("penalty, collapsing the ladder onto the seeded order.")


if __name__ == "__main__":
    main()
