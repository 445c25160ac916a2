"""Six modes, thirty-one cuts: multipartite entanglement by PPT.

The six bright modes (probe and conjugate at ladder orders 0, +-2) form
one Gaussian state.  For each of the 31 ways to split six modes into two
camps, the partial transpose test gives a minimum symplectic eigenvalue:
below 1 means the two camps are entangled across that cut; if *every*
cut is below 1 the state is genuinely hexapartite inseparable.

Run:  python3 demos/hexapartite.py   (~1 min, reduced numerics)
"""

from collections import defaultdict

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


def main() -> None:
    geom = Geometry.from_theta_eff(6e-3, PARAMS.wavelength)
    lay = fq.FloquetLayout(q_cut=Q, pump_offsets=(1,))
    dop = pg.DopplerSpec(SIGMA, n_nodes=NODES)
    cm, _ = sp.noise_covariance(
        PARAMS, geom, lay, from_mhz(2.0), dop,
        alpha=1.0, eta=0.95, modes=(-2, 0, 2), n_phi=N_PHI)

    print("PPT test over all 31 bipartitions")
    print("theta_eff = 6 mrad, delta/2pi = 5.5 MHz, "
          "omega/2pi = 2 MHz, eta = 0.95")
    print("mode labels 1..6 = a(-2), a(0), a(+2), b(-2), b(0), b(+2)\n")

    by_class = defaultdict(list)
    for bp in en.enumerate_bipartitions(6):
        by_class[bp.split_class].append(
            (str(bp), en.ppt_min_eigenvalue(cm, bp)))

    worst = (None, -1.0)
    for cls in ("1x5", "2x4", "3x3"):
        print(f"  {cls} splits:")
        for name, ev in sorted(by_class[cls], key=lambda kv: kv[1]):
            verdict = "entangled" if ev < 1.0 else "separable by PPT"
            print(f"    {name:>9}  min sympl. eig = {ev:6.3f}  ({verdict})")
            if ev > worst[1]:
                worst = (name, ev)
        print()

    name, ev = worst
    if ev < 1.0:
        print(f"every cut is entangled (weakest: {name} at {ev:.3f})")
        print("=> the six bright modes are genuinely hexapartite "
              "inseparable at this operating point")
    else:
        print(f"cut {name} is PPT-separable ({ev:.3f}); "
              "the state is not fully inseparable here")


if __name__ == "__main__":
    main()
