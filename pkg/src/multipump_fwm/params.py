"""Physical parameters and beam geometry for the double-lambda mixing model.

All frequencies and rates are stored as angular frequencies in rad/s.
Configuration files and figure captions quote values as nu = omega/2pi in
MHz; use :func:`from_mhz` / :func:`to_mhz` at the boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

TWO_PI = 2.0 * math.pi

# Speed of light (m/s); the propagation equations carry explicit 1/c factors.
C_LIGHT = 299792458.0


def from_mhz(nu_mhz: float) -> float:
    """Convert a frequency given as nu = omega/2pi in MHz to rad/s."""
    return TWO_PI * 1e6 * nu_mhz


def to_mhz(omega: float) -> float:
    """Convert an angular frequency in rad/s to nu = omega/2pi in MHz."""
    return omega / (TWO_PI * 1e6)


def doppler_sigma_for_fwhm(fwhm_mhz: float, wavelength: float) -> float:
    """1/e velocity width (m/s) giving a one-photon Doppler FWHM in MHz.

    The Doppler shift of an atom at velocity v is k0*v, so a Maxwell profile
    f(v) ~ exp(-v^2/sigma^2) produces a Gaussian frequency profile with
    FWHM = 2*sqrt(ln 2)*k0*sigma.
    """
    k0 = TWO_PI / wavelength
    return from_mhz(fwhm_mhz) / (2.0 * math.sqrt(math.log(2.0)) * k0)


@dataclass(frozen=True)
class PhysicalParams:
    """Atom-light interaction constants of the double-lambda system.

    omega_pm_rabi holds one (Omega_+k, Omega_-k) pair per concentric pump
    pair; the band offset of each pair lives in the Floquet layout.  The
    single central pump (Omega_0) is set to zero in multi-pump
    configurations.
    """

    omega0_rabi: float                      # central pump Rabi frequency
    delta1: float                           # one-photon detuning
    delta2: float                           # two-photon detuning
    gamma_sp: float                         # excited-state decay Gamma
    gamma_d: float                          # ground-state decoherence
    omega_hf: float                         # hyperfine splitting
    g_a: float                              # probe coupling constant
    g_b: float                              # conjugate coupling constant
    n_atoms: float                          # effective atom number N
    cell_length: float                      # cell length L (m)
    wavelength: float                       # optical wavelength (m)
    doppler_sigma: float = 0.0              # 1/e Maxwell width (m/s); 0 = cold
    omega_pm_rabi: tuple[tuple[float, float], ...] = field(default_factory=tuple)

    def __post_init__(self):
        finite = [
            self.omega0_rabi, self.delta1, self.delta2, self.gamma_sp,
            self.gamma_d, self.omega_hf, self.g_a, self.g_b, self.n_atoms,
            self.cell_length, self.wavelength, self.doppler_sigma,
        ]
        for pair in self.omega_pm_rabi:
            finite.extend(pair)
        if not all(math.isfinite(x) for x in finite):
            raise ValueError("all physical parameters must be finite")
        if self.gamma_sp <= 0:
            raise ValueError("gamma_sp must be positive")
        if self.cell_length <= 0:
            raise ValueError("cell_length must be positive")
        if self.doppler_sigma < 0:
            raise ValueError("doppler_sigma must be >= 0")
        object.__setattr__(
            self, "omega_pm_rabi",
            tuple(tuple(p) for p in self.omega_pm_rabi),
        )

    @property
    def k0(self) -> float:
        return TWO_PI / self.wavelength

    @property
    def n_pump_pairs(self) -> int:
        return len(self.omega_pm_rabi)

    def with_(self, **changes) -> "PhysicalParams":
        return replace(self, **changes)


@dataclass(frozen=True)
class Geometry:
    """Pump/seed beam geometry.

    theta_pump is the full angle between the two pumps; theta_seed the
    angle between seed and pump bisector.  The effective angle combines
    both, and delta_kz is the longitudinal wavevector offset that
    discretizes the mode ladder.
    """

    theta_pump: float       # rad
    theta_seed: float       # rad
    wavelength: float       # m

    def __post_init__(self):
        if self.theta_pump < 0 or self.theta_seed < 0:
            raise ValueError("angles must be >= 0")
        if max(self.theta_pump, self.theta_seed) > 0.2:
            raise ValueError("paraxial geometry expects angles << 1 rad")

    @property
    def theta_eff(self) -> float:
        return math.sqrt((self.theta_pump / 2.0) ** 2 + self.theta_seed**2)

    @property
    def k0(self) -> float:
        return TWO_PI / self.wavelength

    @property
    def delta_kz(self) -> float:
        return (1.0 - math.cos(self.theta_eff / 2.0)) * self.k0

    @classmethod
    def from_theta_eff(cls, theta_eff: float, wavelength: float) -> "Geometry":
        """Geometry with the seed on the pump bisector and a given theta_eff."""
        return cls(theta_pump=2.0 * theta_eff, theta_seed=0.0,
                   wavelength=wavelength)


def effective_angle(theta_pump: float, theta_seed: float) -> float:
    """sqrt((theta/2)^2 + theta_a^2), the angle entering delta_kz."""
    if theta_pump < 0 or theta_seed < 0:
        raise ValueError("angles must be >= 0")
    return math.sqrt((theta_pump / 2.0) ** 2 + theta_seed**2)
