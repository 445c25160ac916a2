"""Multimode four-wave mixing in a double-lambda vapor.

Layers, bottom to top:

- params:    physical constants, unit helpers, beam geometry
- liouville: single-atom 16-dim Liouville-space matrices
- floquet:   spatial-harmonic block system and banded solves
- propagate: mean-field gain engine (propagator, gain tables, scans)
- spectra:   frequency-domain noise and quadrature covariance matrices
- entangle:  noise differences, PPT symplectic spectra over bipartitions
- cli:       sweep commands and CSV/JSON emission (`mpfwm` entry point)
"""

from .params import (
    C_LIGHT,
    Geometry,
    PhysicalParams,
    TWO_PI,
    doppler_sigma_for_fwhm,
    effective_angle,
    from_mhz,
    to_mhz,
)

__all__ = [
    "C_LIGHT",
    "Geometry",
    "PhysicalParams",
    "TWO_PI",
    "doppler_sigma_for_fwhm",
    "effective_angle",
    "from_mhz",
    "to_mhz",
]

__version__ = "0.1.0"
