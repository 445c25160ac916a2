import math

import pytest

from multipump_fwm.params import PhysicalParams, doppler_sigma_for_fwhm, from_mhz


def operating_params(**overrides) -> PhysicalParams:
    """Standard single-pump operating point used across the test suite."""
    kwargs = dict(
        omega0_rabi=from_mhz(220.0),
        delta1=from_mhz(900.0),
        delta2=from_mhz(5.5),
        gamma_sp=from_mhz(5.7),
        gamma_d=from_mhz(1.0),
        omega_hf=from_mhz(3035.0),
        g_a=from_mhz(0.28),
        g_b=from_mhz(0.28),
        n_atoms=1e6,
        cell_length=0.0125,
        wavelength=795e-9,
        doppler_sigma=0.0,
    )
    kwargs.update(overrides)
    return PhysicalParams(**kwargs)


def two_pump_params(**overrides) -> PhysicalParams:
    """Two symmetric pumps at +/-1 band offsets, central pump off."""
    kwargs = dict(
        omega0_rabi=0.0,
        omega_pm_rabi=((from_mhz(220.0), from_mhz(220.0)),),
    )
    kwargs.update(overrides)
    return operating_params(**kwargs)


def hot_doppler_sigma() -> float:
    return doppler_sigma_for_fwhm(540.0, 795e-9)


@pytest.fixture
def params():
    return operating_params()


@pytest.fixture
def params2p():
    return two_pump_params()
