"""Tests for the single-atom Liouville-space constructions."""

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from multipump_fwm import liouville as lv
from multipump_fwm.params import from_mhz

from conftest import operating_params, two_pump_params


# ---------------------------------------------------------------- drift

def test_trace_preservation(params):
    m = lv.build_drift(params)
    col_sums = m[lv.POPULATION_IDX, :].sum(axis=0)
    assert np.max(np.abs(col_sums)) <= 1e-12 * max(np.max(np.abs(m)), 1.0)


def test_hermiticity_pairing(params):
    m = lv.build_drift(params, v_z=137.0)
    for i in range(1, 5):
        for j in range(1, 5):
            for k in range(1, 5):
                for l in range(1, 5):
                    lhs = m[lv.op_index(i, j), lv.op_index(k, l)]
                    rhs = m[lv.op_index(j, i), lv.op_index(l, k)]
                    assert lhs == pytest.approx(np.conj(rhs), abs=1e-12)


def test_no_drive_pure_relaxation():
    p = operating_params(omega0_rabi=0.0, g_a=0.0, g_b=0.0)
    m = lv.build_drift(p)
    # populations and coherences decouple
    coh_idx = [k for k in range(lv.LDIM) if k not in lv.POPULATION_IDX]
    assert np.all(m[np.ix_(lv.POPULATION_IDX, coh_idx)] == 0)
    assert np.all(m[np.ix_(coh_idx, lv.POPULATION_IDX)] == 0)
    # unpolarized ground mixture is in the kernel
    mix = np.zeros(lv.LDIM, dtype=complex)
    mix[lv.op_index(1, 1)] = 0.5
    mix[lv.op_index(2, 2)] = 0.5
    assert np.linalg.norm(m @ mix) <= 1e-12 * np.linalg.norm(m)


def test_operating_point_invertible_on_trace_subspace(params):
    m = lv.build_drift(params)
    a = m.copy()
    a[lv.op_index(1, 1), :] = 0.0
    a[lv.op_index(1, 1), lv.POPULATION_IDX] = 1.0
    assert np.linalg.cond(a) < 1e14


def test_doppler_shift_equivalence(params):
    v = 200.0
    m_v = lv.build_drift(params, v_z=v)
    k0 = params.k0
    shifted = params.with_(
        delta1=params.delta1 - k0 * v,
        # pump and probe projections are both 1 by default, so the
        # two-photon detuning is unshifted
    )
    m_ref = lv.build_drift(shifted)
    np.testing.assert_allclose(m_v, m_ref, atol=1e-9 * np.max(np.abs(m_ref)))


def test_doppler_two_photon_shift(params):
    # with distinct projections, delta2 shifts by the wavevector difference
    v = 200.0
    m_v = lv.build_drift(params, v_z=v, pump_proj=1.0, probe_proj=0.9)
    k0 = params.k0
    shifted = params.with_(
        delta1=params.delta1 - k0 * v,
        delta2=params.delta2 + k0 * (1.0 - 0.9) * v,
    )
    m_ref = lv.build_drift(shifted)
    np.testing.assert_allclose(m_v, m_ref, atol=1e-9 * np.max(np.abs(m_ref)))


# ---------------------------------------------------------------- pump blocks

def test_pump_coupling_zero(params):
    p = params.with_(omega_pm_rabi=((0.0, 0.0),))
    assert np.all(lv.build_pump_coupling(p, 1, +1) == 0)
    assert np.all(lv.build_pump_coupling(p, 1, -1) == 0)


def test_pump_coupling_matches_drift_difference(params):
    omega = params.omega0_rabi
    p = params.with_(omega_pm_rabi=((omega, omega),))
    m_pump = lv.build_pump_coupling(p, 1, +1)
    diff = lv.build_drift(params) - lv.build_drift(params, omega_rabi=0.0)
    np.testing.assert_allclose(m_pump, diff, atol=1e-10 * np.max(np.abs(diff)))


def test_pump_coupling_linearity(params):
    omega = from_mhz(100.0)
    p1 = params.with_(omega_pm_rabi=((omega, omega),))
    p2 = params.with_(omega_pm_rabi=((2 * omega, 2 * omega),))
    np.testing.assert_allclose(
        lv.build_pump_coupling(p2, 1, +1),
        2.0 * lv.build_pump_coupling(p1, 1, +1),
        rtol=0, atol=1e-12 * omega)


def test_pump_coupling_bad_pair_index(params):
    with pytest.raises(ValueError):
        lv.build_pump_coupling(params, 1, +1)  # no pairs configured
    p = params.with_(omega_pm_rabi=((1.0, 1.0),))
    with pytest.raises(ValueError):
        lv.build_pump_coupling(p, 2, +1)
    with pytest.raises(ValueError):
        lv.build_pump_coupling(p, 1, 0)


# ---------------------------------------------------------------- steady state

def test_steady_state_no_drive():
    p = operating_params(omega0_rabi=0.0)
    ss = lv.pump_only_steady_state(p)
    expected = np.zeros(lv.LDIM, dtype=complex)
    expected[lv.op_index(1, 1)] = 0.5
    expected[lv.op_index(2, 2)] = 0.5
    np.testing.assert_allclose(ss, expected, atol=1e-12)


def test_steady_state_trace_and_hermiticity(params):
    ss = lv.pump_only_steady_state(params)
    pops = ss[lv.POPULATION_IDX]
    assert abs(pops.sum() - 1.0) <= 1e-10
    ss_m = ss.reshape(4, 4)
    np.testing.assert_allclose(ss_m, ss_m.conj().T, atol=1e-10)
    # far-detuned regime: tiny excited populations
    assert abs(ss[lv.op_index(3, 3)]) < 0.05
    assert abs(ss[lv.op_index(4, 4)]) < 0.05


def test_steady_state_matches_time_stepping(params):
    m = lv.build_drift(params)
    x0 = np.zeros(lv.LDIM, dtype=complex)
    x0[lv.op_index(1, 1)] = 0.5
    x0[lv.op_index(2, 2)] = 0.5
    t_end = 40.0 / params.gamma_d  # several ground-relaxation times
    sol = solve_ivp(lambda t, x: m @ x, (0.0, t_end), x0,
                    rtol=1e-10, atol=1e-12, method="DOP853")
    ss = lv.pump_only_steady_state(params)
    np.testing.assert_allclose(sol.y[:, -1], ss, atol=1e-8)


# ---------------------------------------------------------------- G_x and T

def test_field_coupling_zero_when_uncoupled(params):
    p = params.with_(g_a=0.0, g_b=0.0)
    ss = lv.pump_only_steady_state(p)
    assert np.all(lv.build_field_coupling(p, ss) == 0)


def test_field_coupling_linear_in_g(params):
    ss = lv.pump_only_steady_state(params)
    gx = lv.build_field_coupling(params, ss)
    p2 = params.with_(g_a=2 * params.g_a, g_b=3 * params.g_b)
    gx2 = lv.build_field_coupling(p2, ss)
    np.testing.assert_allclose(gx2[:, :2], 2.0 * gx[:, :2], atol=1e-12 * params.g_a)
    np.testing.assert_allclose(gx2[:, 2:], 3.0 * gx[:, 2:], atol=1e-12 * params.g_b)


def test_field_coupling_ground_mixture_structure():
    # On the undriven ground mixture only the sigma_32 / sigma_41 legs can
    # move, so nonzero rows must involve an index pair touching those
    # coherences: sigma_ij couples if the commutator with sigma_32/sigma_41
    # (or adjoints) is nonzero on levels {1,2}.
    p = operating_params(omega0_rabi=0.0)
    ss = lv.pump_only_steady_state(p)
    gx = lv.build_field_coupling(p, ss)
    expected = _field_coupling_oracle(p, ss)
    np.testing.assert_allclose(gx, expected, atol=1e-14 * max(p.g_a, p.g_b))


def _field_coupling_oracle(params, ss):
    """Commutator-expansion oracle: i[H_int, sigma_ij] term by term.

    For H term g*sigma_pq multiplying field slot f:
    i[g sigma_pq, sigma_ij] = i g (sigma_pj delta_qi - sigma_iq delta_jp).
    """
    ss_m = np.asarray(ss).reshape(4, 4)
    out = np.zeros((16, 4), dtype=complex)
    terms = [(0, 3, 2, params.g_a), (1, 2, 3, params.g_a),
             (2, 4, 1, params.g_b), (3, 1, 4, params.g_b)]
    for slot, p_, q_, g in terms:
        for i in range(1, 5):
            for j in range(1, 5):
                acc = 0.0j
                if q_ == i:
                    acc += ss_m[p_ - 1, j - 1]
                if j == p_:
                    acc -= ss_m[i - 1, q_ - 1]
                out[lv.op_index(i, j), slot] = 1j * g * acc
    return out


def test_field_coupling_oracle_at_operating_point(params):
    ss = lv.pump_only_steady_state(params)
    np.testing.assert_allclose(
        lv.build_field_coupling(params, ss),
        _field_coupling_oracle(params, ss), atol=1e-14)


def test_emission_map_structure(params):
    t = lv.build_emission_map(params)
    assert t[lv.SLOT_A, lv.op_index(2, 3)] != 0
    assert t[lv.SLOT_B, lv.op_index(1, 4)] != 0
    # only those four entries are populated
    nz = np.argwhere(t != 0)
    assert len(nz) == 4
    # adjoint rows are conjugates under the index swap
    assert t[lv.SLOT_ADAG, lv.op_index(3, 2)] == np.conj(
        t[lv.SLOT_A, lv.op_index(2, 3)])
    assert t[lv.SLOT_BDAG, lv.op_index(4, 1)] == np.conj(
        t[lv.SLOT_B, lv.op_index(1, 4)])
    assert np.all(lv.build_emission_map(params.with_(g_a=0.0, g_b=0.0)) == 0)


# ---------------------------------------------------------------- diffusion

def _diffusion_oracle(m, ss):
    """Loop-level Einstein-relation evaluation, independent of einsum."""
    ss_m = np.asarray(ss).reshape(4, 4)
    mss = (m @ np.asarray(ss).reshape(16)).reshape(4, 4)
    m4 = m.reshape(4, 4, 4, 4)
    d = np.zeros((16, 16), dtype=complex)
    for i in range(4):
        for j in range(4):
            for k in range(4):
                for l in range(4):
                    val = 0.0j
                    if j == k:
                        val += mss[i, l]
                    for p in range(4):
                        val -= m4[i, j, p, k] * ss_m[p, l]
                    for q in range(4):
                        val -= m4[k, l, j, q] * ss_m[i, q]
                    d[4 * i + j, 4 * k + l] = 0.5 * val
    return d


def test_diffusion_matches_oracle(params):
    ss = lv.pump_only_steady_state(params)
    d = lv.build_diffusion(params, ss)
    np.testing.assert_allclose(d, _diffusion_oracle(lv.build_drift(params), ss),
                               atol=1e-12 * np.max(np.abs(d)))


def test_diffusion_hamiltonian_part_cancels(params):
    # The commutator part of the drift is a derivation, so D built from the
    # full drift equals D built from the relaxation part alone.
    ss = lv.pump_only_steady_state(params)
    d_full = lv.build_diffusion(params, ss)
    relax = lv.relaxation_superop(params)
    d_relax = _diffusion_oracle(relax, ss)
    np.testing.assert_allclose(d_full, d_relax,
                               atol=1e-9 * max(np.max(np.abs(d_full)), 1.0))


def test_diffusion_linear_in_rates(params):
    ss = lv.pump_only_steady_state(params)
    d1 = lv.build_diffusion(params, ss)
    p2 = params.with_(gamma_sp=2 * params.gamma_sp, gamma_d=2 * params.gamma_d)
    d2 = lv.build_diffusion(p2, ss)
    np.testing.assert_allclose(d2, 2.0 * d1, atol=1e-9 * np.max(np.abs(d2)))


def test_diffusion_ground_mixture():
    p = operating_params(omega0_rabi=0.0)
    ss = lv.pump_only_steady_state(p)
    d = lv.build_diffusion(p, ss)
    np.testing.assert_allclose(d, _diffusion_oracle(lv.build_drift(p), ss),
                               atol=1e-12 * max(np.max(np.abs(d)), 1.0))
    # optical-coherence autocorrelations are fed by the relaxation rates only
    assert np.max(np.abs(d)) > 0
