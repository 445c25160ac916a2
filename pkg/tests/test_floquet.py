"""Tests for the Floquet block assembly and banded shifted solves."""

import numpy as np
import pytest

from multipump_fwm import floquet as fq
from multipump_fwm import liouville as lv
from multipump_fwm.params import from_mhz

from conftest import operating_params, two_pump_params


def make_gen(params, q_cut, offsets=()):
    layout = fq.FloquetLayout(q_cut=q_cut, pump_offsets=offsets)
    blocks = fq.build_drift_blocks(params, pump_offsets=offsets)
    return fq.assemble(blocks, layout)


# ---------------------------------------------------------------- layout

def test_layout_validation():
    with pytest.raises(ValueError):
        fq.FloquetLayout(q_cut=-1)
    with pytest.raises(ValueError):
        fq.FloquetLayout(q_cut=2, pump_offsets=(3,))
    lay = fq.FloquetLayout(q_cut=3, pump_offsets=(1,))
    assert lay.n_modes == 7
    assert lay.atomic_dim == 7 * 16
    assert lay.pos(-3) == 0 and lay.pos(3) == 6
    with pytest.raises(ValueError):
        lay.pos(4)


# ---------------------------------------------------------------- assembly

def test_assemble_q0_single_pump(params):
    gen = make_gen(params, 0)
    np.testing.assert_array_equal(gen.dense_m(), lv.build_drift(params))


def test_assemble_tridiagonal_structure(params2p):
    gen = make_gen(params2p, 2, offsets=(1,))
    m = gen.dense_m()
    m0 = lv.build_drift(params2p)
    mp = lv.build_pump_coupling(params2p, 1, +1)
    for bn in range(-2, 3):
        for bm in range(-2, 3):
            r, c = (bn + 2) * 16, (bm + 2) * 16
            blk = m[r:r + 16, c:c + 16]
            if bn == bm:
                np.testing.assert_array_equal(blk, m0)
            elif bn - bm == 1:
                np.testing.assert_array_equal(blk, mp)
            elif abs(bn - bm) > 1:
                assert np.all(blk == 0)


def test_assemble_offset3_leaves_band2_empty():
    p = operating_params(omega0_rabi=0.0,
                         omega_pm_rabi=((from_mhz(220.0), from_mhz(220.0)),))
    gen = make_gen(p, 4, offsets=(3,))
    m = gen.dense_m()
    for bn in range(-4, 5):
        for bm in range(-4, 5):
            d = bn - bm
            blk = m[(bn + 4) * 16:(bn + 5) * 16, (bm + 4) * 16:(bm + 5) * 16]
            if abs(d) in (1, 2) or abs(d) > 3:
                assert np.all(blk == 0), (bn, bm)
            elif abs(d) == 3:
                assert np.max(np.abs(blk)) > 0


def test_assemble_rejects_unhosted_pump_block(params2p):
    layout = fq.FloquetLayout(q_cut=2, pump_offsets=())
    blocks = fq.build_drift_blocks(params2p, pump_offsets=(1,))
    with pytest.raises(ValueError):
        fq.assemble(blocks, layout)


# ---------------------------------------------------------------- solves

def test_shifted_solve_matches_dense(params2p):
    gen = make_gen(params2p, 1, offsets=(1,))
    rng = np.random.default_rng(7)
    rhs = rng.normal(size=gen.layout.atomic_dim) \
        + 1j * rng.normal(size=gen.layout.atomic_dim)
    omega = from_mhz(2.0)
    x_band = fq.shifted_solve(gen, omega, rhs)
    a = gen.dense_m()
    a[np.diag_indices_from(a)] += 1j * omega
    x_dense = np.linalg.solve(a, rhs)
    np.testing.assert_allclose(x_band, x_dense,
                               atol=1e-12 * np.linalg.norm(x_dense))


def test_shifted_solve_transpose(params2p):
    gen = make_gen(params2p, 2, offsets=(1,))
    rng = np.random.default_rng(11)
    rhs = rng.normal(size=(gen.layout.atomic_dim, 3)) * (1 + 0.5j)
    omega = from_mhz(1.0)
    x = fq.shifted_solve(gen, omega, rhs, trans=True)
    a = gen.dense_m()
    a[np.diag_indices_from(a)] += 1j * omega
    np.testing.assert_allclose(a.T @ x, rhs, atol=1e-9 * np.linalg.norm(rhs))


def test_shifted_solve_large_omega_limit(params2p):
    gen = make_gen(params2p, 1, offsets=(1,))
    omega = 1e6 * np.linalg.norm(gen.dense_m())
    rhs = np.ones(gen.layout.atomic_dim, dtype=complex)
    x = fq.shifted_solve(gen, omega, rhs)
    np.testing.assert_allclose(x, rhs / (1j * omega), rtol=1e-4)


def test_band_exactness_decoupled_modes(params):
    # no pump sidebands: solution blocks decouple across modes
    gen = make_gen(params, 2)
    rhs = np.zeros(gen.layout.atomic_dim, dtype=complex)
    rhs[gen.layout.pos(0) * 16:(gen.layout.pos(0) + 1) * 16] = 1.0
    x = fq.shifted_solve(gen, from_mhz(3.0), rhs)
    for n in (-2, -1, 1, 2):
        blk = x[gen.layout.pos(n) * 16:(gen.layout.pos(n) + 1) * 16]
        assert np.max(np.abs(blk)) <= 1e-14 * max(np.max(np.abs(x)), 1.0)


def test_conjugation_reflection_symmetry(params2p):
    # symmetric pumps: reflecting the rhs across n -> -n reflects the solution
    gen = make_gen(params2p, 2, offsets=(1,))
    lay = gen.layout
    rng = np.random.default_rng(3)
    blk = rng.normal(size=16) + 1j * rng.normal(size=16)
    rhs = np.zeros(lay.atomic_dim, dtype=complex)
    rhs[lay.pos(1) * 16:(lay.pos(1) + 1) * 16] = blk
    rhs_r = np.zeros_like(rhs)
    rhs_r[lay.pos(-1) * 16:(lay.pos(-1) + 1) * 16] = blk
    omega = from_mhz(2.0)
    x = fq.shifted_solve(gen, omega, rhs)
    x_r = fq.shifted_solve(gen, omega, rhs_r)
    for n in range(-2, 3):
        a_blk = x[lay.pos(n) * 16:(lay.pos(n) + 1) * 16]
        b_blk = x_r[lay.pos(-n) * 16:(lay.pos(-n) + 1) * 16]
        np.testing.assert_allclose(a_blk, b_blk,
                                   atol=1e-10 * np.max(np.abs(x)))


def test_singular_shift_reports_pivot():
    layout = fq.FloquetLayout(q_cut=0)
    gen = fq.BlockGenerator(layout=layout,
                            m_blocks={0: np.zeros((16, 16), dtype=complex)},
                            gx_blocks={0: np.zeros((16, 4), dtype=complex)},
                            t_map=np.zeros((4, 16), dtype=complex))
    with pytest.raises(fq.SingularShiftError):
        fq.ShiftedSolver(gen, 0.0)


# ---------------------------------------------------------------- dressed state

def test_dressed_state_reduces_to_single_pump(params):
    ss = fq.dressed_steady_state(params)
    np.testing.assert_allclose(ss[0], lv.pump_only_steady_state(params),
                               atol=1e-12)


def test_dressed_state_harmonics(params2p):
    ss = fq.dressed_steady_state(params2p, pump_offsets=(1,))
    # atoms respond nonlinearly: harmonics up to 4x the pump offset are kept
    assert set(ss) == set(range(-4, 5))
    x0 = ss[0].reshape(4, 4)
    # harmonic 0 is Hermitian with unit trace
    np.testing.assert_allclose(x0, x0.conj().T, atol=1e-10)
    assert abs(np.trace(x0) - 1.0) < 1e-10
    # X^(-m) is the adjoint harmonic of X^(+m)
    np.testing.assert_allclose(ss[-1].reshape(4, 4),
                               ss[1].reshape(4, 4).conj().T, atol=1e-10)
    assert np.max(np.abs(ss[1])) > 1e-6  # pumps genuinely dress the state


def test_dressed_state_grid_converged(params2p):
    a = fq.dressed_steady_state(params2p, pump_offsets=(1,), pad=8)
    b = fq.dressed_steady_state(params2p, pump_offsets=(1,), pad=16)
    for m in (0, 1, -1):
        np.testing.assert_allclose(a[m], b[m], atol=1e-12)


def test_build_drift_blocks_contents(params2p):
    blocks = fq.build_drift_blocks(params2p, pump_offsets=(1,))
    assert set(blocks.pump) == {-1, 1}
    assert {0, 1, -1} <= set(blocks.gx) <= set(range(-4, 5))
    # harmonic strength decays with order
    assert np.max(np.abs(blocks.gx[0])) > np.max(np.abs(blocks.gx[1])) \
        > np.max(np.abs(blocks.gx[4]))
    assert blocks.t_map.shape == (4, 16)
    assert blocks.diffusion.shape == (16, 16)
    only0 = fq.build_drift_blocks(params2p, pump_offsets=(1,),
                                  gx_harmonic0_only=True)
    assert set(only0.gx) == {0}
