"""Frequency-domain quantum noise of the propagating field ladder.

Extends the mean-field engine to sideband frequency omega: the fluctuation
vector delta A(omega) obeys

    d/dz delta A(omega) = R(omega) delta A(omega) + R_F(omega) F(omega),

with R(omega) the sideband response (same assembly as the mean-field R plus
the i omega/c free term) and R_F(omega) the force-injection map.  The
Langevin forces are delta-correlated along z with the per-atom diffusion
matrix of the generalized Einstein relation; harmonic bookkeeping places the
force correlator on the (n, -n) anti-diagonal blocks because the slot
convention stores (a^(n))+ in block -n.

The accumulated stochastic spectrum is an ordinary controllability-Gramian
integral, evaluated exactly through a block-augmented matrix exponential
(Van Loan).  Its normalization is 2c/N: the forces of each atom are
independent, so the N^2 of the coherent response collapses to N in the
noise (the 2 is the Einstein-relation correlator convention, the c the
line density of the force per unit propagation length).  The commutator
identity

    R(omega) K0 + K0 R(-omega)^T + kappa [C(omega) - C(-omega)^T] = 0

(with K0 the input commutator matrix and C the injected correlator) pins
this constant; `commutator_residual` exposes the check.

Quadratures are built in the rotated frame of the propagated carriers,
P = e^{-i phi} a + e^{i phi} a+, normalized so every vacuum quadrature has
variance 1 (two-mode shot noise = 2).  The symmetrized covariance matrix is
V_S = (V(omega) + V(-omega)) / 2 and must come out real; a residual
imaginary part flags a conjugation-symmetry bug upstream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from . import floquet as fq
from . import liouville as lv
from . import propagate as pg
from .params import C_LIGHT, Geometry, PhysicalParams

__all__ = [
    "NoiseGenerators", "CovarianceMatrix", "SpectrumError",
    "build_noise_generators", "diffusion_block", "commutator_matrix",
    "input_noise_spectrum", "noise_integral", "output_spectrum",
    "quadrature_frame", "covariance", "apply_losses",
    "commutator_residual", "noise_covariance",
]


class SpectrumError(RuntimeError):
    pass


@dataclass
class NoiseGenerators:
    """Sideband generators at +/- omega sharing one atomic response."""

    omega: float
    layout: fq.FloquetLayout
    r: np.ndarray          # R(+omega), field x field
    r_minus: np.ndarray    # R(-omega)
    rf: np.ndarray         # R_F(+omega), field x atomic
    rf_minus: np.ndarray   # R_F(-omega)
    diffusion0: np.ndarray  # per-atom 16x16 Doppler-averaged diffusion
    kappa: float           # stochastic normalization (1/N)


@dataclass
class CovarianceMatrix:
    """Symmetrized quadrature covariance over a selected mode set.

    Rows/cols ordered (P_a^(n), Q_a^(n), P_b^(n), Q_b^(n)) per selected n.
    Vacuum-normalized: every quadrature variance is 1 in vacuum.
    """

    modes: tuple[int, ...]
    v: np.ndarray
    omega: float = 0.0
    eta: float = 1.0

    def block_index(self, channel: str, n: int, quadrature: str) -> int:
        i = self.modes.index(n) * 4
        i += 0 if channel == "a" else 2
        return i + (0 if quadrature == "P" else 1)


def build_noise_generators(params: PhysicalParams, geom: Geometry,
                           layout: fq.FloquetLayout, omega: float,
                           doppler: pg.DopplerSpec | None = None, *,
                           n_phi: int | None = None,
                           walkoff_c: float = pg.WALKOFF_QUADRATIC,
                           solver: fq.PhaseSpaceSolver | None = None
                           ) -> NoiseGenerators:
    """R(+/-omega), R_F(+/-omega) and D with one shared eigendecomposition."""
    doppler = doppler or pg.DopplerSpec(sigma=params.doppler_sigma)
    if solver is None:
        vels, weights = doppler.nodes()
        if n_phi is None:
            n_phi = pg.DEFAULT_N_PHI if layout.pump_offsets else 1
        solver = fq.PhaseSpaceSolver(params, vels, weights,
                                     pump_offsets=layout.pump_offsets,
                                     pump_proj=math.cos(geom.theta_pump / 2),
                                     n_phi=n_phi, include_forces=True)
    r_p, rf_p, d0 = pg.averaged_response(
        params, geom, layout, omega, doppler, need_rf=True,
        need_diffusion=True, walkoff_c=walkoff_c, solver=solver)
    r_m, rf_m = pg.averaged_response(
        params, geom, layout, -omega, doppler, need_rf=True,
        walkoff_c=walkoff_c, solver=solver)
    return NoiseGenerators(omega=omega, layout=layout, r=r_p, r_minus=r_m,
                           rf=rf_p, rf_minus=rf_m, diffusion0=d0,
                           kappa=2.0 * C_LIGHT / params.n_atoms)


def diffusion_block(layout: fq.FloquetLayout, d0: np.ndarray) -> np.ndarray:
    """Multi-mode force correlator: anti-diagonal blocks [n, -n] = D0.

    The forces are local in z, so harmonics n and n' only correlate when
    the spatial phases cancel (n' = -n); each such block carries the same
    per-atom diffusion matrix.
    """
    dim = layout.atomic_dim
    d = np.zeros((dim, dim), dtype=complex)
    for n in layout.mode_indices:
        r = layout.pos(int(n)) * lv.LDIM
        c = layout.pos(-int(n)) * lv.LDIM
        d[r:r + lv.LDIM, c:c + lv.LDIM] = d0
    return d


def commutator_matrix(layout: fq.FloquetLayout) -> np.ndarray:
    """Input commutator [A_i, A_j] in field space.

    [a^(n), (a^(n))+] = 1 with the dagger stored in block -n, so the +1/-1
    entries sit on the (n, -n) anti-diagonal blocks.
    """
    k0 = np.zeros((layout.field_dim, layout.field_dim), dtype=complex)
    for n in layout.mode_indices:
        r = layout.pos(int(n)) * 4
        c = layout.pos(-int(n)) * 4
        k0[r + lv.SLOT_A, c + lv.SLOT_ADAG] = 1.0
        k0[r + lv.SLOT_ADAG, c + lv.SLOT_A] = -1.0
        k0[r + lv.SLOT_B, c + lv.SLOT_BDAG] = 1.0
        k0[r + lv.SLOT_BDAG, c + lv.SLOT_B] = -1.0
    return k0


def input_noise_spectrum(layout: fq.FloquetLayout) -> np.ndarray:
    """Symmetrized vacuum spectrum S(0, omega) of the fluctuations.

    Coherent seeding displaces the mean only; every mode enters with
    vacuum fluctuations, <{a, a+}>/2 = 1/2 on both (n, -n) pairings.
    """
    s0 = np.zeros((layout.field_dim, layout.field_dim), dtype=complex)
    for n in layout.mode_indices:
        r = layout.pos(int(n)) * 4
        c = layout.pos(-int(n)) * 4
        for lo, hi in ((lv.SLOT_A, lv.SLOT_ADAG), (lv.SLOT_B, lv.SLOT_BDAG)):
            s0[r + lo, c + hi] = 0.5
            s0[r + hi, c + lo] = 0.5
    return s0


def _injected_correlator(gen: NoiseGenerators, *,
                         symmetrized: bool = False) -> np.ndarray:
    """kappa * R_F(w) <F F^T> R_F(-w)^T with <F F^T> = 2 D^T per block.

    The Einstein-relation matrix is indexed D[(ij),(kl)] = <L-defect of
    sigma_ij sigma_kl>, which pairs with the force vector in (second,
    first) order, hence the transpose; the factor 2 (correlator = 2D) and
    the c/N of the per-atom force density are folded into kappa.

    The ordered correlator carries the force commutators and feeds the
    commutator-preservation identity; the symmetrized variant
    <{F, F^T}>/2 = D + D^T is the one entering symmetrized spectra (it is
    conjugation-covariant, keeping V_S real).
    """
    d0 = gen.diffusion0
    block = 0.5 * (d0 + d0.T) if symmetrized else d0.T
    dm = diffusion_block(gen.layout, block)
    return gen.kappa * (gen.rf @ dm @ gen.rf_minus.T)


def noise_integral(gen: NoiseGenerators, z: float) -> np.ndarray:
    """Accumulated force spectrum S_F(z, omega).

        S_F = kappa * int_0^z e^{-R(w) z'} R_F(w) D R_F(-w)^T e^{-R(-w)^T z'} dz'

    evaluated exactly (to expm tolerance) with a Van Loan block exponential:
    the upper off-diagonal block of expm([[-R, C], [0, R(-w)^T]] z) is the
    convolution integral, and a final e^{-R(-w)^T z} shifts it to the
    common-origin form above.
    """
    if z < 0:
        raise ValueError("z must be >= 0")
    if z == 0:
        return np.zeros_like(gen.r)
    c = _injected_correlator(gen, symmetrized=True)
    dim = gen.r.shape[0]
    big = np.zeros((2 * dim, 2 * dim), dtype=complex)
    big[:dim, :dim] = -gen.r
    big[:dim, dim:] = c
    big[dim:, dim:] = gen.r_minus.T
    f = expm(big * z)
    s_f = f[:dim, dim:] @ expm(-gen.r_minus.T * z)
    if not np.all(np.isfinite(s_f)):
        raise SpectrumError("noise integral overflowed")
    return s_f


def output_spectrum(j_plus: np.ndarray, j_minus: np.ndarray,
                    s0: np.ndarray, s_f: np.ndarray) -> np.ndarray:
    """S(z, omega) = J(z, omega) [S(0, omega) + S_F(z, omega)] J(z, -omega)^T."""
    return j_plus @ (s0 + s_f) @ j_minus.T


def commutator_residual(gen: NoiseGenerators) -> float:
    """Relative defect of the commutator-preservation identity.

    Zero (to round-off) for a single velocity class; the Doppler average
    trades the per-class identity for the averaged response, leaving a
    small controlled residual.
    """
    k0 = commutator_matrix(gen.layout)
    c_plus = _injected_correlator(gen)
    c_minus = _injected_correlator(_swap_sidebands(gen))
    lhs = gen.r @ k0 + k0 @ gen.r_minus.T + c_plus - c_minus.T
    scale = max(np.max(np.abs(gen.r @ k0)), 1e-300)
    return float(np.max(np.abs(lhs)) / scale)


def quadrature_frame(gains: pg.GainTable,
                     layout: fq.FloquetLayout) -> np.ndarray:
    """Carrier-phase-rotated quadrature map U with U U+ = 2 I.

    Row (P_a^(n)) = e^{-i phi} a^(n) + e^{+i phi} (a^(n))+, the daggered
    column living in block -n.  Unseeded modes (carrier below threshold)
    keep phi = 0; their noise observables do not depend on it.
    """
    dim = layout.field_dim
    u = np.zeros((dim, dim), dtype=complex)
    for i, n in enumerate(layout.mode_indices):
        row = layout.pos(int(n)) * 4
        col_n = layout.pos(int(n)) * 4
        col_m = layout.pos(-int(n)) * 4
        for ch, (lo, hi) in (("a", (lv.SLOT_A, lv.SLOT_ADAG)),
                             ("b", (lv.SLOT_B, lv.SLOT_BDAG))):
            phi = (gains.phase_a if ch == "a" else gains.phase_b)[i]
            ep, em = np.exp(1j * phi), np.exp(-1j * phi)
            u[row + lo, col_n + lo] = em
            u[row + lo, col_m + hi] = ep
            u[row + hi, col_n + lo] = -1j * em
            u[row + hi, col_m + hi] = 1j * ep
    return u


def covariance(u: np.ndarray, s_plus: np.ndarray, s_minus: np.ndarray,
               layout: fq.FloquetLayout, omega: float = 0.0,
               modes: tuple[int, ...] | None = None,
               imag_tol: float = 1e-9) -> CovarianceMatrix:
    """V_S = [U S(z,omega) U^T + U S(z,-omega) U^T] / 2, restricted to modes."""
    v = 0.5 * (u @ (s_plus + s_minus) @ u.T)
    scale = max(np.max(np.abs(v)), 1.0)
    resid = np.max(np.abs(v.imag)) / scale
    if resid > imag_tol:
        raise SpectrumError(
            f"covariance imaginary residue {resid:.3e} exceeds {imag_tol:.1e};"
            " conjugation symmetry broken upstream")
    v = v.real
    if modes is None:
        modes = tuple(int(n) for n in layout.mode_indices)
    sel = []
    for n in modes:
        base = layout.pos(n) * 4
        sel.extend(range(base, base + 4))
    sel = np.asarray(sel)
    return CovarianceMatrix(modes=tuple(modes), v=v[np.ix_(sel, sel)],
                            omega=omega)


def apply_losses(cm: CovarianceMatrix, eta: float) -> CovarianceMatrix:
    """Uniform detection/propagation loss: V' = eta (V - I) + I."""
    if not 0.0 <= eta <= 1.0:
        raise ValueError("eta must lie in [0, 1]")
    eye = np.eye(cm.v.shape[0])
    return CovarianceMatrix(modes=cm.modes, v=eta * (cm.v - eye) + eye,
                            omega=cm.omega, eta=eta)


def noise_covariance(params: PhysicalParams, geom: Geometry,
                     layout: fq.FloquetLayout, omega: float,
                     doppler: pg.DopplerSpec | None = None, *,
                     z: float | None = None, alpha: complex = 1.0,
                     eta: float = 1.0,
                     modes: tuple[int, ...] | None = None,
                     n_phi: int | None = None,
                     solver: fq.PhaseSpaceSolver | None = None,
                     gains: pg.GainTable | None = None,
                     ) -> tuple[CovarianceMatrix, pg.GainTable]:
    """End-to-end symmetrized CM (and carrier gains) at cell position z.

    Builds the sideband generators, accumulates the stochastic spectrum,
    propagates the vacuum input, rotates into the carrier quadrature frame
    and applies losses.  Pass a prebuilt PhaseSpaceSolver (include_forces)
    and/or GainTable to amortize work across an omega scan.
    """
    doppler = doppler or pg.DopplerSpec(sigma=params.doppler_sigma)
    if z is None:
        z = params.cell_length
    if solver is None:
        vels, weights = doppler.nodes()
        if n_phi is None:
            n_phi = pg.DEFAULT_N_PHI if layout.pump_offsets else 1
        solver = fq.PhaseSpaceSolver(params, vels, weights,
                                     pump_offsets=layout.pump_offsets,
                                     pump_proj=math.cos(geom.theta_pump / 2),
                                     n_phi=n_phi, include_forces=True)
    gen = build_noise_generators(params, geom, layout, omega, doppler,
                                 solver=solver)
    if gains is None:
        r0 = pg.averaged_response(params, geom, layout, 0.0, doppler,
                                  solver=solver)
        gains = pg.mode_gains(r0, layout, alpha, z=z)
    j_plus = pg.mean_propagator(gen.r, z)
    j_minus = pg.mean_propagator(gen.r_minus, z)
    s_f = noise_integral(gen, z)
    s0 = input_noise_spectrum(layout)
    s_p = output_spectrum(j_plus, j_minus, s0, s_f)
    s_m = output_spectrum(j_minus, j_plus, s0, noise_integral(
        _swap_sidebands(gen), z))
    u = quadrature_frame(gains, layout)
    cm = covariance(u, s_p, s_m, layout, omega=omega, modes=modes)
    if eta != 1.0:
        cm = apply_losses(cm, eta)
    return cm, gains


def _swap_sidebands(gen: NoiseGenerators) -> NoiseGenerators:
    """The same generators viewed from the -omega sideband."""
    return NoiseGenerators(omega=-gen.omega, layout=gen.layout,
                           r=gen.r_minus, r_minus=gen.r,
                           rf=gen.rf_minus, rf_minus=gen.rf,
                           diffusion0=gen.diffusion0, kappa=gen.kappa)
