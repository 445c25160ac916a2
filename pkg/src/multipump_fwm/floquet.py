"""Spatial-harmonic (Floquet) block system of the multi-pump model.

The pump interference pattern at wavevector offset delta_kz dresses the
atoms periodically in z; operators are expanded in harmonics
exp(i n delta_kz z), n in [-Q, Q].  This module assembles the block
generator (atomic blocks M^(j) on band offsets j), the harmonic field
coupling, the emission map, and provides the frequency-shifted banded
solve (i omega I + M)^-1 rhs that everything downstream consumes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lapack
from scipy.special import wofz

from . import liouville as lv
from .params import PhysicalParams

__all__ = [
    "FloquetLayout", "DriftBlocks", "BlockGenerator", "ShiftedSolver",
    "SingularShiftError", "assemble", "shifted_solve",
    "dressed_steady_state", "build_drift_blocks",
    "HarmonicResponse", "PhaseSpaceSolver",
]


@dataclass(frozen=True)
class FloquetLayout:
    """Harmonic truncation Q and the band offsets carrying pump pairs."""

    q_cut: int
    pump_offsets: tuple[int, ...] = ()

    def __post_init__(self):
        if self.q_cut < 0:
            raise ValueError("q_cut must be >= 0")
        if any(k < 1 for k in self.pump_offsets):
            raise ValueError("pump offsets are positive integers")
        if self.pump_offsets and max(self.pump_offsets) > self.q_cut:
            raise ValueError(
                f"q_cut={self.q_cut} too small for pump offsets "
                f"{self.pump_offsets}")
        object.__setattr__(self, "pump_offsets", tuple(self.pump_offsets))

    @property
    def n_modes(self) -> int:
        return 2 * self.q_cut + 1

    @property
    def atomic_dim(self) -> int:
        return lv.LDIM * self.n_modes

    @property
    def field_dim(self) -> int:
        return 4 * self.n_modes

    def pos(self, n: int) -> int:
        """Block position of harmonic index n in [-Q, Q]."""
        if not -self.q_cut <= n <= self.q_cut:
            raise ValueError(f"harmonic {n} outside [-{self.q_cut}, {self.q_cut}]")
        return n + self.q_cut

    @property
    def mode_indices(self) -> np.ndarray:
        return np.arange(-self.q_cut, self.q_cut + 1)


@dataclass
class DriftBlocks:
    """Per-velocity-class atomic building blocks.

    pump and gx are keyed by signed band offset; gx holds one 16x4
    harmonic of the field coupling per retained offset (0 and the pump
    offsets), built on the matching harmonic of the dressed steady state.
    """

    m0: np.ndarray
    pump: dict[int, np.ndarray] = field(default_factory=dict)
    gx: dict[int, np.ndarray] = field(default_factory=dict)
    t_map: np.ndarray | None = None
    diffusion: np.ndarray | None = None


@dataclass
class BlockGenerator:
    """Assembled block-banded generator and its companion couplings."""

    layout: FloquetLayout
    m_blocks: dict[int, np.ndarray]   # offset -> 16x16
    gx_blocks: dict[int, np.ndarray]  # offset -> 16x4
    t_map: np.ndarray                 # 4x16, identical on every diagonal block
    diffusion: np.ndarray | None = None

    @property
    def bandwidth(self) -> int:
        """Scalar (element-level) half-bandwidth of the atomic matrix."""
        k_max = max((abs(k) for k in self.m_blocks if k != 0), default=0)
        return lv.LDIM * k_max + lv.LDIM - 1

    def dense_m(self) -> np.ndarray:
        lay = self.layout
        m = np.zeros((lay.atomic_dim, lay.atomic_dim), dtype=complex)
        for n in lay.mode_indices:
            for j, blk in self.m_blocks.items():
                mm = n - j
                if -lay.q_cut <= mm <= lay.q_cut:
                    r = lay.pos(n) * lv.LDIM
                    c = lay.pos(mm) * lv.LDIM
                    m[r:r + lv.LDIM, c:c + lv.LDIM] = blk
        return m

    def dense_gx(self) -> np.ndarray:
        lay = self.layout
        g = np.zeros((lay.atomic_dim, lay.field_dim), dtype=complex)
        for n in lay.mode_indices:
            for j, blk in self.gx_blocks.items():
                mm = n - j
                if -lay.q_cut <= mm <= lay.q_cut:
                    r = lay.pos(n) * lv.LDIM
                    c = lay.pos(mm) * 4
                    g[r:r + lv.LDIM, c:c + 4] = blk
        return g

    def dense_t(self) -> np.ndarray:
        lay = self.layout
        t = np.zeros((lay.field_dim, lay.atomic_dim), dtype=complex)
        for n in lay.mode_indices:
            r = lay.pos(n) * 4
            c = lay.pos(n) * lv.LDIM
            t[r:r + 4, c:c + lv.LDIM] = self.t_map
        return t

    def n_multipliers(self) -> np.ndarray:
        """Per-field-slot harmonic index, the diagonal of the offset matrix."""
        return np.repeat(self.layout.mode_indices, 4).astype(float)


def assemble(blocks: DriftBlocks, layout: FloquetLayout) -> BlockGenerator:
    """Stack per-atom blocks into the Floquet band structure."""
    m_blocks = {0: blocks.m0}
    for j, blk in blocks.pump.items():
        if abs(j) not in layout.pump_offsets:
            raise ValueError(f"pump block at offset {j} not in layout "
                             f"{layout.pump_offsets}")
        m_blocks[j] = blk
    gx_blocks = {}
    for j, blk in blocks.gx.items():
        if j != 0 and not layout.pump_offsets:
            raise ValueError(f"field-coupling harmonic {j} has no pump band")
        if abs(j) > 2 * layout.q_cut:
            continue  # harmonic cannot connect any mode pair in this layout
        gx_blocks[j] = blk
    if blocks.t_map is None:
        raise ValueError("drift blocks carry no emission map")
    return BlockGenerator(layout=layout, m_blocks=m_blocks,
                          gx_blocks=gx_blocks, t_map=blocks.t_map,
                          diffusion=blocks.diffusion)


class SingularShiftError(RuntimeError):
    def __init__(self, msg, smallest_pivot=0.0):
        super().__init__(msg)
        self.smallest_pivot = smallest_pivot


class ShiftedSolver:
    """Banded LU factorization of (i omega I + M), reusable across rhs.

    The factorization is computed once in LAPACK general-band storage and
    is read-only afterwards, so a solver instance can be shared across
    worker threads.  Small systems (or dense=True) fall back to a dense
    factorization used as the oracle path in tests.
    """

    def __init__(self, gen: BlockGenerator, omega: float, *, dense: bool = False,
                 trace_rows: bool = False):
        """trace_rows: replace the redundant sigma_11 equation of every
        harmonic with its trace row (= 0).  Required at omega = 0, where the
        trace functionals span the left kernel of M; the solution returned
        is the physical zero-trace fluctuation response.  The right-hand
        side must be trace-free per harmonic (commutator-generated)."""
        self.layout = gen.layout
        self.omega = omega
        n = gen.layout.atomic_dim
        self._n = n
        self._dense = dense
        self._trace_rows = trace_rows
        scale = max(np.max(np.abs(gen.m_blocks[0])), 1.0)
        self._row_scale = scale
        self._replaced = [gen.layout.pos(bn) * lv.LDIM + lv.op_index(1, 1)
                          for bn in gen.layout.mode_indices] if trace_rows else []
        if trace_rows and omega != 0.0:
            raise ValueError("trace-row projection is an omega=0 device")
        if self._dense:
            a = gen.dense_m()
            a[np.diag_indices_from(a)] += 1j * omega
            if trace_rows:
                for bn in gen.layout.mode_indices:
                    r0 = gen.layout.pos(bn) * lv.LDIM
                    row = r0 + lv.op_index(1, 1)
                    a[row, :] = 0.0
                    a[row, [r0 + p for p in lv.POPULATION_IDX]] = scale
            self._a = a
            self._lu = None
            piv_scale = np.abs(np.diag(a))
            self._smallest_pivot = float(piv_scale.min()) if n else 0.0
            cond = np.linalg.cond(a)
            if not np.isfinite(cond) or cond > 1e15:
                raise SingularShiftError(
                    f"shifted generator singular at omega={omega:.6e} "
                    f"(cond={cond:.3e})", self._smallest_pivot)
            import scipy.linalg as sla
            self._lu = sla.lu_factor(a)
        else:
            kl = ku = gen.bandwidth
            self._kl, self._ku = kl, ku
            ab = np.zeros((2 * kl + ku + 1, n), dtype=complex, order="F")
            lay = gen.layout
            for bn in lay.mode_indices:
                for j, blk in gen.m_blocks.items():
                    bm = bn - j
                    if not -lay.q_cut <= bm <= lay.q_cut:
                        continue
                    r0 = lay.pos(bn) * lv.LDIM
                    c0 = lay.pos(bm) * lv.LDIM
                    for ii in range(lv.LDIM):
                        i_g = r0 + ii
                        if trace_rows and ii == lv.op_index(1, 1):
                            continue
                        row = blk[ii].copy()
                        if j == 0:
                            row[ii] += 1j * omega
                        cols = np.arange(c0, c0 + lv.LDIM)
                        ab[kl + ku + i_g - cols, cols] = row
            if trace_rows:
                for bn in lay.mode_indices:
                    r0 = lay.pos(bn) * lv.LDIM
                    i_g = r0 + lv.op_index(1, 1)
                    cols = np.array([r0 + p for p in lv.POPULATION_IDX])
                    ab[kl + ku + i_g - cols, cols] = scale
            lu, ipiv, info = lapack.zgbtrf(ab, kl, ku)
            if info != 0:
                raise SingularShiftError(
                    f"banded LU failed at omega={omega:.6e} (info={info})")
            self._lu, self._ipiv = lu, ipiv
            u_diag = np.abs(lu[kl + ku, :])
            self._smallest_pivot = float(u_diag.min()) if n else 0.0
            if self._smallest_pivot < 1e-14 * max(u_diag.max(), 1.0):
                raise SingularShiftError(
                    f"shifted generator nearly singular at omega={omega:.6e}",
                    self._smallest_pivot)
            # keep a matvec for residual checks without densifying
            self._gen_blocks = gen.m_blocks

    def _matvec(self, x: np.ndarray) -> np.ndarray:
        if self._dense:
            return self._a @ x
        lay = self.layout
        y = 1j * self.omega * x.copy()
        for bn in lay.mode_indices:
            r0 = lay.pos(bn) * lv.LDIM
            for j, blk in self._gen_blocks.items():
                bm = bn - j
                if -lay.q_cut <= bm <= lay.q_cut:
                    c0 = lay.pos(bm) * lv.LDIM
                    y[r0:r0 + lv.LDIM] += blk @ x[c0:c0 + lv.LDIM]
        if self._trace_rows:
            for bn in lay.mode_indices:
                r0 = lay.pos(bn) * lv.LDIM
                y[r0 + lv.op_index(1, 1)] = self._row_scale * \
                    x[[r0 + p for p in lv.POPULATION_IDX]].sum(axis=0)
        return y

    def solve(self, rhs: np.ndarray, trans: bool = False) -> np.ndarray:
        """Solve (i w I + M) x = rhs, or its transpose when trans=True."""
        rhs = np.asarray(rhs, dtype=complex)
        squeeze = rhs.ndim == 1
        b = rhs.reshape(self._n, -1)
        if self._trace_rows:
            if trans:
                raise ValueError("transpose solve unsupported with trace rows")
            b = b.copy()
            b[self._replaced, :] = 0.0
        if self._dense:
            import scipy.linalg as sla
            x = sla.lu_solve(self._lu, b, trans=1 if trans else 0)
        else:
            x, info = lapack.zgbtrs(self._lu, self._kl, self._ku,
                                    np.asfortranarray(b), self._ipiv,
                                    trans=1 if trans else 0)
            if info != 0:
                raise SingularShiftError(f"banded back-substitution failed "
                                         f"(info={info})")
        # residual check on the (possibly transposed) system
        if trans:
            res = np.linalg.norm(self._matvec_t(x) - b)
        else:
            res = np.linalg.norm(self._matvec(x) - b)
        scale = max(np.linalg.norm(b), 1e-300)
        if res > 1e-10 * scale * max(1.0, np.sqrt(self._n)):
            raise SingularShiftError(
                f"shifted solve residual {res / scale:.3e} exceeds tolerance",
                self._smallest_pivot)
        return x[:, 0] if squeeze else x

    def _matvec_t(self, x: np.ndarray) -> np.ndarray:
        lay = self.layout
        y = 1j * self.omega * x.copy()
        for bn in lay.mode_indices:
            r0 = lay.pos(bn) * lv.LDIM
            for j, blk in self._gen_blocks.items():
                bm = bn - j
                if -lay.q_cut <= bm <= lay.q_cut:
                    c0 = lay.pos(bm) * lv.LDIM
                    y[c0:c0 + lv.LDIM] += blk.T @ x[r0:r0 + lv.LDIM]
        return y


def shifted_solve(gen: BlockGenerator, omega: float, rhs: np.ndarray,
                  *, trans: bool = False, dense: bool = False) -> np.ndarray:
    """One-shot solve; use ShiftedSolver directly to amortize factorization."""
    return ShiftedSolver(gen, omega, dense=dense).solve(rhs, trans=trans)


def dressed_steady_state(params: PhysicalParams, v_z: float = 0.0, *,
                         pump_offsets: tuple[int, ...] = (),
                         pump_proj: float = 1.0,
                         pad: int = 10,
                         harmonic_cutoff: int | None = None
                         ) -> dict[int, np.ndarray]:
    """Harmonics X^(m) of the pump-dressed atomic steady state.

    The pump pattern is static in z and the atoms respond locally, so the
    state at pump phase phi = delta_kz*z is the kernel of the local drift
    with the local Rabi frequency
        Omega(phi) = Omega_0 + sum_k (Omega_+k e^{i k phi} + Omega_-k e^{-i k phi}).
    Harmonics are projected out by FFT over a uniform phi grid of
    4*(max offset + pad) points; returned for |m| <= harmonic_cutoff
    (default 4*max offset, which covers the leading interference
    gratings; the atoms respond nonlinearly so harmonics beyond the
    pump offsets are generically nonzero).
    """
    if len(pump_offsets) != params.n_pump_pairs:
        raise ValueError("one offset per configured pump pair expected")
    if not pump_offsets:
        ss = lv.pump_only_steady_state(params, v_z, pump_proj=pump_proj)
        return {0: ss}
    if harmonic_cutoff is None:
        harmonic_cutoff = 4 * max(pump_offsets)
    n_grid = max(4 * (max(pump_offsets) + pad), 4 * harmonic_cutoff, 32)
    phis = 2.0 * np.pi * np.arange(n_grid) / n_grid
    states = np.empty((n_grid, lv.LDIM), dtype=complex)
    for l, phi in enumerate(phis):
        omega_loc = params.omega0_rabi + 0.0j
        for k, (w_p, w_m) in zip(pump_offsets, params.omega_pm_rabi):
            omega_loc += w_p * np.exp(1j * k * phi) + w_m * np.exp(-1j * k * phi)
        states[l] = lv.pump_only_steady_state(
            params, v_z, omega_rabi=omega_loc, pump_proj=pump_proj)
    harmonics = np.fft.fft(states, axis=0) / n_grid
    return {m: harmonics[m % n_grid]
            for m in range(-harmonic_cutoff, harmonic_cutoff + 1)}


def build_drift_blocks(params: PhysicalParams, v_z: float = 0.0, *,
                       pump_offsets: tuple[int, ...] = (),
                       pump_proj: float = 1.0,
                       gx_harmonic0_only: bool = False,
                       ss_pad: int = 10) -> DriftBlocks:
    """All per-velocity atomic blocks: M^(j), G_x^(j), T, D.

    G_x harmonics follow the dressed-state harmonics at the pump offsets
    (gx_harmonic0_only truncates to harmonic 0 for sensitivity studies);
    the diffusion matrix is evaluated on harmonic 0.
    """
    blocks = DriftBlocks(m0=lv.build_drift(params, v_z, pump_proj=pump_proj))
    for i, k in enumerate(pump_offsets, start=1):
        blocks.pump[+k] = lv.build_pump_coupling(params, i, +1)
        blocks.pump[-k] = lv.build_pump_coupling(params, i, -1)
    ss = dressed_steady_state(params, v_z, pump_offsets=pump_offsets,
                              pump_proj=pump_proj, pad=ss_pad)
    for j, ss_j in ss.items():
        if gx_harmonic0_only and j != 0:
            continue
        gx_j = lv.build_field_coupling(params, ss_j)
        if np.max(np.abs(gx_j)) > 0:
            blocks.gx[j] = gx_j
    if 0 not in blocks.gx:
        blocks.gx[0] = lv.build_field_coupling(params, ss[0])
    blocks.t_map = lv.build_emission_map(params)
    blocks.diffusion = lv.build_diffusion(params, ss[0], v_z,
                                          pump_proj=pump_proj)
    return blocks


# ---------------------------------------------------------------------------
# Exact harmonic response via the pump-phase representation.
#
# The infinite harmonic ladder of 16x16 blocks is Toeplitz (block (n, m)
# depends only on n - m), so the ladder operator is diagonalized by the
# Fourier transform in the harmonic index: at fixed pump interference phase
# phi = delta_kz * z it acts as plain multiplication by the local generator
#     M(phi) = M^(0) + sum_j M^(j) e^{i j phi}.
# Inverting M(phi) pointwise on a phi grid and transforming back gives the
# exact response of the untruncated ladder.  The truncated block-tridiagonal
# solve is kept above as the small-Q oracle; at strong dressing its three-term
# block recurrence picks up an exponentially growing solution and fails to
# converge in Q, which is why production sweeps use this path instead.


@dataclass
class HarmonicResponse:
    """Velocity-averaged harmonics of the atomic field/force response.

    field[i_beta, d] is the 4x4 block of T (i w I + M)^-1 G_x at harmonic
    offset d, with the transverse-motion damping rate betas[i_beta] folded
    into the inverse (see PhaseSpaceSolver).  forces, when requested, holds
    the corresponding 4x16 blocks of T (i w I + M)^-1 for the Langevin
    drive.
    """

    omega: float
    n_phi: int
    betas: np.ndarray
    field: np.ndarray            # (n_beta, n_phi, 4, 4)
    forces: np.ndarray | None    # (n_beta, n_phi, 4, 16)

    def field_block(self, d: int, i_beta: int = 0) -> np.ndarray:
        if 2 * abs(d) > self.n_phi:
            # harmonic not representable on the phase grid (e.g. pump-free
            # runs with n_phi = 1): physically zero, never aliased
            return np.zeros((4, 4), dtype=complex)
        return self.field[i_beta, d % self.n_phi]

    def force_block(self, d: int, i_beta: int = 0) -> np.ndarray:
        if self.forces is None:
            raise ValueError("response was built without force blocks")
        if 2 * abs(d) > self.n_phi:
            return np.zeros((4, lv.LDIM), dtype=complex)
        return self.forces[i_beta, d % self.n_phi]


class PhaseSpaceSolver:
    """Eigendecomposition cache for the pointwise-phase atomic response.

    One instance diagonalizes M(phi) for every (velocity node, phase point)
    pair once; each call to :meth:`response` then costs only the spectral
    reassembly, so sideband-frequency scans are cheap.

    Transverse thermal motion: an atom crossing the interference gratings
    at transverse speed u sees the grating phase advance at rate kappa*u
    for accumulated grating wavevector kappa, which shifts each eigenvalue
    lambda -> lambda + i*kappa*u in the resolvent.  With u Maxwell
    distributed (1/e width folded into beta = kappa*sigma) the average has
    the closed form
        <1/(lambda + i beta u)> = -(sqrt(pi)/beta) w(-i lambda / beta),
    with w the Faddeeva function (valid for Re lambda < 0, which holds for
    every relaxing eigenmode).  beta = 0 reduces to 1/lambda.
    """

    def __init__(self, params: PhysicalParams,
                 velocities: np.ndarray, weights: np.ndarray, *,
                 pump_offsets: tuple[int, ...] = (),
                 pump_proj: float = 1.0,
                 n_phi: int | None = None,
                 include_forces: bool = False):
        if len(velocities) != len(weights):
            raise ValueError("velocity nodes and weights must align")
        if n_phi is None:
            n_phi = 1024 if pump_offsets else 1
        if pump_offsets and n_phi < 4 * max(pump_offsets):
            raise ValueError("phase grid too coarse for the pump offsets")
        self.params = params
        self.pump_offsets = tuple(pump_offsets)
        self.pump_proj = pump_proj
        self.n_phi = int(n_phi)
        self.velocities = np.asarray(velocities, dtype=float)
        self.weights = np.asarray(weights, dtype=float)
        self._include_forces = include_forces
        self.diffusion0 = np.zeros((lv.LDIM, lv.LDIM), dtype=complex)

        phis = 2.0 * np.pi * np.arange(self.n_phi) / self.n_phi
        n_v = len(self.velocities)
        self._lam = np.empty((n_v, self.n_phi, lv.LDIM), dtype=complex)
        self._tv = np.empty((n_v, self.n_phi, 4, lv.LDIM), dtype=complex)
        self._vg = np.empty((n_v, self.n_phi, lv.LDIM, 4), dtype=complex)
        self._vinv = (np.empty((n_v, self.n_phi, lv.LDIM, lv.LDIM),
                               dtype=complex) if include_forces else None)
        self._kernel = np.empty((n_v, self.n_phi), dtype=int)
        for iv, v in enumerate(self.velocities):
            blocks = build_drift_blocks(params, v,
                                        pump_offsets=self.pump_offsets,
                                        pump_proj=pump_proj)
            ms = np.broadcast_to(
                blocks.m0, (self.n_phi, lv.LDIM, lv.LDIM)).astype(complex).copy()
            for j, blk in blocks.pump.items():
                ms += np.exp(1j * j * phis)[:, None, None] * blk
            gs = np.zeros((self.n_phi, lv.LDIM, 4), dtype=complex)
            for j, blk in blocks.gx.items():
                gs += np.exp(1j * j * phis)[:, None, None] * blk
            lam, vec = np.linalg.eig(ms)
            self._lam[iv] = lam
            self._tv[iv] = blocks.t_map @ vec
            self._vg[iv] = np.linalg.solve(vec, gs)
            if include_forces:
                self._vinv[iv] = np.linalg.inv(vec)
            self._kernel[iv] = np.argmin(np.abs(lam), axis=1)
            self.diffusion0 += self.weights[iv] * blocks.diffusion

    def _inverses(self, omega: float, beta: float) -> np.ndarray:
        """Maxwell-averaged resolvent weights 1/(i w + lambda) per mode."""
        lam = self._lam + 1j * omega
        if beta == 0.0:
            inv = np.empty_like(lam)
            np.divide(1.0, lam, out=inv)
        else:
            inv = -math.sqrt(math.pi) / beta * wofz(-1j * lam / beta)
        if omega == 0.0:
            # The drift kernel (one near-null eigenmode per phase point) is
            # excluded: the right-hand sides are commutator-generated and
            # trace-free, so their kernel component vanishes identically and
            # keeping the 1/lambda ~ 1/0 weight would only inject round-off.
            n_v = lam.shape[0]
            iv = np.arange(n_v)[:, None]
            ip = np.arange(self.n_phi)[None, :]
            inv[iv, ip, self._kernel] = 0.0
        return inv

    def response(self, omega: float, betas=(0.0,), *,
                 include_forces: bool = False) -> HarmonicResponse:
        if include_forces and not self._include_forces:
            raise ValueError("solver built without include_forces=True")
        betas = np.atleast_1d(np.asarray(betas, dtype=float))
        n_b = len(betas)
        field = np.zeros((n_b, self.n_phi, 4, 4), dtype=complex)
        forces = (np.zeros((n_b, self.n_phi, 4, lv.LDIM), dtype=complex)
                  if include_forces else None)
        for ib, beta in enumerate(betas):
            inv = self._inverses(omega, beta)       # (n_v, n_phi, 16)
            w = self._tv * inv[:, :, None, :]       # (n_v, n_phi, 4, 16)
            field[ib] = np.einsum("v,vpik,vpkj->pij", self.weights, w,
                                  self._vg, optimize=True)
            if include_forces:
                forces[ib] = np.einsum("v,vpik,vpkj->pij", self.weights, w,
                                       self._vinv, optimize=True)
        field = np.fft.fft(field, axis=1) / self.n_phi
        if include_forces:
            forces = np.fft.fft(forces, axis=1) / self.n_phi
        return HarmonicResponse(omega=omega, n_phi=self.n_phi, betas=betas,
                                field=field, forces=forces)
