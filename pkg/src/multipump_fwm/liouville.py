"""Single-atom Liouville-space matrices of the double-lambda model.

The atomic state lives in the 16-dimensional space of operator averages
<sigma_ij>, i,j in {1..4}, stored row-major: [s11, s12, s13, s14, s21, ...].
Levels 1,2 are the ground hyperfine states (split by omega_hf), 3,4 the
excited states.  The pump drives 1->3 and 2->4, the probe field couples
2->3 and the conjugate 1->4.

All matrices here are per-atom and per-velocity-class; the Floquet and
propagation layers stack and average them.
"""

from __future__ import annotations

import numpy as np

from .params import PhysicalParams

NLVL = 4
LDIM = NLVL * NLVL

# Field-slot order used everywhere: (a, a_dag, b, b_dag).
SLOT_A, SLOT_ADAG, SLOT_B, SLOT_BDAG = range(4)


def op_index(i: int, j: int) -> int:
    """Position of sigma_ij (1-based level labels) in the Liouville vector."""
    if not (1 <= i <= NLVL and 1 <= j <= NLVL):
        raise ValueError(f"level labels out of range: ({i},{j})")
    return NLVL * (i - 1) + (j - 1)


POPULATION_IDX = [op_index(i, i) for i in range(1, NLVL + 1)]


def commutator_superop(h: np.ndarray) -> np.ndarray:
    """Superoperator of d sigma_ij/dt = i<[H, sigma_ij]> for H = sum h_kl sigma_kl.

    Using sigma_kl sigma_ij = delta_li sigma_kj:
        d sigma_ij/dt = i sum_k h_ki sigma_kj - i sum_l h_jl sigma_il.
    """
    h = np.asarray(h, dtype=complex)
    if h.shape != (NLVL, NLVL):
        raise ValueError("expected a 4x4 Hamiltonian matrix")
    m = np.zeros((LDIM, LDIM), dtype=complex)
    for i in range(1, NLVL + 1):
        for j in range(1, NLVL + 1):
            row = op_index(i, j)
            for k in range(1, NLVL + 1):
                m[row, op_index(k, j)] += 1j * h[k - 1, i - 1]
            for l in range(1, NLVL + 1):
                m[row, op_index(i, l)] -= 1j * h[j - 1, l - 1]
    return m


def atomic_hamiltonian(params: PhysicalParams, v_z: float = 0.0, *,
                       omega_rabi: float | None = None,
                       pump_proj: float = 1.0,
                       probe_proj: float = 1.0) -> np.ndarray:
    """Rotating-frame 4x4 Hamiltonian with Doppler-shifted detunings.

    The frame rotates with the pump on both optical coherences and with the
    probe/conjugate on the Raman coherences, leaving the diagonal
        diag(0, +delta, -Delta, omega_hf + delta - Delta)
    plus the pump coupling on 1->3 and 2->4.  The pump sits Delta below
    |1>->|3> and the Raman |1>->|2> resonance is met at delta = 0, with
    gain appearing on the delta > 0 flank.  An atom at velocity v_z sees
        Delta -> Delta - k_pump v_z,
        delta -> delta + (k_pump - k_probe) v_z,
    with k_pump = k0*pump_proj and k_probe = k0*probe_proj the longitudinal
    wavevector projections.
    """
    if omega_rabi is None:
        omega_rabi = params.omega0_rabi
    k0 = params.k0
    delta_eff = params.delta1 - k0 * pump_proj * v_z
    d2_eff = params.delta2 + k0 * (pump_proj - probe_proj) * v_z
    h = np.zeros((NLVL, NLVL), dtype=complex)
    h[1, 1] = d2_eff
    h[2, 2] = -delta_eff
    h[3, 3] = params.omega_hf + d2_eff - delta_eff
    # pump couples both lambda legs
    h[2, 0] = omega_rabi
    h[0, 2] = np.conj(omega_rabi)
    h[3, 1] = omega_rabi
    h[1, 3] = np.conj(omega_rabi)
    return h


def relaxation_superop(params: PhysicalParams) -> np.ndarray:
    """Fixed relaxation model of the drift generator.

    Each excited state decays at total rate Gamma with branching Gamma/2
    into each ground state; optical coherences decay at Gamma/2 + gamma_d,
    the excited-excited coherence at Gamma, the ground coherence at
    gamma_d, and the ground populations exchange at gamma_d toward the
    unpolarized ground mixture.
    """
    g = params.gamma_sp
    gd = params.gamma_d
    r = np.zeros((LDIM, LDIM), dtype=complex)
    # excited populations and feeding
    for e in (3, 4):
        r[op_index(e, e), op_index(e, e)] -= g
        for gr in (1, 2):
            r[op_index(gr, gr), op_index(e, e)] += g / 2.0
    # ground-population exchange toward the unpolarized mixture
    r[op_index(1, 1), op_index(1, 1)] -= gd / 2.0
    r[op_index(1, 1), op_index(2, 2)] += gd / 2.0
    r[op_index(2, 2), op_index(2, 2)] -= gd / 2.0
    r[op_index(2, 2), op_index(1, 1)] += gd / 2.0
    # coherence decay
    for i in range(1, NLVL + 1):
        for j in range(1, NLVL + 1):
            if i == j:
                continue
            ground_i, ground_j = i <= 2, j <= 2
            if ground_i and ground_j:
                rate = gd
            elif ground_i != ground_j:
                rate = g / 2.0 + gd
            else:
                rate = g
            r[op_index(i, j), op_index(i, j)] -= rate
    return r


def build_drift(params: PhysicalParams, v_z: float = 0.0, *,
                omega_rabi: float | None = None,
                pump_proj: float = 1.0,
                probe_proj: float = 1.0) -> np.ndarray:
    """16x16 drift generator M^(0) for the pump-only dynamics at velocity v_z."""
    h = atomic_hamiltonian(params, v_z, omega_rabi=omega_rabi,
                           pump_proj=pump_proj, probe_proj=probe_proj)
    return commutator_superop(h) + relaxation_superop(params)


def build_pump_coupling(params: PhysicalParams, pair_index: int,
                        sign: int) -> np.ndarray:
    """16x16 pump-coupling block M^(+k) (sign=+1) or M^(-k) (sign=-1).

    Both lambda legs share each pump, so the coupling operator is
    Omega*(sigma_31 + sigma_42 + h.c.) with the spatial phase factored out
    into the Floquet band offset.  The block is linear in the single Rabi
    frequency of the corresponding pump.
    """
    if not 1 <= pair_index <= params.n_pump_pairs:
        raise ValueError(
            f"pump pair {pair_index} not configured "
            f"({params.n_pump_pairs} pair(s) available)")
    if sign not in (+1, -1):
        raise ValueError("sign must be +1 or -1")
    omega = params.omega_pm_rabi[pair_index - 1][0 if sign > 0 else 1]
    h = np.zeros((NLVL, NLVL), dtype=complex)
    h[2, 0] = omega
    h[0, 2] = np.conj(omega)
    h[3, 1] = omega
    h[1, 3] = np.conj(omega)
    return commutator_superop(h)


class SteadyStateError(RuntimeError):
    pass


def pump_only_steady_state(params: PhysicalParams, v_z: float = 0.0, *,
                           omega_rabi: float | None = None,
                           pump_proj: float = 1.0) -> np.ndarray:
    """Mean atomic state under the central pump alone, as a 16-vector.

    Solves M x = 0 on the trace-one affine subspace (the relaxation model
    is homogeneous, so the inhomogeneity is carried entirely by the trace
    constraint).
    """
    m = build_drift(params, v_z, omega_rabi=omega_rabi, pump_proj=pump_proj)
    a = m.copy()
    rhs = np.zeros(LDIM, dtype=complex)
    a[op_index(1, 1), :] = 0.0
    a[op_index(1, 1), POPULATION_IDX] = 1.0
    rhs[op_index(1, 1)] = 1.0
    cond = np.linalg.cond(a)
    if not np.isfinite(cond) or cond > 1e14:
        raise SteadyStateError(
            f"restricted drift is numerically singular (cond={cond:.3e})")
    ss = np.linalg.solve(a, rhs)
    residual = np.linalg.norm(m @ ss)
    if residual > 1e-8 * max(np.linalg.norm(m), 1.0):
        raise SteadyStateError(
            f"steady-state residual too large: {residual:.3e}")
    return ss


def build_field_coupling(params: PhysicalParams, ss: np.ndarray) -> np.ndarray:
    """16x4 linearized coupling G_x of (a, a_dag, b, b_dag) into the sigmas.

    Each interaction term g * f * sigma_pq contributes
        i g (delta_qi <sigma_pj> - delta_jp <sigma_iq>)
    to the equation of sigma_ij, with the atomic averages taken in the
    pump-only steady state.
    """
    ss_m = np.asarray(ss, dtype=complex).reshape(NLVL, NLVL)
    terms = [
        (SLOT_A, 3, 2, params.g_a),     # g_a a sigma_32
        (SLOT_ADAG, 2, 3, params.g_a),  # g_a a^dag sigma_23
        (SLOT_B, 4, 1, params.g_b),     # g_b b sigma_41
        (SLOT_BDAG, 1, 4, params.g_b),  # g_b b^dag sigma_14
    ]
    gx = np.zeros((LDIM, 4), dtype=complex)
    for slot, p, q, g in terms:
        for i in range(1, NLVL + 1):
            for j in range(1, NLVL + 1):
                val = 0.0j
                if q == i:
                    val += ss_m[p - 1, j - 1]
                if j == p:
                    val -= ss_m[i - 1, q - 1]
                gx[op_index(i, j), slot] += 1j * g * val
    return gx


def build_emission_map(params: PhysicalParams) -> np.ndarray:
    """4x16 map T from atomic coherences to field source terms.

    The probe is sourced by sigma_23 (and its adjoint by sigma_32), the
    conjugate by sigma_14 / sigma_41.
    """
    t = np.zeros((4, LDIM), dtype=complex)
    t[SLOT_A, op_index(2, 3)] = -1j * params.g_a
    t[SLOT_ADAG, op_index(3, 2)] = 1j * params.g_a
    t[SLOT_B, op_index(1, 4)] = -1j * params.g_b
    t[SLOT_BDAG, op_index(4, 1)] = 1j * params.g_b
    return t


def build_diffusion(params: PhysicalParams, ss: np.ndarray,
                    v_z: float = 0.0, *,
                    omega_rabi: float | None = None,
                    pump_proj: float = 1.0) -> np.ndarray:
    """16x16 Langevin diffusion matrix from the generalized Einstein relation.

    2 D_(ij),(kl) = <L(sigma_ij sigma_kl)> - <L(sigma_ij) sigma_kl>
                    - <sigma_ij L(sigma_kl)>,
    evaluated on the pump-only steady state with the operator product rule
    sigma_ij sigma_kl = delta_jk sigma_il.  The Hamiltonian part of the
    drift is a derivation and cancels identically, so only relaxation
    contributes; the full drift is used so the cancellation doubles as a
    consistency check.
    """
    m = build_drift(params, v_z, omega_rabi=omega_rabi, pump_proj=pump_proj)
    m4 = m.reshape(NLVL, NLVL, NLVL, NLVL)
    ss_v = np.asarray(ss, dtype=complex).reshape(LDIM)
    ss_m = ss_v.reshape(NLVL, NLVL)
    mss = (m @ ss_v).reshape(NLVL, NLVL)

    eye = np.eye(NLVL)
    # term1[i,j,k,l] = delta_jk * (M ss)_{il}
    t1 = np.einsum("jk,il->ijkl", eye, mss)
    # term2[i,j,k,l] = sum_p M[(ij),(pk)] ss[p,l]
    t2 = np.einsum("ijpk,pl->ijkl", m4, ss_m)
    # term3[i,j,k,l] = sum_q M[(kl),(jq)] ss[i,q]
    t3 = np.einsum("kljq,iq->ijkl", m4, ss_m)
    d = 0.5 * (t1 - t2 - t3)
    return d.reshape(LDIM, LDIM)
