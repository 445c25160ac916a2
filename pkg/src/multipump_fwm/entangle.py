"""Quantum-correlation observables extracted from covariance matrices.

Everything here is a pure function of a symmetrized quadrature covariance
matrix (plus carrier gains for intensity weighting): pairwise and summed
noise differences, carrier-weighted intensity-difference spectra, and the
PPT criterion over all bipartitions of a selected mode set.

Conventions: quadratures are vacuum-normalized (variance 1), so a two-mode
quadrature difference has shot-noise limit 2 and the ten-mode collective
difference has limit 10.  The symplectic form in the (P, Q)-per-mode
ordering is the block-diagonal [[0, 1], [-1, 0]]; physical states satisfy
V + i Omega >= 0, i.e. every symplectic eigenvalue >= 1.  Partial
transposition of a mode set flips the sign of its Q quadratures; a minimum
symplectic eigenvalue of the transposed matrix below 1 certifies
entanglement across that bipartition.

The default hexapartite labeling is 1..6 = a^(-2), a^(0), a^(2), b^(-2),
b^(0), b^(2); labels i and 7-i are the phase-matched pairs (a^(n), b^(-n)).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import propagate as pg
from .spectra import CovarianceMatrix

__all__ = [
    "HEXAPARTITE_LABELS", "Bipartition", "EntangleError", "IntensitySpectra",
    "enumerate_bipartitions", "extract_modes", "intensity_spectra",
    "noise_difference", "partial_transpose", "ppt_min_eigenvalue",
    "symplectic_eigenvalues", "symplectic_form", "total_noise_difference",
]

ModeRef = tuple[str, int]

#: label -> (channel, harmonic) for the default six-mode extraction;
#: (1, 6), (2, 5), (3, 4) are the phase-matched pairs.
HEXAPARTITE_LABELS: dict[int, ModeRef] = {
    1: ("a", -2), 2: ("a", 0), 3: ("a", 2),
    4: ("b", -2), 5: ("b", 0), 6: ("b", 2),
}


class EntangleError(RuntimeError):
    pass


# ------------------------------------------------------------ mode plumbing

def extract_modes(cm: CovarianceMatrix,
                  modes: dict[int, ModeRef] | None = None,
                  ) -> tuple[np.ndarray, tuple[int, ...]]:
    """Reduced CM over a labeled mode set, ordered (P, Q) per label.

    Returns (V, labels) with rows 2k, 2k+1 the P and Q quadratures of
    labels[k] (ascending label order).
    """
    modes = HEXAPARTITE_LABELS if modes is None else modes
    labels = tuple(sorted(modes))
    idx = []
    for lab in labels:
        ch, n = modes[lab]
        idx.append(cm.block_index(ch, n, "P"))
        idx.append(cm.block_index(ch, n, "Q"))
    idx = np.asarray(idx)
    return cm.v[np.ix_(idx, idx)], labels


def symplectic_form(n_modes: int) -> np.ndarray:
    """Omega = diag of [[0, 1], [-1, 0]] blocks in (P, Q) ordering."""
    omega = np.zeros((2 * n_modes, 2 * n_modes))
    for k in range(n_modes):
        omega[2 * k, 2 * k + 1] = 1.0
        omega[2 * k + 1, 2 * k] = -1.0
    return omega


def symplectic_eigenvalues(v: np.ndarray,
                           imag_tol: float = 1e-10) -> np.ndarray:
    """Sorted symplectic spectrum |eig(i Omega V)| (each value twice-folded).

    The eigenvalues of i Omega V come in +/- pairs for symmetric V; their
    magnitudes are the Williamson symplectic eigenvalues.  A residual
    imaginary part beyond `imag_tol` (relative) flags a non-symmetric or
    badly conditioned input.
    """
    v = np.asarray(v)
    if v.ndim != 2 or v.shape[0] != v.shape[1] or v.shape[0] % 2:
        raise EntangleError(f"not an even-dimensional square matrix: {v.shape}")
    n = v.shape[0] // 2
    ev = np.linalg.eigvals(1j * symplectic_form(n) @ v)
    scale = max(np.max(np.abs(ev)), 1.0)
    if np.max(np.abs(ev.imag)) > imag_tol * scale:
        raise EntangleError(
            f"symplectic spectrum not real (residue "
            f"{np.max(np.abs(ev.imag)) / scale:.3e}); V symmetric?")
    mags = np.sort(np.abs(ev.real))
    return mags[::2]  # each value appears as a +/- pair; keep one copy


def partial_transpose(v: np.ndarray, positions: tuple[int, ...]) -> np.ndarray:
    """Flip the sign of the Q quadratures of the modes at `positions`.

    Positions index modes (0-based) in the (P, Q)-per-mode ordering of `v`.
    """
    n = v.shape[0] // 2
    flip = np.ones(2 * n)
    for k in positions:
        if not 0 <= k < n:
            raise EntangleError(f"mode position {k} out of range 0..{n - 1}")
        flip[2 * k + 1] = -1.0
    return v * np.outer(flip, flip)


# ------------------------------------------------------- noise differences

def noise_difference(cm: CovarianceMatrix, mode_i: ModeRef,
                     mode_j: ModeRef) -> float:
    """Variance of P_i - P_j; uncorrelated vacua give exactly 2."""
    d = np.zeros(cm.v.shape[0])
    d[cm.block_index(mode_i[0], mode_i[1], "P")] += 1.0
    d[cm.block_index(mode_j[0], mode_j[1], "P")] -= 1.0
    return float(d @ cm.v @ d)


def total_noise_difference(cm: CovarianceMatrix,
                           pairing: tuple[tuple[ModeRef, ModeRef], ...]
                           | None = None) -> float:
    """Variance of sum_k (P_{i_k} - P_{j_k}); vacuum limit is 2 * #pairs.

    The default pairing runs over every harmonic in the CM, differencing
    a^(n) against its phase-matched partner b^(-n) (ten-mode limit 10 for
    the {0, +/-2, +/-4} set).
    """
    if pairing is None:
        pairing = tuple((("a", n), ("b", -n)) for n in cm.modes)
    d = np.zeros(cm.v.shape[0])
    for mi, mj in pairing:
        d[cm.block_index(mi[0], mi[1], "P")] += 1.0
        d[cm.block_index(mj[0], mj[1], "P")] -= 1.0
    return float(d @ cm.v @ d)


@dataclass(frozen=True)
class IntensitySpectra:
    """Carrier-weighted amplitude-noise variances at one (omega, z) point.

    All four groupings share the same shot-noise reference `sql`
    (the total weight over both channels), so vacuum inputs with the same
    weights put var_minus exactly at `sql`.  dB values are
    10 log10(var / sql).
    """

    var_a: float       # probe channel alone
    var_b: float       # conjugate channel alone
    var_plus: float    # intensity sum
    var_minus: float   # intensity difference
    sql: float

    def db(self, which: str) -> float:
        var = getattr(self, f"var_{which}")
        return float(10.0 * np.log10(var / self.sql))


def intensity_spectra(cm: CovarianceMatrix, gains: pg.GainTable,
                      modes: tuple[int, ...] | None = None,
                      ) -> IntensitySpectra:
    """Photocurrent noise of the carrier-weighted amplitude quadratures.

    delta I_ch^(n) = |carrier| * delta P_ch^(n) with |carrier| ~ sqrt(gain),
    so each quadrature enters with weight sqrt(G); the common shot-noise
    reference is the summed weight of both channels (value 2 for a single
    symmetric pair), matching difference-detection SQL normalization.
    """
    if modes is None:
        modes = cm.modes
    dim = cm.v.shape[0]
    d_a = np.zeros(dim)
    d_b = np.zeros(dim)
    sql = 0.0
    for n in modes:
        wa = np.sqrt(max(gains.gain("a", n), 0.0))
        wb = np.sqrt(max(gains.gain("b", -n), 0.0))
        d_a[cm.block_index("a", n, "P")] += wa
        d_b[cm.block_index("b", -n, "P")] += wb
        sql += wa * wa + wb * wb
    if sql <= 0.0:
        raise EntangleError("no carrier weight in the selected mode set")
    var = lambda d: float(d @ cm.v @ d)
    return IntensitySpectra(var_a=var(d_a), var_b=var(d_b),
                            var_plus=var(d_a + d_b),
                            var_minus=var(d_a - d_b), sql=sql)


# ------------------------------------------------------------ bipartitions

@dataclass(frozen=True)
class Bipartition:
    """One unordered split of a labeled mode set into subset | complement."""

    subset: frozenset[int]
    all_labels: frozenset[int]

    def __post_init__(self):
        if not self.subset or not self.subset < self.all_labels:
            raise EntangleError("subset must be a nonempty proper subset")

    @property
    def complement(self) -> frozenset[int]:
        return self.all_labels - self.subset

    @property
    def split_class(self) -> str:
        k = len(self.subset)
        return f"{min(k, len(self.all_labels) - k)}x{max(k, len(self.all_labels) - k)}"

    def __str__(self) -> str:
        side = lambda s: "".join(str(i) for i in sorted(s))
        return f"{side(self.subset)}|{side(self.complement)}"


def enumerate_bipartitions(d: int,
                           labels: tuple[int, ...] | None = None
                           ) -> list[Bipartition]:
    """All 2^(d-1) - 1 unordered bipartitions of d labeled modes.

    Canonicalized so the subset contains the smallest label; for d = 6 the
    31 splits group as 6 of 1x5, 15 of 2x4 and 10 of 3x3.
    """
    if labels is None:
        labels = tuple(range(1, d + 1))
    if len(labels) != d or d < 2:
        raise EntangleError("need d >= 2 distinct labels")
    lo, rest = min(labels), sorted(set(labels) - {min(labels)})
    out = []
    for k in range(len(rest) + 1):
        for extra in itertools.combinations(rest, k):
            sub = frozenset((lo, *extra))
            if len(sub) < d:
                out.append(Bipartition(subset=sub,
                                       all_labels=frozenset(labels)))
    return out


def ppt_min_eigenvalue(cm: CovarianceMatrix | np.ndarray,
                       bp: Bipartition | frozenset[int] | tuple[int, ...],
                       modes: dict[int, ModeRef] | None = None,
                       psd_tol: float = 1e-8) -> float:
    """Minimum symplectic eigenvalue after partially transposing `bp`.

    Below 1 the bipartition is entangled; at or above 1 the PPT test is
    inconclusive (separable-compatible).  Accepts either a full
    CovarianceMatrix (reduced through `modes`, default hexapartite) or an
    already-extracted (P, Q)-ordered matrix with integer mode positions.
    """
    if isinstance(cm, CovarianceMatrix):
        v, labels = extract_modes(cm, modes)
    else:
        v = np.asarray(cm)
        labels = tuple(range(v.shape[0] // 2))
    if np.max(np.abs(v - v.T)) > 1e-9 * max(np.max(np.abs(v)), 1.0):
        raise EntangleError("covariance matrix not symmetric")
    if np.min(np.linalg.eigvalsh(v)) < -psd_tol:
        raise EntangleError("covariance matrix not positive semidefinite")
    subset = bp.subset if isinstance(bp, Bipartition) else frozenset(bp)
    positions = tuple(labels.index(lab) for lab in sorted(subset))
    vt = partial_transpose(v, positions)
    return float(symplectic_eigenvalues(vt)[0])
