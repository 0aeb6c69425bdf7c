"""Hamiltonian generation for node/loop circuits.

Pipeline: remove free modes (Schur complement on decoupled islands and
loops), reduce the network matrix to an identity block to classify modes,
then emit the structured Hamiltonian: two quadratic forms plus Josephson and
phase-slip cosines.  Mode types:

* extended -- a continuous charge/flux conjugate pair per identity-block
  index (a second, doubly-discrete pair at the same index drops out of the
  Hamiltonian entirely and is only reported);
* discrete charge -- integer Cooper-pair number with compact conjugate
  phase, one per leftover node row;
* discrete flux -- integer fluxon number with compact conjugate charge
  phase, one per leftover loop column.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .constants import COOPER_PAIR_CHARGE, FLUX_QUANTUM
from .graphs import CircuitTopology, apply_basis_change
from .intlin import (
    IntMatrix,
    UnimodularTransform,
    col_pivot,
    reduce_to_identity_block,
    row_pivot,
)
from .numeric import cholesky_pd_check, schur_complement


class QuantizeError(ValueError):
    pass


@dataclass(frozen=True)
class FreeModeRecord:
    """Outcome of free-mode elimination."""

    alpha_nodes: Tuple[int, ...]  # removed node indices (reduced basis)
    beta_loops: Tuple[int, ...]  # removed loop indices (reduced basis)
    u: Optional[UnimodularTransform] = None  # reduction basis, None if untouched
    w: Optional[UnimodularTransform] = None

    @property
    def trivial(self) -> bool:
        return not self.alpha_nodes and not self.beta_loops


def remove_free_modes(topo: CircuitTopology) -> Tuple[CircuitTopology, FreeModeRecord]:
    """Eliminate islands and loops that couple to no tunneling element.

    Free rows/columns are found after reducing the network matrix; the
    capacitance and inductance matrices are Schur-complemented onto the
    retained indices and the external/trapped vectors are dressed by the
    same elimination.  A topology without free modes is returned unchanged.
    """
    u, w, k = reduce_to_identity_block(topo.omega)
    red = apply_basis_change(topo, u, w)
    n, l = red.omega.shape
    alpha = [
        i for i in range(k, n)
        if all(red.a_j[i, jj] == 0 for jj in range(red.num_junctions))
    ]
    beta = [
        i for i in range(k, l)
        if all(red.b_s[i, ss] == 0 for ss in range(red.num_slips))
    ]
    if not alpha and not beta:
        return topo, FreeModeRecord((), ())

    keep_n = [i for i in range(n) if i not in alpha]
    keep_l = [i for i in range(l) if i not in beta]

    def dressed(mat: np.ndarray, vec: np.ndarray, keep: List[int], drop: List[int]) -> np.ndarray:
        if not drop:
            return vec[keep]
        m_ra = mat[np.ix_(keep, drop)]
        m_aa = mat[np.ix_(drop, drop)]
        try:
            corr = m_ra @ np.linalg.solve(m_aa, vec[drop])
        except np.linalg.LinAlgError as exc:
            raise QuantizeError(f"singular free-mode sub-block: {exc}") from exc
        return vec[keep] - corr

    c_new = schur_complement(red.c, keep_n) if n else red.c
    l_new = schur_complement(red.l, keep_l) if l else red.l
    out = CircuitTopology(
        c=c_new,
        l=l_new,
        a_j=red.a_j.submatrix(keep_n, range(red.num_junctions)),
        b_s=red.b_s.submatrix(keep_l, range(red.num_slips)),
        omega=red.omega.submatrix(keep_n, keep_l),
        q_ext=dressed(red.c, red.q_ext, keep_n, alpha),
        phi_ext=dressed(red.l, red.phi_ext, keep_l, beta),
        n0=dressed(red.c, red.n0, keep_n, alpha),
        m0=dressed(red.l, red.m0, keep_l, beta),
        e_j=red.e_j,
        e_s=red.e_s,
        junction_phase=red.junction_phase,
        slip_phase=red.slip_phase,
    )
    return out, FreeModeRecord(tuple(alpha), tuple(beta), u, w)


@dataclass(frozen=True)
class ModePartition:
    """Index bookkeeping for the reduced system."""

    k_indices: Tuple[int, ...]
    j_indices: Tuple[int, ...]
    s_indices: Tuple[int, ...]
    removed_doubly_discrete: int
    u: Optional[UnimodularTransform] = None
    w: Optional[UnimodularTransform] = None

    @property
    def k(self) -> int:
        return len(self.k_indices)

    @property
    def j(self) -> int:
        return len(self.j_indices)

    @property
    def s(self) -> int:
        return len(self.s_indices)


def classify_and_reduce(topo: CircuitTopology) -> Tuple[CircuitTopology, ModePartition]:
    """Bring the network matrix to identity-block form and split the modes.

    Expects free modes to be removed already; the identity block supplies an
    extended pair per index, the remaining node rows are discrete-charge
    modes, the remaining loop columns discrete-flux modes.
    """
    u, w, k = reduce_to_identity_block(topo.omega)
    red = apply_basis_change(topo, u, w)
    n, l = red.omega.shape
    part = ModePartition(
        k_indices=tuple(range(k)),
        j_indices=tuple(range(k, n)),
        s_indices=tuple(range(k, l)),
        removed_doubly_discrete=k,
        u=u,
        w=w,
    )
    return red, part


@dataclass(frozen=True)
class CosineTerm:
    """One tunneling term: -energy * cos(argument).

    The argument is ``scale * (extended_row . extended_vars) +
    compact_row . compact_vars + phase``, with ``scale`` equal to
    2*pi/flux-quantum for Josephson terms (acting on the extended flux
    variables) and 2*pi/Cooper-pair-charge for phase-slip terms (acting on
    the extended charges).
    """

    kind: str  # "josephson" | "phase_slip"
    energy: float  # [J]
    extended_row: Tuple[int, ...]
    compact_row: Tuple[int, ...]
    phase: float = 0.0  # [rad]


@dataclass(frozen=True)
class HamiltonianModel:
    """Structured Hamiltonian: quadratic blocks plus cosine terms.

    Capacitive quadratic: 0.5 * x^T cinv x over x = (Q_k, 2e n_j) minus
    offsets; inductive quadratic over (P_k, Phi0 m_s).  Cosines per
    :class:`CosineTerm`.  The ``removed_doubly_discrete`` count reports the
    integer-valued conjugate pairs that dropped out.
    """

    k: int
    j: int
    s: int
    removed_doubly_discrete: int
    cinv: np.ndarray
    linv: np.ndarray
    charge_offsets: np.ndarray  # [C], length k + j
    flux_offsets: np.ndarray  # [Wb], length k + s
    cosines: Tuple[CosineTerm, ...]
    notation: str = "loop-charge"
    partition: Optional[ModePartition] = None
    free_modes: Optional[FreeModeRecord] = None

    def variable_names(self) -> Dict[str, int]:
        return {"Q": self.k, "P": self.k, "n": self.j, "phi": self.j, "m": self.s, "q": self.s}

    def to_dict(self) -> dict:
        return {
            "version": 1,
            "modes": {
                "extended": self.k,
                "discrete_charge": self.j,
                "discrete_flux": self.s,
                "removed_doubly_discrete": self.removed_doubly_discrete,
            },
            "notation": self.notation,
            "quadratic_capacitive": {
                "inverse_matrix": self.cinv.tolist(),
                "offsets": self.charge_offsets.tolist(),
                "variables": ["Q"] * self.k + ["2e*n"] * self.j,
            },
            "quadratic_inductive": {
                "inverse_matrix": self.linv.tolist(),
                "offsets": self.flux_offsets.tolist(),
                "variables": ["P"] * self.k + ["Phi0*m"] * self.s,
            },
            "cosines": [
                {
                    "type": t.kind,
                    "energy": t.energy,
                    "extended_row": list(t.extended_row),
                    "compact_row": list(t.compact_row),
                    "phase": t.phase,
                }
                for t in self.cosines
            ],
        }

    def with_standard_notation(self) -> "HamiltonianModel":
        """Relabel the extended flux variables as Phi = -P.

        Flips the sign of the extended-row coefficients of the Josephson
        cosines and of the extended flux offsets, matching the common
        flux-qubit convention.
        """
        if self.notation == "standard":
            return self
        new_cos = []
        for t in self.cosines:
            if t.kind == "josephson":
                row = tuple(-v for v in t.extended_row)
                new_cos.append(replace(t, extended_row=row))
            else:
                new_cos.append(t)
        offsets = self.flux_offsets.copy()
        offsets[: self.k] *= -1.0
        return replace(self, cosines=tuple(new_cos), flux_offsets=offsets, notation="standard")


def _fractional(vec: np.ndarray) -> np.ndarray:
    return vec - np.round(vec)


def build_hamiltonian(topo: CircuitTopology) -> HamiltonianModel:
    """Run the full quantization pipeline on a node/loop topology."""
    reduced, free_rec = remove_free_modes(topo)
    red, part = classify_and_reduce(reduced)
    k, n, l = part.k, red.num_nodes, red.num_loops
    j, s = n - k, l - k

    if n and not cholesky_pd_check(red.c):
        raise QuantizeError("capacitance matrix is not positive definite after reduction")
    if l and not cholesky_pd_check(red.l):
        raise QuantizeError("inductance matrix is not positive definite after reduction")
    cinv = np.linalg.inv(red.c) if n else np.zeros((0, 0))
    linv = np.linalg.inv(red.l) if l else np.zeros((0, 0))

    n0_frac = _fractional(red.n0)
    m0_frac = _fractional(red.m0)

    # Integer parts of the trapped charge/flux are unobservable; fractional
    # parts (dressing from removed free modes) become offsets: on discrete
    # rows they shift the external charge/flux, on extended rows they enter
    # the cosine arguments as constant phases.
    charge_offsets = red.q_ext.copy()
    charge_offsets[k:] -= COOPER_PAIR_CHARGE * n0_frac[k:]
    flux_offsets = red.phi_ext.copy()
    flux_offsets[k:] -= FLUX_QUANTUM * m0_frac[k:]

    cosines: List[CosineTerm] = []
    for idx in range(red.num_junctions):
        a_col = [red.a_j[i, idx] for i in range(n)]
        ext_row = tuple(-a_col[i] for i in range(k))
        compact_row = tuple(a_col[i] for i in range(k, n))
        phase = red.junction_phase[idx] + 2.0 * np.pi * float(
            np.dot([a_col[i] for i in range(k)], m0_frac[:k])
        )
        cosines.append(
            CosineTerm("josephson", float(red.e_j[idx]), ext_row, compact_row, float(phase))
        )
    for idx in range(red.num_slips):
        b_col = [red.b_s[i, idx] for i in range(l)]
        ext_row = tuple(b_col[i] for i in range(k))
        compact_row = tuple(b_col[i] for i in range(k, l))
        phase = red.slip_phase[idx] - 2.0 * np.pi * float(
            np.dot([b_col[i] for i in range(k)], n0_frac[:k])
        )
        cosines.append(
            CosineTerm("phase_slip", float(red.e_s[idx]), ext_row, compact_row, float(phase))
        )

    return HamiltonianModel(
        k=k,
        j=j,
        s=s,
        removed_doubly_discrete=part.removed_doubly_discrete,
        cinv=cinv,
        linv=linv,
        charge_offsets=charge_offsets,
        flux_offsets=flux_offsets,
        cosines=tuple(cosines),
        partition=part,
        free_modes=free_rec,
    )


def evaluate_hamiltonian(model: HamiltonianModel, point: Dict[str, Sequence[float]]) -> float:
    """Classical energy [J] of the emitted Hamiltonian at a phase-space point.

    ``point`` supplies arrays: ``Q`` and ``P`` (extended, [C] and [Wb]),
    ``n`` and ``m`` (integers), ``phi`` and ``q`` (compact phases, [rad]).
    """
    expect = model.variable_names()
    vals = {}
    for name, size in expect.items():
        arr = np.asarray(point.get(name, []), dtype=float).reshape(-1)
        if arr.size != size:
            raise QuantizeError(f"variable {name!r} needs {size} entries, got {arr.size}")
        vals[name] = arr
    for name in ("n", "m"):
        if vals[name].size and not np.allclose(vals[name], np.round(vals[name]), atol=1e-9):
            raise QuantizeError(f"discrete variable {name!r} must be integer-valued")

    x = np.concatenate([vals["Q"], COOPER_PAIR_CHARGE * vals["n"]]) - model.charge_offsets
    y = np.concatenate([vals["P"], FLUX_QUANTUM * vals["m"]]) - model.flux_offsets
    energy = 0.5 * float(x @ model.cinv @ x) + 0.5 * float(y @ model.linv @ y)
    for t in model.cosines:
        if t.kind == "josephson":
            arg = (2.0 * np.pi / FLUX_QUANTUM) * float(np.dot(t.extended_row, vals["P"]))
            arg += float(np.dot(t.compact_row, vals["phi"])) + t.phase
        else:
            arg = (2.0 * np.pi / COOPER_PAIR_CHARGE) * float(np.dot(t.extended_row, vals["Q"]))
            arg += float(np.dot(t.compact_row, vals["q"])) + t.phase
        energy -= t.energy * np.cos(arg)
    return energy


# ---------------------------------------------------------------------------
# Zero-capacitance / zero-inductance limits


@dataclass(frozen=True)
class ZeroLimitRecord:
    """Constraint bookkeeping for vanishing-element limits.

    ``flux_pairs`` maps a constrained node (whose flux became the drive
    value ``flux_drives``) to the zero-inductance loop that pinned it;
    ``charge_pairs`` maps a constrained loop (charge pinned to
    ``charge_drives``) to the zero-capacitance node responsible.
    ``gamma``/``lam`` are the irrotational-gauge reallocation matrices.
    """

    flux_pairs: Tuple[Tuple[int, int], ...]  # (node, loop)
    charge_pairs: Tuple[Tuple[int, int], ...]  # (loop, node)
    dropped_nodes: Tuple[int, ...]
    dropped_loops: Tuple[int, ...]
    gamma: np.ndarray
    lam: np.ndarray
    flux_drives: np.ndarray  # [Wb], per flux pair
    charge_drives: np.ndarray  # [C], per charge pair
    u: Optional[UnimodularTransform] = None
    w: Optional[UnimodularTransform] = None

    @property
    def trivial(self) -> bool:
        return not (self.flux_pairs or self.charge_pairs or self.dropped_nodes or self.dropped_loops)


def _pivot_pair_rows(omega: IntMatrix, pivot_row: int, col: int):
    """Full pivot: clear column ``col`` with row ops, then row ``pivot_row``
    with column ops.  Returns (omega', U, W)."""
    m, u = row_pivot(omega, pivot_row, col)
    m, w = col_pivot(m, pivot_row, col)
    return m, u, w


def apply_zero_limits(
    topo: CircuitTopology,
    zero_cap_nodes: Sequence[int] = (),
    zero_ind_loops: Sequence[int] = (),
) -> Tuple[CircuitTopology, ZeroLimitRecord]:
    """Take the limit of vanishing node capacitance / loop inductance.

    ``zero_cap_nodes`` and ``zero_ind_loops`` are row/column indices of the
    topology.  A zero-capacitance node must carry no junction and a
    zero-inductance loop no phase slip (those limits are singular).  The
    affected capacitance/inductance entries are discarded, each vanishing
    loop pins the flux of one remaining node (and each vanishing node pins
    one loop charge) to an external drive value, and the irrotational gauge
    reallocates those drives into the tunneling-term phases plus dressed
    external offsets.
    """
    zc = sorted(set(int(i) for i in zero_cap_nodes))
    zl = sorted(set(int(i) for i in zero_ind_loops))
    n, l = topo.omega.shape
    if any(i < 0 or i >= n for i in zc) or any(i < 0 or i >= l for i in zl):
        raise QuantizeError("zero-element index out of range")
    rec_empty = ZeroLimitRecord((), (), (), (), np.zeros((0, 0)), np.zeros((0, 0)), np.zeros(0), np.zeros(0))
    if not zc and not zl:
        return topo, rec_empty

    for i in zc:
        if any(topo.a_j[i, jj] != 0 for jj in range(topo.num_junctions)):
            raise QuantizeError(
                f"node {i}: capacitance cannot vanish in parallel with a junction"
            )
    for i in zl:
        if any(topo.b_s[i, ss] != 0 for ss in range(topo.num_slips)):
            raise QuantizeError(
                f"loop {i}: inductance cannot vanish in series with a phase slip"
            )

    # The limit discards every capacitance entry of a vanishing node and
    # every inductance entry of a vanishing loop.
    c = topo.c.copy()
    l_mat = topo.l.copy()
    c[zc, :] = 0.0
    c[:, zc] = 0.0
    l_mat[zl, :] = 0.0
    l_mat[:, zl] = 0.0
    work = CircuitTopology(
        c=c, l=l_mat, a_j=topo.a_j, b_s=topo.b_s, omega=topo.omega,
        q_ext=topo.q_ext, phi_ext=topo.phi_ext, n0=topo.n0, m0=topo.m0,
        e_j=topo.e_j, e_s=topo.e_s,
        junction_phase=topo.junction_phase, slip_phase=topo.slip_phase,
    )

    u_total = UnimodularTransform.identity(n)
    w_total = UnimodularTransform.identity(l)

    def apply(u=None, w=None):
        nonlocal work, u_total, w_total
        uu = u or UnimodularTransform.identity(n)
        ww = w or UnimodularTransform.identity(l)
        work = apply_basis_change(work, uu, ww)
        u_total = uu.compose(u_total)
        w_total = ww.compose(w_total)

    # Normalize each vanishing loop column to a single +/-1 entry, pairing
    # it with one node whose flux it constrains.  A column touching any
    # zero-capacitance node pivots there (row ops with a zero-capacitance
    # row change nothing physical); otherwise the smallest remaining node
    # hosts the pivot.
    flux_pairs: List[Tuple[int, int]] = []
    charge_pairs: List[Tuple[int, int]] = []
    dropped_loops: List[int] = []
    dropped_nodes: List[int] = []
    for col in zl:
        nz = [i for i in range(n) if work.omega[i, col] != 0]
        if not nz:
            dropped_loops.append(col)
            continue
        zc_rows = [i for i in nz if i in zc]
        pivot_row = zc_rows[0] if zc_rows else nz[0]
        _om, u_op, w_op = _pivot_pair_rows(work.omega, pivot_row, col)
        apply(u=u_op, w=w_op)
        if pivot_row in zc:
            # both sides of the pair vanish; node and loop drop together
            dropped_loops.append(col)
            dropped_nodes.append(pivot_row)
        else:
            flux_pairs.append((pivot_row, col))

    # Normalize each remaining vanishing node row, pairing it with the loop
    # whose charge it constrains.
    for row in zc:
        if row in dropped_nodes:
            continue
        nz = [jcol for jcol in range(l) if work.omega[row, jcol] != 0]
        if not nz:
            dropped_nodes.append(row)
            continue
        col = nz[0]
        _om, w_op = col_pivot(work.omega, row, col)
        apply(w=w_op)
        _om, u_op = row_pivot(work.omega, row, col)
        apply(u=u_op)
        charge_pairs.append((col, row))

    # Constrained values: a vanishing loop's integrated equation pins the
    # paired node flux, a vanishing node's pins the paired loop charge.
    flux_nodes = [p for p, _ in flux_pairs]
    flux_cols = [cl for _, cl in flux_pairs]
    charge_loops = [q for q, _ in charge_pairs]
    charge_rows = [r for _, r in charge_pairs]
    sigma = np.array([work.omega[p, cl] for (p, cl) in flux_pairs], dtype=float)
    tau = np.array([work.omega[r, q] for (q, r) in charge_pairs], dtype=float)
    flux_drives = sigma * (FLUX_QUANTUM * work.m0[flux_cols] - work.phi_ext[flux_cols]) if flux_pairs else np.zeros(0)
    charge_drives = tau * (work.q_ext[charge_rows] - COOPER_PAIR_CHARGE * work.n0[charge_rows]) if charge_pairs else np.zeros(0)

    retained_n = [i for i in range(n) if i not in zc and i not in flux_nodes]
    retained_l = [i for i in range(l) if i not in zl and i not in charge_loops]

    c11 = work.c[np.ix_(retained_n, retained_n)]
    c14 = work.c[np.ix_(retained_n, flux_nodes)]
    l22 = work.l[np.ix_(retained_l, retained_l)]
    l23 = work.l[np.ix_(retained_l, charge_loops)]
    gamma = np.linalg.solve(c11, c14) if retained_n and flux_nodes else np.zeros((len(retained_n), len(flux_nodes)))
    lam = np.linalg.solve(l22, l23) if retained_l and charge_loops else np.zeros((len(retained_l), len(charge_loops)))

    a_1j = work.a_j.submatrix(retained_n, range(work.num_junctions)).to_numpy().astype(float)
    a_4j = work.a_j.submatrix(flux_nodes, range(work.num_junctions)).to_numpy().astype(float)
    b_2s = work.b_s.submatrix(retained_l, range(work.num_slips)).to_numpy().astype(float)
    b_3s = work.b_s.submatrix(charge_loops, range(work.num_slips)).to_numpy().astype(float)
    omega_12 = work.omega.submatrix(retained_n, retained_l)

    scale_j = 2.0 * np.pi / FLUX_QUANTUM
    scale_s = 2.0 * np.pi / COOPER_PAIR_CHARGE
    junction_phase = work.junction_phase + scale_j * ((a_4j.T - a_1j.T @ gamma) @ flux_drives)
    slip_phase = work.slip_phase + scale_s * ((b_3s.T - b_2s.T @ lam) @ charge_drives)

    omega_12_np = omega_12.to_numpy().astype(float)
    q_ext = work.q_ext[retained_n] + omega_12_np @ (lam @ charge_drives)
    phi_ext = work.phi_ext[retained_l] - omega_12_np.T @ (gamma @ flux_drives)

    out = CircuitTopology(
        c=c11,
        l=l22,
        a_j=work.a_j.submatrix(retained_n, range(work.num_junctions)),
        b_s=work.b_s.submatrix(retained_l, range(work.num_slips)),
        omega=omega_12,
        q_ext=q_ext,
        phi_ext=phi_ext,
        n0=work.n0[retained_n],
        m0=work.m0[retained_l],
        e_j=work.e_j,
        e_s=work.e_s,
        junction_phase=junction_phase,
        slip_phase=slip_phase,
    )
    record = ZeroLimitRecord(
        flux_pairs=tuple(flux_pairs),
        charge_pairs=tuple(charge_pairs),
        dropped_nodes=tuple(dropped_nodes),
        dropped_loops=tuple(dropped_loops),
        gamma=gamma,
        lam=lam,
        flux_drives=flux_drives,
        charge_drives=charge_drives,
        u=u_total,
        w=w_total,
    )
    return out, record
