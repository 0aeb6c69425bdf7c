"""Edge-basis circuits, structure-preserving transformations, and the
fundamental decomposition.

In the edge basis the dynamical variables are capacitive spanning-tree
branch fluxes (junction edges first) and inductive cotree branch charges
(phase-slip edges first); the junction incidence and slip loop matrices are
upper-identity and all topological content lives in the edge network
matrix.  Structure-preserving transformations (sign flips, same-kind
permutations, row pivots on linear-capacitor rows, column pivots on
linear-inductor columns) deform the circuit without touching the junction
fluxes or slip charges, and iterating them separates the harmonic and free
modes from the tunneling degrees of freedom.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import List, Optional, Tuple

import numpy as np

from .graphs import CircuitTopology, TreeCotree, apply_basis_change
from .intlin import (
    IntMatrix,
    UnimodularTransform,
    check_tu_sampled,
    col_pivot,
    invert_unimodular,
    row_pivot,
)
from .numeric import schur_complement


class DecomposeError(ValueError):
    pass


class UnsupportedSizeError(DecomposeError):
    """Orbit enumeration would be infeasible at this size."""


@dataclass(frozen=True)
class Step:
    """One recorded operation with the matrix it produced."""

    kind: str
    i: int
    j: int
    snapshot: IntMatrix


@dataclass(frozen=True)
class EdgeSystem:
    """Circuit in the capacitive-tree / inductive-cotree branch basis."""

    omega_e: IntMatrix
    j_count: int  # leading junction rows
    s_count: int  # leading phase-slip columns
    c: np.ndarray  # [F] edge-basis capacitance
    l: np.ndarray  # [H] edge-basis inductance
    q_ext: np.ndarray
    phi_ext: np.ndarray
    n0: np.ndarray
    m0: np.ndarray
    e_j: np.ndarray
    e_s: np.ndarray
    junction_phase: np.ndarray
    slip_phase: np.ndarray
    u_total: UnimodularTransform
    w_total: UnimodularTransform
    history: Tuple[Step, ...] = ()
    free_removed_rows: Tuple[int, ...] = ()  # u_total/w_total map the space after removal
    free_removed_cols: Tuple[int, ...] = ()

    @property
    def rows(self) -> int:
        return self.omega_e.rows

    @property
    def cols(self) -> int:
        return self.omega_e.cols

    def row_kind(self, i: int) -> str:
        return "junction" if i < self.j_count else "capacitor"

    def col_kind(self, j: int) -> str:
        return "phase_slip" if j < self.s_count else "inductor"

    def to_topology(self) -> CircuitTopology:
        n, l = self.omega_e.shape
        a_j = IntMatrix(
            [[1 if (i == jj and i < self.j_count) else 0 for jj in range(self.j_count)] for i in range(n)],
            shape=(n, self.j_count),
        )
        b_s = IntMatrix(
            [[1 if (i == ss and i < self.s_count) else 0 for ss in range(self.s_count)] for i in range(l)],
            shape=(l, self.s_count),
        )
        return CircuitTopology(
            c=self.c,
            l=self.l,
            a_j=a_j,
            b_s=b_s,
            omega=self.omega_e,
            q_ext=self.q_ext,
            phi_ext=self.phi_ext,
            n0=self.n0,
            m0=self.m0,
            e_j=self.e_j,
            e_s=self.e_s,
            junction_phase=self.junction_phase,
            slip_phase=self.slip_phase,
        )


def to_edge_basis(topo: CircuitTopology, tc: TreeCotree) -> EdgeSystem:
    """Change basis to tree/cotree branch variables.

    Applies the inverse tree incidence matrix on the node side and the
    inverse cotree loop matrix on the loop side; afterwards the junction and
    slip matrices are upper-identity.
    """
    n, l = topo.omega.shape
    if tc.a_ct.shape != (n, n) or tc.b_lt.shape != (l, l):
        raise DecomposeError("tree/cotree dimensions do not match the topology")
    j_count = topo.num_junctions
    s_count = topo.num_slips
    for jj in range(j_count):
        if any(tc.a_ct[i, jj] != topo.a_j[i, jj] for i in range(n)):
            raise DecomposeError("first tree columns must equal the junction incidence matrix")
    for ss in range(s_count):
        if any(tc.b_lt[i, ss] != topo.b_s[i, ss] for i in range(l)):
            raise DecomposeError("first cotree columns must equal the slip loop matrix")
    u = UnimodularTransform(invert_unimodular(tc.a_ct), tc.a_ct) if n else UnimodularTransform.identity(0)
    w = UnimodularTransform(invert_unimodular(tc.b_lt), tc.b_lt) if l else UnimodularTransform.identity(0)
    moved = apply_basis_change(topo, u, w)
    expected_aj = IntMatrix(
        [[1 if (i == jj and i < j_count) else 0 for jj in range(j_count)] for i in range(n)],
        shape=(n, j_count),
    )
    if moved.a_j != expected_aj:
        raise DecomposeError("tree change of basis failed to reduce the junction incidence")
    return EdgeSystem(
        omega_e=moved.omega,
        j_count=j_count,
        s_count=s_count,
        c=moved.c,
        l=moved.l,
        q_ext=moved.q_ext,
        phi_ext=moved.phi_ext,
        n0=moved.n0,
        m0=moved.m0,
        e_j=moved.e_j,
        e_s=moved.e_s,
        junction_phase=moved.junction_phase,
        slip_phase=moved.slip_phase,
        u_total=UnimodularTransform.identity(n),
        w_total=UnimodularTransform.identity(l),
        history=(Step("initial", -1, -1, moved.omega),),
    )


def _transformed(es: EdgeSystem, u: Optional[UnimodularTransform], w: Optional[UnimodularTransform], step: Step) -> EdgeSystem:
    n, l = es.omega_e.shape
    uu = u or UnimodularTransform.identity(n)
    ww = w or UnimodularTransform.identity(l)
    topo = apply_basis_change(es.to_topology(), uu, ww)
    return replace(
        es,
        omega_e=topo.omega,
        c=topo.c,
        l=topo.l,
        q_ext=topo.q_ext,
        phi_ext=topo.phi_ext,
        n0=topo.n0,
        m0=topo.m0,
        u_total=uu.compose(es.u_total),
        w_total=ww.compose(es.w_total),
        history=es.history + (replace(step, snapshot=topo.omega),),
    )


def _perm_transform(size: int, i: int, j: int) -> UnimodularTransform:
    rows = [[1 if (r == c and r not in (i, j)) or (r, c) in ((i, j), (j, i)) else 0 for c in range(size)] for r in range(size)]
    m = IntMatrix(rows, shape=(size, size))
    return UnimodularTransform(m, m)


def _sign_transform(size: int, i: int) -> UnimodularTransform:
    rows = [[(-1 if r == i else 1) if r == c else 0 for c in range(size)] for r in range(size)]
    m = IntMatrix(rows, shape=(size, size))
    return UnimodularTransform(m, m)


def structure_preserving_step(es: EdgeSystem, kind: str, i: int, j: int = -1) -> EdgeSystem:
    """Apply one structure-preserving operation.

    Kinds: ``sign_flip_row`` / ``sign_flip_col`` (index ``i``),
    ``permute_rows`` / ``permute_cols`` (indices ``i``, ``j``; same kind
    class only), ``row_pivot`` / ``col_pivot`` (pivot entry ``(i, j)``; row
    pivots need a linear-capacitor pivot row, column pivots a
    linear-inductor pivot column, so junction fluxes and slip charges stay
    untouched).
    """
    n, l = es.omega_e.shape
    step = Step(kind, i, j, es.omega_e)
    if kind == "sign_flip_row":
        return _transformed(es, _sign_transform(n, i), None, step)
    if kind == "sign_flip_col":
        return _transformed(es, None, _sign_transform(l, i), step)
    if kind == "permute_rows":
        if es.row_kind(i) != es.row_kind(j):
            raise DecomposeError("row permutation must stay within one edge kind")
        return _transformed(es, _perm_transform(n, i, j), None, step)
    if kind == "permute_cols":
        if es.col_kind(i) != es.col_kind(j):
            raise DecomposeError("column permutation must stay within one edge kind")
        return _transformed(es, None, _perm_transform(l, i, j), step)
    if kind == "row_pivot":
        if es.row_kind(i) != "capacitor":
            raise DecomposeError("row pivots are only allowed on linear-capacitor rows")
        _, u = row_pivot(es.omega_e, i, j)
        return _transformed(es, u, None, step)
    if kind == "col_pivot":
        if es.col_kind(j) != "inductor":
            raise DecomposeError("column pivots are only allowed on linear-inductor columns")
        _, w = col_pivot(es.omega_e, i, j)
        return _transformed(es, None, w, step)
    raise DecomposeError(f"unknown operation kind {kind!r}")


@dataclass(frozen=True)
class FundamentalForm:
    """Block decomposition read off the fundamentally decomposed matrix."""

    j: int
    s: int
    f: int
    p: int
    r: int
    alpha: int
    beta: int
    omega_js: IntMatrix
    omega_jf: IntMatrix
    omega_ps: IntMatrix
    free_modes_removed: bool
    row_order: Tuple[int, ...] = ()
    col_order: Tuple[int, ...] = ()

    def __post_init__(self):
        if self.f > self.j:
            raise DecomposeError("more independent inductor branches than junctions")
        if self.p > self.s:
            raise DecomposeError("more independent capacitor branches than phase slips")

    def block_matrix(self) -> IntMatrix:
        """The matrix in canonical block order (junction/p/r rows; slip/f/r
        columns)."""
        js, jf, ps = self.omega_js, self.omega_jf, self.omega_ps
        rows = []
        for i in range(self.j):
            rows.append([js[i, c] for c in range(self.s)] + [jf[i, c] for c in range(self.f)] + [0] * self.r)
        for i in range(self.p):
            rows.append([ps[i, c] for c in range(self.s)] + [0] * (self.f + self.r))
        for i in range(self.r):
            rows.append([0] * (self.s + self.f) + [1 if c == i else 0 for c in range(self.r)])
        return IntMatrix(rows, shape=(self.j + self.p + self.r, self.s + self.f + self.r))


def _independent_rows(rows: List[List[int]]) -> List[int]:
    """Greedy maximal independent subset (smallest indices first)."""
    kept: List[int] = []
    basis: List[List[Fraction]] = []
    for idx, row in enumerate(rows):
        vec = [Fraction(v) for v in row]
        for b in basis:
            lead = next((c for c, v in enumerate(b) if v != 0), None)
            if lead is not None and vec[lead] != 0:
                f = vec[lead] / b[lead]
                vec = [a - f * bb for a, bb in zip(vec, b)]
        if any(v != 0 for v in vec):
            kept.append(idx)
            basis.append(vec)
    return kept


def _integer_combination(target: List[int], rows: List[List[int]]) -> List[int]:
    """Solve target = sum c_k rows[k] with integer coefficients (exact)."""
    if not rows:
        raise DecomposeError("no basis rows for dependent-row elimination")
    m = len(rows)
    ncols = len(target)
    # Solve the least-squares-free exact system via Gaussian elimination on
    # the transposed stack.
    aug = [[Fraction(rows[k][c]) for k in range(m)] + [Fraction(target[c])] for c in range(ncols)]
    pivots = []
    r = 0
    for col in range(m):
        piv = next((i for i in range(r, ncols) if aug[i][col] != 0), None)
        if piv is None:
            continue
        aug[r], aug[piv] = aug[piv], aug[r]
        inv = 1 / aug[r][col]
        aug[r] = [v * inv for v in aug[r]]
        for i in range(ncols):
            if i != r and aug[i][col] != 0:
                f = aug[i][col]
                aug[i] = [v - f * w for v, w in zip(aug[i], aug[r])]
        pivots.append(col)
        r += 1
    coeffs = [Fraction(0)] * m
    for row_i, col in enumerate(pivots):
        coeffs[col] = aug[row_i][m]
    for i in range(r, ncols):
        if aug[i][m] != 0:
            raise DecomposeError("row is not in the span of the kept rows")
    out = []
    for v in coeffs:
        if v.denominator != 1:
            raise DecomposeError("dependent-row coefficients are not integers")
        out.append(int(v))
    return out


def _eliminate_free_edges(es: EdgeSystem, drop_rows: List[int], drop_cols: List[int]) -> EdgeSystem:
    """Remove zero rows/columns (free modes), Schur-reducing C and L."""
    n, l = es.omega_e.shape
    keep_n = [i for i in range(n) if i not in drop_rows]
    keep_l = [i for i in range(l) if i not in drop_cols]

    def dressed(mat, vec, keep, drop):
        if not drop:
            return vec[keep]
        m_ra = mat[np.ix_(keep, drop)]
        m_aa = mat[np.ix_(drop, drop)]
        return vec[keep] - m_ra @ np.linalg.solve(m_aa, vec[drop])

    step = Step("free_removal", -1, -1, es.omega_e.submatrix(keep_n, keep_l))
    return replace(
        es,
        omega_e=es.omega_e.submatrix(keep_n, keep_l),
        c=schur_complement(es.c, keep_n) if n else es.c,
        l=schur_complement(es.l, keep_l) if l else es.l,
        q_ext=dressed(es.c, es.q_ext, keep_n, drop_rows),
        phi_ext=dressed(es.l, es.phi_ext, keep_l, drop_cols),
        n0=dressed(es.c, es.n0, keep_n, drop_rows),
        m0=dressed(es.l, es.m0, keep_l, drop_cols),
        u_total=UnimodularTransform.identity(len(keep_n)),  # dimensions change; history resets
        w_total=UnimodularTransform.identity(len(keep_l)),
        history=es.history + (step,),
        free_removed_rows=tuple(drop_rows),
        free_removed_cols=tuple(drop_cols),
    )


def fundamental_decomposition(es: EdgeSystem) -> Tuple[EdgeSystem, FundamentalForm]:
    """Reduce an edge system to its simplest equivalent form.

    Phase 1 pivots harmonic pairs out of the linear-capacitor x
    linear-inductor block (column pivot then row pivot at each chosen
    entry, smallest indices first); phase 2 zeroes linearly dependent
    linear-capacitor rows against the slip columns and dependent
    linear-inductor columns against the junction rows; phase 3 removes the
    resulting free modes; finally signs are normalized.  The returned
    matrix keeps the working row/column order -- the block view lives in
    the :class:`FundamentalForm`.
    """
    work = es
    n, l = work.omega_e.shape
    j_count, s_count = work.j_count, work.s_count

    # Phase 1: harmonic pivots in the capacitor/inductor block.
    used_rows: List[int] = []
    used_cols: List[int] = []
    while True:
        target = None
        for i in range(j_count, n):
            if i in used_rows:
                continue
            for jj in range(s_count, l):
                if jj in used_cols:
                    continue
                if work.omega_e[i, jj] != 0:
                    target = (i, jj)
                    break
            if target:
                break
        if target is None:
            break
        i, jj = target
        if any(work.omega_e[i, c] != 0 for c in range(l) if c != jj):
            work = structure_preserving_step(work, "col_pivot", i, jj)
        if any(work.omega_e[r, jj] != 0 for r in range(n) if r != i):
            work = structure_preserving_step(work, "row_pivot", i, jj)
        used_rows.append(i)
        used_cols.append(jj)

    # Phase 2a: dependent linear-capacitor rows against slip columns.
    cand_rows = [i for i in range(j_count, n) if i not in used_rows]
    row_vecs = [[work.omega_e[i, c] for c in range(s_count)] for i in cand_rows]
    nonzero_rows = [idx for idx, vec in enumerate(row_vecs) if any(vec)]
    kept_local = _independent_rows([row_vecs[i] for i in nonzero_rows])
    kept_rows = [cand_rows[nonzero_rows[i]] for i in kept_local]
    for pos, idx in enumerate(nonzero_rows):
        i = cand_rows[idx]
        if i in kept_rows:
            continue
        coeffs = _integer_combination(row_vecs[idx], [[work.omega_e[k, c] for c in range(s_count)] for k in kept_rows])
        u_rows = [[1 if r == c else 0 for c in range(n)] for r in range(n)]
        for k_row, coeff in zip(kept_rows, coeffs):
            u_rows[i][k_row] = -coeff
        u = IntMatrix(u_rows, shape=(n, n))
        u_inv = [[1 if r == c else 0 for c in range(n)] for r in range(n)]
        for k_row, coeff in zip(kept_rows, coeffs):
            u_inv[i][k_row] = coeff
        work = _transformed(
            work,
            UnimodularTransform(u, IntMatrix(u_inv, shape=(n, n))),
            None,
            Step("zero_dependent_row", i, -1, work.omega_e),
        )

    # Phase 2b: dependent linear-inductor columns against junction rows.
    cand_cols = [c for c in range(s_count, l) if c not in used_cols]
    col_vecs = [[work.omega_e[r, c] for r in range(j_count)] for c in cand_cols]
    nonzero_cols = [idx for idx, vec in enumerate(col_vecs) if any(vec)]
    kept_local_c = _independent_rows([col_vecs[i] for i in nonzero_cols])
    kept_cols = [cand_cols[nonzero_cols[i]] for i in kept_local_c]
    for idx in nonzero_cols:
        c = cand_cols[idx]
        if c in kept_cols:
            continue
        coeffs = _integer_combination(col_vecs[idx], [[work.omega_e[r, k] for r in range(j_count)] for k in kept_cols])
        w_rows = [[1 if r == cc else 0 for cc in range(l)] for r in range(l)]
        for k_col, coeff in zip(kept_cols, coeffs):
            w_rows[c][k_col] = -coeff
        w = IntMatrix(w_rows, shape=(l, l))
        w_inv = [[1 if r == cc else 0 for cc in range(l)] for r in range(l)]
        for k_col, coeff in zip(kept_cols, coeffs):
            w_inv[c][k_col] = coeff
        work = _transformed(
            work,
            None,
            UnimodularTransform(w, IntMatrix(w_inv, shape=(l, l))),
            Step("zero_dependent_col", -1, c, work.omega_e),
        )

    # Phase 3: free modes are the all-zero capacitor rows / inductor cols.
    free_rows = [
        i for i in range(j_count, n)
        if all(work.omega_e[i, c] == 0 for c in range(l))
    ]
    free_cols = [
        c for c in range(s_count, l)
        if all(work.omega_e[r, c] == 0 for r in range(n))
    ]
    alpha, beta = len(free_rows), len(free_cols)
    if free_rows or free_cols:
        used_rows = [i - sum(1 for fr in free_rows if fr < i) for i in used_rows]
        used_cols = [c - sum(1 for fc in free_cols if fc < c) for c in used_cols]
        kept_rows = [i - sum(1 for fr in free_rows if fr < i) for i in kept_rows]
        kept_cols = [c - sum(1 for fc in free_cols if fc < c) for c in kept_cols]
        work = _eliminate_free_edges(work, free_rows, free_cols)
        n, l = work.omega_e.shape

    # Phase 4: sign normalization -- harmonic pivots to +1 via column flips,
    # remaining inductor columns and capacitor rows to a positive leading
    # entry.
    for i, jj in zip(used_rows, used_cols):
        if work.omega_e[i, jj] < 0:
            work = structure_preserving_step(work, "sign_flip_col", jj)
    for c in kept_cols:
        lead = next((work.omega_e[r, c] for r in range(n) if work.omega_e[r, c] != 0), 0)
        if lead < 0:
            work = structure_preserving_step(work, "sign_flip_col", c)
    for i in kept_rows:
        lead = next((work.omega_e[i, c] for c in range(l) if work.omega_e[i, c] != 0), 0)
        if lead < 0:
            work = structure_preserving_step(work, "sign_flip_row", i)

    row_order = list(range(j_count)) + kept_rows + used_rows
    col_order = list(range(s_count)) + kept_cols + used_cols
    f, p, r = len(kept_cols), len(kept_rows), len(used_rows)
    omega_js = work.omega_e.submatrix(range(j_count), range(s_count))
    omega_jf = work.omega_e.submatrix(range(j_count), kept_cols)
    omega_ps = work.omega_e.submatrix(kept_rows, range(s_count))
    ff = FundamentalForm(
        j=j_count,
        s=s_count,
        f=f,
        p=p,
        r=r,
        alpha=alpha,
        beta=beta,
        omega_js=omega_js,
        omega_jf=omega_jf,
        omega_ps=omega_ps,
        free_modes_removed=True,
        row_order=tuple(row_order),
        col_order=tuple(col_order),
    )
    reordered = work.omega_e.submatrix(row_order, col_order)
    if reordered != ff.block_matrix():
        raise DecomposeError("fundamental form blocks are inconsistent")  # pragma: no cover
    if not check_tu_sampled(work.omega_e):
        raise DecomposeError("decomposed matrix lost total unimodularity")  # pragma: no cover
    return work, ff


def to_node_basis(es: EdgeSystem, a_new: IntMatrix) -> CircuitTopology:
    """Return to a node/loop description using the incidence matrix ``a_new``.

    ``a_new`` must be square, unimodular, with incidence-style columns (at
    most one +1 and one -1); the resulting node-loop matrix must stay in
    the -1/0/+1 range or the incidence choice is inconsistent with the
    cutset/loop topology.
    """
    n = es.rows
    if a_new.shape != (n, n):
        raise DecomposeError(f"incidence matrix must be {n}x{n}")
    if a_new.det() not in (-1, 1):
        raise DecomposeError("incidence matrix must have determinant +/-1")
    for c in range(n):
        col = [a_new[r, c] for r in range(n)]
        if any(v not in (-1, 0, 1) for v in col) or col.count(1) > 1 or col.count(-1) > 1:
            raise DecomposeError(f"column {c} is not an incidence column")
    omega_node = a_new @ es.omega_e
    if not omega_node.entries_in_unit_range():
        raise DecomposeError(
            "incidence matrix violates the cutset/loop orthogonality of this circuit"
        )
    topo = es.to_topology()
    u = UnimodularTransform(a_new, invert_unimodular(a_new))
    w = UnimodularTransform.identity(es.cols)
    return apply_basis_change(topo, u, w)


# ---------------------------------------------------------------------------
# Classification


@dataclass(frozen=True)
class ClassSignature:
    """Canonical representative of a fundamental form's equivalence class."""

    junction_count: int
    harmonic_count: int
    omega_jf: Tuple[Tuple[int, ...], ...]
    omega_js: Tuple[Tuple[int, ...], ...] = ()
    omega_ps: Tuple[Tuple[int, ...], ...] = ()

    def to_dict(self) -> dict:
        return {
            "junctions": self.junction_count,
            "harmonic_modes": self.harmonic_count,
            "omega_jf": [list(r) for r in self.omega_jf],
            "omega_js": [list(r) for r in self.omega_js],
            "omega_ps": [list(r) for r in self.omega_ps],
        }


_ORBIT_CAP = 3


def _matrix_key(rows: Tuple[Tuple[int, ...], ...]) -> Tuple:
    return rows


def _as_rows(m: List[List[int]]) -> Tuple[Tuple[int, ...], ...]:
    return tuple(tuple(r) for r in m)


def _orbit_canonical_jf(omega_jf: IntMatrix) -> Tuple[Tuple[int, ...], ...]:
    """Lexicographically smallest matrix over the structure group.

    Generators: junction-row signed permutations, inductor-column signed
    permutations, and elementary column operations (adding one column to
    another with either sign) kept only when the result is still a network
    matrix.  Elementary operations come in inverse pairs, so reachability is
    a genuine equivalence.
    """
    j, f = omega_jf.shape
    if j > _ORBIT_CAP or f > _ORBIT_CAP:
        raise UnsupportedSizeError(f"classification supports up to {_ORBIT_CAP} junctions/inductors")
    start = _as_rows(omega_jf.to_lists())
    seen = {start}
    frontier = [start]
    while frontier:
        new_frontier = []
        for state in frontier:
            mat = [list(r) for r in state]
            candidates = []
            for a in range(j):
                for b in range(a + 1, j):
                    m2 = [row[:] for row in mat]
                    m2[a], m2[b] = m2[b], m2[a]
                    candidates.append(m2)
            for a in range(f):
                for b in range(a + 1, f):
                    m2 = [row[:] for row in mat]
                    for row in m2:
                        row[a], row[b] = row[b], row[a]
                    candidates.append(m2)
            for a in range(j):
                candidates.append([[-v for v in row] if ri == a else row[:] for ri, row in enumerate(mat)])
            for a in range(f):
                candidates.append([[(-v if ci == a else v) for ci, v in enumerate(row)] for row in mat])
            for dst in range(f):
                for src in range(f):
                    if dst == src:
                        continue
                    for sign in (1, -1):
                        m2 = [row[:] for row in mat]
                        ok = True
                        for row in m2:
                            row[dst] += sign * row[src]
                            if row[dst] not in (-1, 0, 1):
                                ok = False
                                break
                        if ok:
                            candidates.append(m2)
            for m2 in candidates:
                key = _as_rows(m2)
                if key in seen:
                    continue
                if len(m2) and len(m2[0]) and not check_tu_sampled(IntMatrix(m2, shape=(j, f))):
                    continue
                seen.add(key)
                new_frontier.append(key)
        frontier = new_frontier
    return min(seen)


def canonical_signature(ff: FundamentalForm) -> ClassSignature:
    """Canonical class representative of a fundamental form.

    For junction-only circuits this is the lexicographically smallest
    junction/inductor block over the allowed transformation group
    (exhaustive orbit enumeration; sizes above 3 are rejected).
    """
    if ff.s == 0:
        canon = _orbit_canonical_jf(ff.omega_jf)
        return ClassSignature(junction_count=ff.j, harmonic_count=ff.r, omega_jf=canon)
    if max(ff.j, ff.s, ff.f, ff.p) > _ORBIT_CAP:
        raise UnsupportedSizeError("classification with phase slips supports sizes up to 3")
    canon = _orbit_canonical_triple(ff)
    return ClassSignature(
        junction_count=ff.j,
        harmonic_count=ff.r,
        omega_jf=canon[1],
        omega_js=canon[0],
        omega_ps=canon[2],
    )


def _orbit_canonical_triple(ff: FundamentalForm):
    """Canonical (omega_js, omega_jf, omega_ps) over the structure group.

    Generators: signed permutations of junction rows, slip columns, extra
    capacitor rows and extra inductor columns, plus elementary operations
    adding an extra-capacitor row into any row and an extra-inductor column
    into any column (either sign).  Elementary operations come in inverse
    pairs; candidates must stay totally unimodular as a composite matrix.
    """
    j, s, f, p = ff.j, ff.s, ff.f, ff.p
    start = (
        _as_rows(ff.omega_js.to_lists()),
        _as_rows(ff.omega_jf.to_lists()),
        _as_rows(ff.omega_ps.to_lists()),
    )

    def unpack(state):
        return ([list(r) for r in state[0]], [list(r) for r in state[1]], [list(r) for r in state[2]])

    def pack(js, jf, ps):
        return (_as_rows(js), _as_rows(jf), _as_rows(ps))

    def valid(state) -> bool:
        if any(v not in (-1, 0, 1) for block in state for r in block for v in r):
            return False
        js, jf, ps = state
        rows = [list(js[i]) + list(jf[i]) for i in range(j)]
        rows += [list(ps[i]) + [0] * f for i in range(p)]
        if not rows or not rows[0]:
            return True
        return check_tu_sampled(IntMatrix(rows, shape=(j + p, s + f)))

    seen = {start}
    rejected = set()
    frontier = [start]
    while frontier:
        new_frontier = []
        for state in frontier:
            candidates = []
            js, jf, ps = unpack(state)
            for a in range(j):
                for b in range(a + 1, j):
                    js2, jf2 = [r[:] for r in js], [r[:] for r in jf]
                    js2[a], js2[b] = js2[b], js2[a]
                    jf2[a], jf2[b] = jf2[b], jf2[a]
                    candidates.append(pack(js2, jf2, ps))
            for a in range(j):
                js2 = [([-v for v in r] if ri == a else r[:]) for ri, r in enumerate(js)]
                jf2 = [([-v for v in r] if ri == a else r[:]) for ri, r in enumerate(jf)]
                candidates.append(pack(js2, jf2, ps))
            for a in range(s):
                for b in range(a + 1, s):
                    js2 = [r[:] for r in js]
                    ps2 = [r[:] for r in ps]
                    for r in js2 + ps2:
                        r[a], r[b] = r[b], r[a]
                    candidates.append(pack(js2, jf, ps2))
            for a in range(s):
                js2 = [[(-v if ci == a else v) for ci, v in enumerate(r)] for r in js]
                ps2 = [[(-v if ci == a else v) for ci, v in enumerate(r)] for r in ps]
                candidates.append(pack(js2, jf, ps2))
            for a in range(p):
                for b in range(a + 1, p):
                    ps2 = [r[:] for r in ps]
                    ps2[a], ps2[b] = ps2[b], ps2[a]
                    candidates.append(pack(js, jf, ps2))
            for a in range(p):
                ps2 = [([-v for v in r] if ri == a else r[:]) for ri, r in enumerate(ps)]
                candidates.append(pack(js, jf, ps2))
            for a in range(f):
                for b in range(a + 1, f):
                    jf2 = [r[:] for r in jf]
                    for r in jf2:
                        r[a], r[b] = r[b], r[a]
                    candidates.append(pack(js, jf2, ps))
            for a in range(f):
                jf2 = [[(-v if ci == a else v) for ci, v in enumerate(r)] for r in jf]
                candidates.append(pack(js, jf2, ps))
            # extra-capacitor row into any row (U_JC' and U_C'C' blocks)
            for src in range(p):
                for sign in (1, -1):
                    for dst in range(j):
                        js2 = [r[:] for r in js]
                        js2[dst] = [v + sign * w for v, w in zip(js2[dst], ps[src])]
                        candidates.append(pack(js2, jf, ps))
                    for dst in range(p):
                        if dst == src:
                            continue
                        ps2 = [r[:] for r in ps]
                        ps2[dst] = [v + sign * w for v, w in zip(ps2[dst], ps[src])]
                        candidates.append(pack(js, jf, ps2))
            # extra-inductor column into any column (W_SL' and W_L'L' blocks)
            for src in range(f):
                for sign in (1, -1):
                    for dst in range(s):
                        js2 = [r[:] for r in js]
                        for ri in range(j):
                            js2[ri][dst] += sign * jf[ri][src]
                        candidates.append(pack(js2, jf, ps))
                    for dst in range(f):
                        if dst == src:
                            continue
                        jf2 = [r[:] for r in jf]
                        for ri in range(j):
                            jf2[ri][dst] += sign * jf[ri][src]
                        candidates.append(pack(js, jf2, ps))
            for key in candidates:
                if key in seen or key in rejected:
                    continue
                if not valid(key):
                    rejected.add(key)
                    continue
                seen.add(key)
                new_frontier.append(key)
        frontier = new_frontier
    return min(seen)


def enumerate_junction_classes(j: int) -> List[Tuple[Tuple[int, ...], ...]]:
    """All equivalence classes of junction-only fundamental forms with ``j``
    junctions (harmonic modes excluded), as canonical matrices."""
    if j > _ORBIT_CAP:
        raise UnsupportedSizeError(f"enumeration supports up to {_ORBIT_CAP} junctions")
    classes = set()
    for f in range(0, j + 1):
        if f == 0:
            classes.add(())
            continue
        entries = list(itertools.product((-1, 0, 1), repeat=j * f))
        for flat in entries:
            rows = [list(flat[i * f : (i + 1) * f]) for i in range(j)]
            m = IntMatrix(rows, shape=(j, f))
            if m.rank() < f:
                continue
            if not check_tu_sampled(m):
                continue
            classes.add(_orbit_canonical_jf(m))
    return sorted(classes)
