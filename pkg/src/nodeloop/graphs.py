"""Circuit graphs: branch netlists, node/loop system matrices, tree-cotree.

A circuit is modeled as capacitive nodes (node 0 is ground) joined by
capacitive branches, plus inductive branches whose independent loops close
through the capacitive network.  Josephson junctions are capacitive branches
with Cooper-pair tunneling; phase-slip wires are inductive branches with
fluxon tunneling.  The assembled system is a :class:`CircuitTopology`
holding the capacitance matrix, loop inductance matrix, the junction
incidence / slip loop matrices and the node-loop network matrix.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from .intlin import IntMatrix, UnimodularTransform, complete_to_unimodular
from .numeric import cholesky_pd_check

CAPACITIVE_KINDS = ("josephson", "capacitor")
INDUCTIVE_KINDS = ("phase_slip", "inductor")


class NetlistError(ValueError):
    """Malformed or physically inadmissible netlist."""


class TopologyError(ValueError):
    """Assembled system violates a structural requirement."""


@dataclass(frozen=True)
class Branch:
    kind: str
    node_from: int
    node_to: int
    value: float = 0.0  # capacitance [F] or inductance [H]
    energy: float = 0.0  # tunneling energy E_J or E_S [J]
    label: str = ""

    def endpoints(self) -> Tuple[int, int]:
        return (self.node_from, self.node_to)


@dataclass(frozen=True)
class BranchNetlist:
    """Branch-level circuit description.

    Branch values are SI.  Josephson branches carry their intrinsic parallel
    capacitance in ``value``; phase-slip branches carry their intrinsic
    series inductance in ``value``.  ``mutuals`` couple pairs of inductive
    branches by label.  External charge/trapped charge are keyed by node,
    external flux/trapped flux by the inductive branch whose loop they
    thread.
    """

    branches: Tuple[Branch, ...]
    mutuals: Tuple[Tuple[str, str, float], ...] = ()
    external_charge: Dict[int, float] = field(default_factory=dict)
    external_flux: Dict[str, float] = field(default_factory=dict)
    trapped_charge: Dict[int, float] = field(default_factory=dict)
    trapped_flux: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        labels = set()
        for b in self.branches:
            if b.kind not in CAPACITIVE_KINDS + INDUCTIVE_KINDS:
                raise NetlistError(f"unknown branch kind {b.kind!r}")
            if b.label and b.label in labels:
                raise NetlistError(f"duplicate branch label {b.label!r}")
            labels.add(b.label)
            if b.kind in CAPACITIVE_KINDS and b.node_from == b.node_to:
                raise NetlistError(f"capacitive branch {b.label!r} is a self-loop")
            if b.value <= 0.0:
                article = {
                    "josephson": "intrinsic parallel capacitance",
                    "phase_slip": "intrinsic series inductance",
                    "capacitor": "capacitance",
                    "inductor": "inductance",
                }[b.kind]
                raise NetlistError(f"branch {b.label!r}: {article} must be positive")
        by_label = {b.label: b for b in self.branches if b.label}
        for la, lb, _m in self.mutuals:
            for name in (la, lb):
                if name not in by_label or by_label[name].kind not in INDUCTIVE_KINDS:
                    raise NetlistError(f"mutual references unknown inductive branch {name!r}")
            if la == lb:
                raise NetlistError("mutual inductance requires two distinct branches")

    @property
    def capacitive_branches(self) -> List[Branch]:
        return [b for b in self.branches if b.kind in CAPACITIVE_KINDS]

    @property
    def inductive_branches(self) -> List[Branch]:
        return [b for b in self.branches if b.kind in INDUCTIVE_KINDS]


def _branch_from_dict(i: int, d: dict) -> Branch:
    kind = d.get("kind")
    label = d.get("label", f"b{i}")
    try:
        nf, nt = int(d["from"]), int(d["to"])
    except KeyError as exc:
        raise NetlistError(f"branch {label!r} missing endpoint {exc}") from None
    if kind == "josephson":
        return Branch("josephson", nf, nt, value=float(d["cj"]), energy=float(d["ej"]), label=label)
    if kind == "phase_slip":
        return Branch("phase_slip", nf, nt, value=float(d["ls"]), energy=float(d["es"]), label=label)
    if kind in ("capacitor", "inductor"):
        return Branch(kind, nf, nt, value=float(d["value"]), label=label)
    raise NetlistError(f"unknown branch kind {kind!r}")


def netlist_from_dict(data: dict) -> BranchNetlist:
    branches = []
    mutuals = []
    for i, d in enumerate(data.get("branches", [])):
        if d.get("kind") == "mutual":
            a, b = d["between"]
            mutuals.append((str(a), str(b), float(d["value"])))
        else:
            branches.append(_branch_from_dict(i, d))
    ext = data.get("external", {})
    return BranchNetlist(
        branches=tuple(branches),
        mutuals=tuple(mutuals),
        external_charge={int(k): float(v) for k, v in ext.get("charge", {}).items()},
        external_flux={str(k): float(v) for k, v in ext.get("flux", {}).items()},
        trapped_charge={int(k): float(v) for k, v in ext.get("trapped_charge", {}).items()},
        trapped_flux={str(k): float(v) for k, v in ext.get("trapped_flux", {}).items()},
    )


def load_netlist(path: str) -> "BranchNetlist | CircuitTopology":
    """Load a netlist JSON file; returns a topology directly for matrix form."""
    with open(path) as fh:
        data = json.load(fh)
    if "matrix_form" in data:
        return CircuitTopology.from_dict(data["matrix_form"])
    return netlist_from_dict(data)


@dataclass(frozen=True)
class LoopSpec:
    """One fundamental loop: the defining cotree branch plus its closure path."""

    cotree_label: str
    members: Tuple[Tuple[str, int], ...]  # (branch label, orientation) pairs
    tail_node: int  # capacitive node the loop leaves (0 if ground / none)
    tip_node: int  # capacitive node the loop enters


@dataclass(frozen=True)
class Provenance:
    """Branch-level data retained by :func:`build_topology` for reporting and
    deterministic tree selection."""

    cap_nodes: Tuple[int, ...]  # non-ground capacitive node labels, ascending
    junction_edges: Tuple[Tuple[int, int], ...]
    capacitor_edges: Tuple[Tuple[int, int], ...]
    loops: Tuple[LoopSpec, ...]


@dataclass(frozen=True)
class CircuitTopology:
    """Node/loop system: all quantities of the equations of motion.

    ``c`` couples node voltages to node charges; ``l`` couples loop currents
    to loop fluxes.  ``a_j`` (junction incidence), ``b_s`` (slip loop matrix)
    and ``omega`` (node-loop network matrix) carry the integer topology.
    ``junction_phase`` / ``slip_phase`` are constant offsets [rad] added to
    the tunneling sine arguments; they are produced by zero-element limits.
    """

    c: np.ndarray  # [F], n x n
    l: np.ndarray  # [H], l x l
    a_j: IntMatrix  # n x J
    b_s: IntMatrix  # l x S
    omega: IntMatrix  # n x l
    q_ext: np.ndarray  # [C], n
    phi_ext: np.ndarray  # [Wb], l
    n0: np.ndarray  # [-], n (integer unless dressed by free-mode removal)
    m0: np.ndarray  # [-], l
    e_j: np.ndarray  # [J], J
    e_s: np.ndarray  # [J], S
    junction_phase: np.ndarray = None  # [rad], J
    slip_phase: np.ndarray = None  # [rad], S
    provenance: Optional[Provenance] = None

    def __post_init__(self):
        n, l = self.omega.shape

        def frozen(v, *shape):
            arr = np.zeros(shape) if v is None else np.array(v, dtype=float).reshape(*shape)
            arr.setflags(write=False)
            return arr

        object.__setattr__(self, "c", frozen(self.c, n, n))
        object.__setattr__(self, "l", frozen(self.l, l, l))
        for name, size in (("q_ext", n), ("phi_ext", l), ("n0", n), ("m0", l)):
            object.__setattr__(self, name, frozen(getattr(self, name), size))
        object.__setattr__(self, "e_j", frozen(self.e_j, self.num_junctions))
        object.__setattr__(self, "e_s", frozen(self.e_s, self.num_slips))
        object.__setattr__(self, "junction_phase", frozen(self.junction_phase, self.num_junctions))
        object.__setattr__(self, "slip_phase", frozen(self.slip_phase, self.num_slips))
        if self.a_j.rows != n or self.b_s.rows != l:
            raise TopologyError("incidence/loop matrix row counts do not match omega")

    @property
    def num_nodes(self) -> int:
        return self.omega.rows

    @property
    def num_loops(self) -> int:
        return self.omega.cols

    @property
    def num_junctions(self) -> int:
        return self.a_j.cols

    @property
    def num_slips(self) -> int:
        return self.b_s.cols

    def to_dict(self) -> dict:
        return {
            "capacitance": self.c.tolist(),
            "inductance": self.l.tolist(),
            "junction_incidence": self.a_j.to_lists(),
            "slip_loop": self.b_s.to_lists(),
            "network_matrix": self.omega.to_lists(),
            "external_charge": self.q_ext.tolist(),
            "external_flux": self.phi_ext.tolist(),
            "trapped_charge": self.n0.tolist(),
            "trapped_flux": self.m0.tolist(),
            "josephson_energies": self.e_j.tolist(),
            "slip_energies": self.e_s.tolist(),
            "junction_phase": self.junction_phase.tolist(),
            "slip_phase": self.slip_phase.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CircuitTopology":
        omega = IntMatrix(d["network_matrix"]) if d.get("network_matrix") else None
        if omega is None or (omega.rows == 0 and d.get("capacitance")):
            n = len(d.get("capacitance", []))
            l = len(d.get("inductance", []))
            omega = IntMatrix(d["network_matrix"], shape=(n, l)) if d.get("network_matrix") else IntMatrix.zeros(n, l)
        n, l = omega.shape
        aj = d.get("junction_incidence") or []
        bs = d.get("slip_loop") or []
        a_j = IntMatrix(aj, shape=(n, len(aj[0]) if aj and aj[0] else 0)) if aj else IntMatrix.zeros(n, 0)
        b_s = IntMatrix(bs, shape=(l, len(bs[0]) if bs and bs[0] else 0)) if bs else IntMatrix.zeros(l, 0)
        return cls(
            c=np.array(d.get("capacitance", np.zeros((n, n))), dtype=float).reshape(n, n),
            l=np.array(d.get("inductance", np.zeros((l, l))), dtype=float).reshape(l, l),
            a_j=a_j,
            b_s=b_s,
            omega=omega,
            q_ext=np.array(d.get("external_charge", np.zeros(n)), dtype=float),
            phi_ext=np.array(d.get("external_flux", np.zeros(l)), dtype=float),
            n0=np.array(d.get("trapped_charge", np.zeros(n)), dtype=float),
            m0=np.array(d.get("trapped_flux", np.zeros(l)), dtype=float),
            e_j=np.array(d.get("josephson_energies", []), dtype=float),
            e_s=np.array(d.get("slip_energies", []), dtype=float),
            junction_phase=np.array(d["junction_phase"], dtype=float) if "junction_phase" in d else None,
            slip_phase=np.array(d["slip_phase"], dtype=float) if "slip_phase" in d else None,
        )


@dataclass(frozen=True)
class TreeCotree:
    """Capacitive spanning tree and inductive cotree in matrix form.

    The first J columns of ``a_ct`` are the junction incidence matrix; the
    first S columns of ``b_lt`` are the slip loop matrix.  Both are
    invertible with determinant +/-1.
    """

    a_ct: IntMatrix
    b_lt: IntMatrix
    tree_edges: Tuple[Tuple[int, int], ...] = ()

    def __post_init__(self):
        for name, m in (("a_ct", self.a_ct), ("b_lt", self.b_lt)):
            if m.rows != m.cols:
                raise TopologyError(f"{name} is not square")
            if m.rows and m.det() not in (-1, 1):
                raise TopologyError(f"{name} determinant is not +/-1")


# ---------------------------------------------------------------------------
# Assembly


class _UnionFind:
    def __init__(self):
        self.parent = {}

    def find(self, x):
        self.parent.setdefault(x, x)
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[rb] = ra
        return True


def _incidence_column(n_rows: int, index_of: Dict[int, int], u: int, v: int) -> List[int]:
    col = [0] * n_rows
    if v in index_of:
        col[index_of[v]] += 1
    if u in index_of:
        col[index_of[u]] -= 1
    return col


def build_topology(netlist: BranchNetlist) -> CircuitTopology:
    """Assemble the node/loop system matrices from a branch netlist.

    The capacitance matrix comes from the branch capacitor incidence
    congruence, the loop inductance matrix from the loop-matrix congruence
    over the branch inductances.  Loops use the fundamental basis of the
    inductive cotree: one loop per cotree branch, closing through the
    capacitive network, with phase-slip branches preferred as cotree edges.
    """
    cap_branches = netlist.capacitive_branches
    junctions = [b for b in cap_branches if b.kind == "josephson"]
    ind_branches = netlist.inductive_branches
    slips = [b for b in ind_branches if b.kind == "phase_slip"]

    # Capacitive nodes and connectivity (single ground component).
    cap_nodes_all = sorted({n for b in cap_branches for n in b.endpoints()})
    if cap_branches:
        uf = _UnionFind()
        for b in cap_branches:
            uf.union(b.node_from, b.node_to)
        roots = {uf.find(n) for n in cap_nodes_all + [0]}
        if len(roots) > 1:
            comps: Dict[int, List[int]] = {}
            for n in cap_nodes_all:
                comps.setdefault(uf.find(n), []).append(n)
            raise TopologyError(
                "capacitive network is disconnected from ground; components: "
                + "; ".join(str(v) for v in comps.values())
            )
    cap_nodes = tuple(n for n in cap_nodes_all if n != 0)
    index_of = {n: i for i, n in enumerate(cap_nodes)}
    n = len(cap_nodes)

    # Nodal capacitance matrix C = A_C C_b A_C^T.
    cap_edge_order = junctions + [b for b in cap_branches if b.kind == "capacitor"]
    a_c = np.array(
        [_incidence_column(n, index_of, b.node_from, b.node_to) for b in cap_edge_order],
        dtype=float,
    ).T.reshape(n, len(cap_edge_order))
    c_b = np.diag([b.value for b in cap_edge_order]) if cap_edge_order else np.zeros((0, 0))
    c = a_c @ c_b @ a_c.T

    a_j_cols = [_incidence_column(n, index_of, b.node_from, b.node_to) for b in junctions]
    a_j = IntMatrix([[col[i] for col in a_j_cols] for i in range(n)], shape=(n, len(junctions)))

    # Inductive loop basis: forest over the graph whose vertices are the
    # inductive-only nodes plus one supernode for the capacitive network.
    cap_super = frozenset(cap_nodes_all) | {0}

    def g_vertex(node: int):
        return "CAP" if node in cap_super else node

    for b in ind_branches:
        if not b.label:
            raise NetlistError("inductive branches must carry labels")

    uf2 = _UnionFind()
    forest_adj: Dict[object, List[Tuple[Branch, int]]] = {}
    cotree: List[Branch] = []
    ordered = [b for b in ind_branches if b.kind == "inductor"] + slips
    for b in ordered:
        gu, gv = g_vertex(b.node_from), g_vertex(b.node_to)
        if gu == gv or not uf2.union(gu, gv):
            cotree.append(b)
        else:
            forest_adj.setdefault(gu, []).append((b, +1))
            forest_adj.setdefault(gv, []).append((b, -1))
    cotree_labels = {b.label for b in cotree}
    cotree = [b for b in slips if b.label in cotree_labels] + [b for b in cotree if b.kind == "inductor"]

    def forest_path(src, dst) -> List[Tuple[Branch, int]]:
        if src == dst:
            return []
        seen = {src: None}
        queue = [src]
        while queue:
            v = queue.pop(0)
            for br, direction in forest_adj.get(v, []):
                w = g_vertex(br.node_to) if direction == +1 else g_vertex(br.node_from)
                if w not in seen:
                    seen[w] = (v, br, direction)
                    if w == dst:
                        queue = []
                        break
                    queue.append(w)
        if dst not in seen:
            raise TopologyError(f"no closure path for loop of branch {src}->{dst}")
        path = []
        v = dst
        while seen[v] is not None:
            prev, br, direction = seen[v]
            path.append((br, direction))
            v = prev
        path.reverse()
        return path

    loops: List[LoopSpec] = []
    ind_order = {b.label: i for i, b in enumerate(ind_branches)}
    b_l_rows = []
    omega_cols = []
    used = {b.label: False for b in ind_branches}
    for e in cotree:
        gu, gv = g_vertex(e.node_from), g_vertex(e.node_to)
        members = [(e, +1)] + forest_path(gv, gu)
        row = [0] * len(ind_branches)
        for br, direction in members:
            row[ind_order[br.label]] += direction
            used[br.label] = True
        # Oriented original endpoints along the cycle.  The cycle is simple
        # in the contracted graph, so it visits the capacitive supernode at
        # most once: the arriving endpoint is the tip (+1) of the
        # network-matrix column, the departing endpoint the tail (-1).
        seq = []
        for br, direction in members:
            u_orig, v_orig = (br.node_from, br.node_to) if direction == +1 else (br.node_to, br.node_from)
            seq.append((u_orig, v_orig))
        col = np.zeros(n)
        tail_node = tip_node = 0
        cap_positions = [i for i, (u_orig, _v) in enumerate(seq) if u_orig in cap_super]
        if cap_positions:
            t = cap_positions[0]
            tail_node = seq[t][0]
            tip_node = seq[t - 1][1]
            if tip_node in index_of:
                col[index_of[tip_node]] += 1
            if tail_node in index_of:
                col[index_of[tail_node]] -= 1
        omega_cols.append(col)
        b_l_rows.append(row)
        loops.append(
            LoopSpec(
                cotree_label=e.label,
                members=tuple((br.label, d) for br, d in members),
                tail_node=tail_node,
                tip_node=tip_node,
            )
        )

    dangling = [lbl for lbl, ok in used.items() if not ok]
    if dangling:
        raise TopologyError(f"inductive branches carry no loop current: {dangling}")

    l_count = len(loops)
    b_l = np.array(b_l_rows, dtype=float).reshape(l_count, len(ind_branches))
    l_b = np.diag([b.value for b in ind_branches]) if ind_branches else np.zeros((0, 0))
    label_index = {b.label: i for i, b in enumerate(ind_branches)}
    for la, lb, m in netlist.mutuals:
        i, j = label_index[la], label_index[lb]
        l_b[i, j] += m
        l_b[j, i] += m
    if ind_branches and not cholesky_pd_check(l_b):
        raise TopologyError("branch inductance matrix (with mutuals) is not positive definite")
    l_mat = b_l @ l_b @ b_l.T

    omega = IntMatrix.from_numpy(np.array(omega_cols, dtype=float).reshape(l_count, n).T)
    slip_labels = [b.label for b in slips]
    loop_label_index = {spec.cotree_label: i for i, spec in enumerate(loops)}
    b_s_cols = []
    for lbl in slip_labels:
        col = [int(round(b_l[i, label_index[lbl]])) for i in range(l_count)]
        b_s_cols.append(col)
    b_s = IntMatrix([[col[i] for col in b_s_cols] for i in range(l_count)], shape=(l_count, len(slips)))

    if n and not cholesky_pd_check(c):
        bad = [cap_nodes[i] for i in range(n) if c[i, i] <= 0]
        raise TopologyError(f"assembled capacitance matrix is not positive definite (nodes {bad or cap_nodes})")
    if l_count and not cholesky_pd_check(l_mat):
        raise TopologyError(
            f"assembled loop inductance matrix is not positive definite (loops {[s.cotree_label for s in loops]})"
        )

    q_ext = np.zeros(n)
    n0 = np.zeros(n)
    for node, val in netlist.external_charge.items():
        if node not in index_of:
            raise NetlistError(f"external charge on unknown capacitive node {node}")
        q_ext[index_of[node]] = val
    for node, val in netlist.trapped_charge.items():
        if node not in index_of:
            raise NetlistError(f"trapped charge on unknown capacitive node {node}")
        n0[index_of[node]] = val

    phi_ext = np.zeros(l_count)
    m0 = np.zeros(l_count)
    for lbl, val in netlist.external_flux.items():
        if lbl not in loop_label_index:
            raise NetlistError(
                f"external flux must be keyed by a cotree branch; options: {sorted(loop_label_index)}"
            )
        phi_ext[loop_label_index[lbl]] = val
    for lbl, val in netlist.trapped_flux.items():
        if lbl not in loop_label_index:
            raise NetlistError(
                f"trapped flux must be keyed by a cotree branch; options: {sorted(loop_label_index)}"
            )
        m0[loop_label_index[lbl]] = val

    prov = Provenance(
        cap_nodes=cap_nodes,
        junction_edges=tuple(b.endpoints() for b in junctions),
        capacitor_edges=tuple(b.endpoints() for b in cap_branches if b.kind == "capacitor"),
        loops=tuple(loops),
    )
    return CircuitTopology(
        c=c,
        l=l_mat,
        a_j=a_j,
        b_s=b_s,
        omega=omega,
        q_ext=q_ext,
        phi_ext=phi_ext,
        n0=n0,
        m0=m0,
        e_j=np.array([b.energy for b in junctions]),
        e_s=np.array([b.energy for b in slips]),
        provenance=prov,
    )


# ---------------------------------------------------------------------------
# Validation


@dataclass(frozen=True)
class Violation:
    kind: str
    detail: str


@dataclass(frozen=True)
class Diagnostics:
    violations: Tuple[Violation, ...]

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {"valid": self.ok, "violations": [{"kind": v.kind, "detail": v.detail} for v in self.violations]}


def validate(topo: CircuitTopology) -> Diagnostics:
    """Check the physical admissibility constraints of the circuit model."""
    out: List[Violation] = []
    for name, m in (("junction incidence", topo.a_j), ("slip loop matrix", topo.b_s), ("network matrix", topo.omega)):
        if not m.entries_in_unit_range():
            out.append(Violation("entry_range", f"{name} has entries outside -1, 0, +1"))
    if topo.a_j.cols and topo.a_j.rank() < topo.a_j.cols:
        out.append(
            Violation(
                "junction_only_loop",
                "junction incidence matrix is column-rank deficient: a loop of "
                "junctions carries no inductance",
            )
        )
    if topo.b_s.cols and topo.b_s.rank() < topo.b_s.cols:
        out.append(
            Violation(
                "phase_slip_cutset",
                "slip loop matrix is column-rank deficient: a node joins multiple "
                "phase slips without capacitance",
            )
        )
    if topo.num_nodes and not cholesky_pd_check(topo.c):
        out.append(Violation("capacitance_not_pd", "capacitance matrix is not positive definite"))
    if topo.num_loops and not cholesky_pd_check(topo.l):
        out.append(Violation("inductance_not_pd", "loop inductance matrix is not positive definite"))
    return Diagnostics(tuple(out))


# ---------------------------------------------------------------------------
# Tree-cotree selection


def _capacitive_adjacency_from_matrix(c: np.ndarray) -> List[Tuple[int, int]]:
    """Infer capacitive edges from the nodal matrix: coupling entries give
    node-node edges, positive row sums give edges to ground (node 0)."""
    n = c.shape[0]
    scale = float(np.max(np.abs(c))) if n else 0.0
    tol = 1e-12 * scale
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            if abs(c[i, j]) > tol:
                edges.append((i + 1, j + 1))
    for i in range(n):
        if float(np.sum(c[i, :])) > tol:
            edges.append((0, i + 1))
    return edges


def find_tree_cotree(topo: CircuitTopology) -> TreeCotree:
    """Choose a capacitive spanning tree through every junction and an
    inductive cotree along every phase slip.

    Tree selection is greedy: junction edges first, then capacitor edges in
    netlist order (or inferred from the capacitance sparsity when the
    topology was built by hand).  The cotree loop matrix is completed from
    the slip loop matrix with determinant +/-1.
    """
    n = topo.num_nodes
    j_count = topo.num_junctions
    uf = _UnionFind()
    tree_edges: List[Tuple[int, int]] = []
    cols: List[List[int]] = []

    for jcol in range(j_count):
        col = [topo.a_j[i, jcol] for i in range(n)]
        nodes = [i + 1 for i, v in enumerate(col) if v != 0]
        u = next((i + 1 for i, v in enumerate(col) if v == -1), 0)
        v = next((i + 1 for i, v in enumerate(col) if v == +1), 0)
        if not nodes:
            raise TopologyError(f"junction column {jcol} is empty")
        if not uf.union(u, v):
            raise TopologyError("junction edges contain a loop; validate() should have failed")
        tree_edges.append((u, v))
        cols.append(col)

    if topo.provenance is not None:
        candidates = list(topo.provenance.capacitor_edges)
        relabel = {node: i + 1 for i, node in enumerate(topo.provenance.cap_nodes)}
        relabel[0] = 0
        candidates = [(relabel[u], relabel[v]) for u, v in candidates]
    else:
        candidates = _capacitive_adjacency_from_matrix(topo.c)

    for u, v in candidates:
        if uf.union(u, v):
            tree_edges.append((u, v))
            col = [0] * n
            if v != 0:
                col[v - 1] += 1
            if u != 0:
                col[u - 1] -= 1
            cols.append(col)

    root = uf.find(0)
    if any(uf.find(i + 1) != root for i in range(n)):
        raise TopologyError("capacitive spanning tree is infeasible; network is disconnected")

    a_ct = IntMatrix([[cols[e][i] for e in range(n)] for i in range(n)], shape=(n, n))
    b_lt = complete_to_unimodular(topo.b_s) if topo.num_loops else IntMatrix.zeros(0, 0)
    return TreeCotree(a_ct=a_ct, b_lt=b_lt, tree_edges=tuple(tree_edges))


# ---------------------------------------------------------------------------
# Basis changes


def apply_basis_change(
    topo: CircuitTopology, u: UnimodularTransform, w: UnimodularTransform
) -> CircuitTopology:
    """Transform node-flux coordinates by ``U`` and loop-charge by ``W``.

    Acts as C -> UCU^T, L -> WLW^T, A_J -> UA_J, B_S -> WB_S,
    Omega -> U Omega W^T, with the external and trapped vectors carried
    along.
    """
    n, l = topo.omega.shape
    if u.size != n or w.size != l:
        raise TopologyError(f"transform sizes {u.size}, {w.size} do not match system ({n}, {l})")
    u_np = u.m.to_numpy().astype(float)
    w_np = w.m.to_numpy().astype(float)
    return CircuitTopology(
        c=u_np @ topo.c @ u_np.T,
        l=w_np @ topo.l @ w_np.T,
        a_j=u.m @ topo.a_j,
        b_s=w.m @ topo.b_s,
        omega=(u.m @ topo.omega) @ w.m.T,
        q_ext=u_np @ topo.q_ext,
        phi_ext=w_np @ topo.phi_ext,
        n0=u_np @ topo.n0,
        m0=w_np @ topo.m0,
        e_j=topo.e_j,
        e_s=topo.e_s,
        junction_phase=topo.junction_phase,
        slip_phase=topo.slip_phase,
        provenance=None,
    )
