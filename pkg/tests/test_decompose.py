import numpy as np
import pytest

from nodeloop.decompose import (
    DecomposeError,
    UnsupportedSizeError,
    canonical_signature,
    enumerate_junction_classes,
    fundamental_decomposition,
    structure_preserving_step,
    to_edge_basis,
    to_node_basis,
)
from nodeloop.graphs import apply_basis_change, find_tree_cotree
from nodeloop.intlin import IntMatrix, check_tu_sampled

COUPLER_EDGE = IntMatrix([[0, 0], [-1, -1], [1, 0], [1, 1]])
COUPLER_AFTER_COL = IntMatrix([[0, 0], [-1, 0], [1, -1], [1, 0]])
COUPLER_AFTER_ROW = IntMatrix([[0, 0], [0, 0], [0, -1], [1, 0]])
COUPLER_NORMALIZED = IntMatrix([[0, 0], [0, 0], [0, 1], [1, 0]])


@pytest.fixture
def coupler_edge(coupler):
    return to_edge_basis(coupler, find_tree_cotree(coupler))


class TestToEdgeBasis:
    def test_coupler_matrix(self, coupler_edge):
        assert coupler_edge.omega_e == COUPLER_EDGE
        assert coupler_edge.j_count == 3 and coupler_edge.s_count == 0

    def test_fluxonium_trivial(self, fluxonium):
        es = to_edge_basis(fluxonium, find_tree_cotree(fluxonium))
        assert es.omega_e == IntMatrix([[1]])

    def test_mixed_circuit_edge_form(self, mixed):
        es = to_edge_basis(mixed, find_tree_cotree(mixed))
        assert es.omega_e.entries_in_unit_range()
        assert check_tu_sampled(es.omega_e)
        topo = es.to_topology()
        # upper identity structure for junctions and slips
        assert topo.a_j == IntMatrix([[1], [0]])
        assert topo.b_s == IntMatrix([[1], [0]])


class TestStructurePreservingSteps:
    def test_coupler_column_pivot(self, coupler_edge):
        out = structure_preserving_step(coupler_edge, "col_pivot", 3, 0)
        assert out.omega_e == COUPLER_AFTER_COL

    def test_coupler_row_then_sign(self, coupler_edge):
        s1 = structure_preserving_step(coupler_edge, "col_pivot", 3, 0)
        s2 = structure_preserving_step(s1, "row_pivot", 3, 0)
        assert s2.omega_e == COUPLER_AFTER_ROW
        s3 = structure_preserving_step(s2, "sign_flip_col", 1)
        assert s3.omega_e == COUPLER_NORMALIZED

    def test_junction_row_pivot_rejected(self, coupler_edge):
        with pytest.raises(DecomposeError, match="linear-capacitor"):
            structure_preserving_step(coupler_edge, "row_pivot", 1, 0)

    def test_slip_column_pivot_rejected(self, mixed):
        es = to_edge_basis(mixed, find_tree_cotree(mixed))
        with pytest.raises(DecomposeError, match="linear-inductor"):
            structure_preserving_step(es, "col_pivot", 1, 0)

    def test_cross_kind_permutation_rejected(self, coupler_edge):
        with pytest.raises(DecomposeError, match="one edge kind"):
            structure_preserving_step(coupler_edge, "permute_rows", 0, 3)

    def test_entry_domain_preserved(self, coupler_edge):
        rng = np.random.default_rng(13)
        es = coupler_edge
        for _ in range(60):
            m = es.omega_e
            ops = []
            for i in range(m.rows):
                for j in range(m.cols):
                    if m[i, j] == 0:
                        continue
                    if es.row_kind(i) == "capacitor":
                        ops.append(("row_pivot", i, j))
                    if es.col_kind(j) == "inductor":
                        ops.append(("col_pivot", i, j))
            if not ops:
                break
            kind, i, j = ops[rng.integers(len(ops))]
            es = structure_preserving_step(es, kind, i, j)
            assert es.omega_e.entries_in_unit_range()
            assert check_tu_sampled(es.omega_e)

    def test_transform_bookkeeping(self, coupler_edge):
        out = structure_preserving_step(coupler_edge, "col_pivot", 3, 0)
        u = out.u_total.m
        w = out.w_total.m
        assert (u @ coupler_edge.omega_e) @ w.T == out.omega_e


class TestFundamentalDecomposition:
    def test_coupler_stage_sequence(self, coupler_edge):
        final, ff = fundamental_decomposition(coupler_edge)
        snaps = [st.snapshot for st in final.history]
        assert snaps[0] == COUPLER_EDGE
        assert COUPLER_AFTER_COL in snaps
        assert COUPLER_AFTER_ROW in snaps
        assert final.omega_e == COUPLER_NORMALIZED
        assert (ff.j, ff.s, ff.f, ff.p, ff.r) == (3, 0, 1, 0, 1)
        assert ff.alpha == 0 and ff.beta == 0

    def test_coupler_block_matrix(self, coupler_edge):
        _final, ff = fundamental_decomposition(coupler_edge)
        assert ff.block_matrix() == IntMatrix([[0, 0], [0, 0], [1, 0], [0, 1]])
        assert ff.omega_jf == IntMatrix([[0], [0], [1]])

    def test_lc_mesh_reduces_to_harmonic_identity(self, lc_mesh):
        es = to_edge_basis(lc_mesh, find_tree_cotree(lc_mesh))
        final, ff = fundamental_decomposition(es)
        assert (ff.j, ff.s, ff.f, ff.p) == (0, 0, 0, 0)
        assert ff.r == 2
        assert ff.block_matrix() == IntMatrix.identity(2)

    def test_fluxonium_already_fundamental(self, fluxonium):
        es = to_edge_basis(fluxonium, find_tree_cotree(fluxonium))
        final, ff = fundamental_decomposition(es)
        assert ff.omega_js == IntMatrix([[1]])
        assert (ff.f, ff.p, ff.r) == (0, 0, 0)
        assert final.omega_e == es.omega_e

    def test_idempotent(self, coupler_edge, mixed):
        first, _ = fundamental_decomposition(coupler_edge)
        again, _ = fundamental_decomposition(first)
        assert again.omega_e == first.omega_e
        from nodeloop.graphs import find_tree_cotree as ftc

        es = to_edge_basis(mixed, ftc(mixed))
        one, _ = fundamental_decomposition(es)
        two, _ = fundamental_decomposition(one)
        assert two.omega_e == one.omega_e

    def test_free_mode_elimination(self):
        """A capacitor edge outside every loop is a free island and is
        Schur-eliminated during decomposition."""
        from nodeloop.graphs import Branch, BranchNetlist, build_topology

        from conftest import GHZ

        net = BranchNetlist(
            branches=(
                Branch("josephson", 0, 1, value=1e-14, energy=5 * GHZ, label="j"),
                Branch("capacitor", 1, 2, value=2e-14, label="cx"),
                Branch("inductor", 0, 1, value=1e-9, label="l"),
            )
        )
        topo = build_topology(net)
        es = to_edge_basis(topo, find_tree_cotree(topo))
        final, ff = fundamental_decomposition(es)
        assert ff.alpha == 1
        assert final.rows == 1
        # eliminated island renormalizes nothing here (no coupling through C'):
        # the junction-row capacitance keeps its Schur-complement value
        assert final.c.shape == (1, 1)

    def test_zero_blocks_exact(self, coupler_edge, mixed):
        for es in (coupler_edge, to_edge_basis(mixed, find_tree_cotree(mixed))):
            _final, ff = fundamental_decomposition(es)
            block = ff.block_matrix()
            j, s, f, p, r = ff.j, ff.s, ff.f, ff.p, ff.r
            for i in range(j):
                for c in range(s + f, s + f + r):
                    assert block[i, c] == 0
            for i in range(j, j + p):
                for c in range(s, s + f + r):
                    assert block[i, c] == 0
            for i in range(j + p, j + p + r):
                for c in range(s + f):
                    assert block[i, c] == 0
                assert block[i, s + f + (i - j - p)] == 1


class TestToNodeBasis:
    def test_coupler_identity_incidence(self, coupler_edge):
        final, _ = fundamental_decomposition(coupler_edge)
        topo = to_node_basis(final, IntMatrix.identity(4))
        assert topo.omega == COUPLER_NORMALIZED
        assert topo.a_j == IntMatrix(
            [[1, 0, 0], [0, 1, 0], [0, 0, 1], [0, 0, 0]]
        )

    def test_round_trip(self, coupler):
        tc = find_tree_cotree(coupler)
        es = to_edge_basis(coupler, tc)
        back = to_node_basis(es, tc.a_ct)
        assert back.omega == coupler.omega
        assert back.a_j == coupler.a_j
        assert np.allclose(back.c, coupler.c)
        assert np.allclose(back.l, coupler.l)

    def test_fluxonium_identity(self, fluxonium):
        es = to_edge_basis(fluxonium, find_tree_cotree(fluxonium))
        topo = to_node_basis(es, IntMatrix.identity(1))
        assert topo.omega == IntMatrix([[1]])

    def test_inconsistent_incidence_rejected(self, coupler_edge):
        bad = IntMatrix([[1, 0, 0, 0], [0, 2, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]])
        with pytest.raises(DecomposeError):
            to_node_basis(coupler_edge, bad)


class TestClassification:
    def test_single_junction_with_inductor(self):
        """A junction shunted by an inductor is the one-junction class with
        a galvanic loop."""
        from nodeloop.graphs import Branch, BranchNetlist, build_topology

        from conftest import GHZ

        net = BranchNetlist(
            branches=(
                Branch("josephson", 0, 1, value=1e-14, energy=5 * GHZ, label="j"),
                Branch("inductor", 0, 1, value=1e-9, label="l"),
            )
        )
        topo = build_topology(net)
        es = to_edge_basis(topo, find_tree_cotree(topo))
        _final, ff = fundamental_decomposition(es)
        sig = canonical_signature(ff)
        assert sig.junction_count == 1
        assert sig.omega_jf == canonical_signature_of([[1]])

    def test_two_junction_single_loop(self, squid):
        es = to_edge_basis(squid, find_tree_cotree(squid))
        _final, ff = fundamental_decomposition(es)
        sig = canonical_signature(ff)
        assert sig.omega_jf == canonical_signature_of([[1], [-1]])

    def test_two_junctions_no_inductors(self):
        from nodeloop.graphs import Branch, BranchNetlist, build_topology

        from conftest import GHZ

        net = BranchNetlist(
            branches=(
                Branch("josephson", 0, 1, value=1e-14, energy=5 * GHZ, label="j1"),
                Branch("josephson", 1, 2, value=1e-14, energy=5 * GHZ, label="j2"),
            )
        )
        topo = build_topology(net)
        es = to_edge_basis(topo, find_tree_cotree(topo))
        _final, ff = fundamental_decomposition(es)
        sig = canonical_signature(ff)
        assert sig.omega_jf == ((), ())

    def test_enumeration_counts(self):
        assert len(enumerate_junction_classes(1)) == 2
        assert len(enumerate_junction_classes(2)) == 4

    def test_enumeration_contains_reference_forms(self):
        """The class representatives match the reference matrices up to the
        allowed transformation group."""
        one = set(enumerate_junction_classes(1))
        assert canonical_signature_of([]) in one or () in one
        assert canonical_signature_of([[1]]) in one
        two = set(enumerate_junction_classes(2))
        for rep in ([[1], [0]], [[1], [-1]], [[1, 0], [0, 1]]):
            assert canonical_signature_of(rep) in two

    def test_size_cap(self):
        with pytest.raises(UnsupportedSizeError):
            enumerate_junction_classes(4)

    def test_slip_triple_signature(self, mixed):
        es = to_edge_basis(mixed, find_tree_cotree(mixed))
        _final, ff = fundamental_decomposition(es)
        sig = canonical_signature(ff)
        assert sig.omega_js in (((1,),), ((-1,),))
        assert sig.harmonic_count == ff.r


def canonical_signature_of(rows):
    from nodeloop.decompose import _orbit_canonical_jf

    if not rows:
        return ()
    m = IntMatrix(rows)
    return _orbit_canonical_jf(m)


class TestDynamicalInvariance:
    def test_trajectories_invariant_under_steps(self, coupler):
        """Junction fluxes are untouched by a pivot sequence (mapped through
        the recorded transforms)."""
        from nodeloop.dynamics import InitialState, integrate, map_state

        from nodeloop.constants import FLUX_QUANTUM

        tc = find_tree_cotree(coupler)
        es0 = to_edge_basis(coupler, tc)
        es1, _ = fundamental_decomposition(es0)
        t0 = es0.to_topology()
        t1 = es1.to_topology()
        init0 = InitialState(
            phi=0.05 * FLUX_QUANTUM * np.array([1.0, -0.5, 0.3, 0.2]),
            q=np.zeros(2),
            phi_dot=np.zeros(4),
            q_dot=np.zeros(2),
        )
        init1 = map_state(init0, es1.u_total, es1.w_total)
        dt = 2e-13
        a = integrate(t0, init0, 4e-11, dt)
        b = integrate(t1, init1, 4e-11, dt)
        scale = max(np.max(np.abs(a.junction_flux)), FLUX_QUANTUM)
        dev = np.max(np.abs(a.junction_flux - b.junction_flux))
        assert dev <= 1e-6 * scale
