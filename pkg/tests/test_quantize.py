import numpy as np
import pytest

from nodeloop.constants import COOPER_PAIR_CHARGE, FLUX_QUANTUM
from nodeloop.graphs import (
    Branch,
    BranchNetlist,
    CircuitTopology,
    apply_basis_change,
    build_topology,
)
from nodeloop.intlin import IntMatrix, UnimodularTransform
from nodeloop.quantize import (
    QuantizeError,
    apply_zero_limits,
    build_hamiltonian,
    classify_and_reduce,
    evaluate_hamiltonian,
    remove_free_modes,
)

from conftest import GHZ, fluxonium_netlist, squid_netlist
from test_graphs import _random_unimodular

TWO_E = COOPER_PAIR_CHARGE
PHI0 = FLUX_QUANTUM


def zero_point(model):
    return {
        "Q": np.zeros(model.k),
        "P": np.zeros(model.k),
        "n": np.zeros(model.j),
        "phi": np.zeros(model.j),
        "m": np.zeros(model.s),
        "q": np.zeros(model.s),
    }


def random_point(model, rng, scale_q=1e-19, scale_p=1e-16):
    return {
        "Q": rng.normal(scale=scale_q, size=model.k),
        "P": rng.normal(scale=scale_p, size=model.k),
        "n": rng.integers(-3, 4, size=model.j).astype(float),
        "phi": rng.uniform(-np.pi, np.pi, size=model.j),
        "m": rng.integers(-3, 4, size=model.s).astype(float),
        "q": rng.uniform(-np.pi, np.pi, size=model.s),
    }


class TestRemoveFreeModes:
    def test_fluxonium_untouched(self, fluxonium):
        out, rec = remove_free_modes(fluxonium)
        assert rec.trivial
        assert out is fluxonium

    def test_capacitive_island_schur(self):
        c11, c12, c22 = 2e-14, -0.5e-14, 1e-14
        topo = CircuitTopology(
            c=np.array([[c11, c12], [c12, c22]]),
            l=np.zeros((0, 0)),
            a_j=IntMatrix([[1], [0]]),
            b_s=IntMatrix.zeros(0, 0),
            omega=IntMatrix.zeros(2, 0),
            q_ext=np.array([0.0, 3e-19]),
            phi_ext=None,
            n0=np.array([0.0, 2.0]),
            m0=None,
            e_j=np.array([GHZ]),
            e_s=np.zeros(0),
        )
        out, rec = remove_free_modes(topo)
        assert rec.alpha_nodes == (1,)
        assert np.allclose(out.c, [[c11 - c12**2 / c22]])
        assert np.allclose(out.q_ext, [0.0 - c12 / c22 * 3e-19])
        assert np.allclose(out.n0, [0.0 - c12 / c22 * 2.0])

    def test_decomposed_coupler_has_no_free_modes(self, coupler):
        from nodeloop.decompose import fundamental_decomposition, to_edge_basis
        from nodeloop.graphs import find_tree_cotree

        es = to_edge_basis(coupler, find_tree_cotree(coupler))
        final, ff = fundamental_decomposition(es)
        assert ff.alpha == 0 and ff.beta == 0
        _out, rec = remove_free_modes(final.to_topology())
        assert rec.trivial


class TestClassify:
    def test_fluxonium(self, fluxonium):
        _red, part = classify_and_reduce(fluxonium)
        assert (part.k, part.j, part.s) == (1, 0, 0)

    def test_transmon(self, transmon):
        _red, part = classify_and_reduce(transmon)
        assert (part.k, part.j, part.s) == (0, 1, 0)

    def test_isolated_slip_loop(self):
        net = BranchNetlist(
            branches=(Branch("phase_slip", 0, 0, value=1e-7, energy=GHZ, label="s"),)
        )
        _red, part = classify_and_reduce(build_topology(net))
        assert (part.k, part.j, part.s) == (0, 0, 1)


class TestBuildHamiltonian:
    def test_fluxonium_structure(self, fluxonium):
        model = build_hamiltonian(fluxonium)
        assert (model.k, model.j, model.s) == (1, 0, 0)
        assert model.removed_doubly_discrete == 1
        c, l = fluxonium.c[0, 0], fluxonium.l[0, 0]
        assert np.allclose(model.cinv, [[1.0 / c]])
        assert np.allclose(model.linv, [[1.0 / l]])
        kinds = sorted(t.kind for t in model.cosines)
        assert kinds == ["josephson", "phase_slip"]
        for t in model.cosines:
            assert t.compact_row == ()
            assert abs(t.extended_row[0]) == 1
        jj = next(t for t in model.cosines if t.kind == "josephson")
        ss = next(t for t in model.cosines if t.kind == "phase_slip")
        assert jj.extended_row == (-1,)
        assert ss.extended_row == (1,)
        assert np.isclose(jj.energy, 4.0 * GHZ)
        assert np.isclose(ss.energy, 0.3 * GHZ)

    def test_fluxonium_energy_values(self):
        q_ext, phi_ext = 0.7e-19, 0.4 * PHI0
        topo = build_topology(fluxonium_netlist(q_ext=q_ext, phi_ext=phi_ext))
        model = build_hamiltonian(topo)
        c, l = topo.c[0, 0], topo.l[0, 0]
        e_j, e_s = topo.e_j[0], topo.e_s[0]
        rng = np.random.default_rng(4)
        for _ in range(20):
            q = rng.normal(scale=1e-19)
            p = rng.normal(scale=PHI0)
            got = evaluate_hamiltonian(model, {"Q": [q], "P": [p], "n": [], "phi": [], "m": [], "q": []})
            want = (
                (q - q_ext) ** 2 / (2 * c)
                + (p - phi_ext) ** 2 / (2 * l)
                - e_j * np.cos(2 * np.pi * p / PHI0)
                - e_s * np.cos(2 * np.pi * q / TWO_E)
            )
            assert np.isclose(got, want, rtol=1e-12)

    def test_standard_notation_flips_flux(self):
        phi_ext = 0.4 * PHI0
        topo = build_topology(fluxonium_netlist(phi_ext=phi_ext))
        model = build_hamiltonian(topo).with_standard_notation()
        c, l = topo.c[0, 0], topo.l[0, 0]
        e_j, e_s = topo.e_j[0], topo.e_s[0]
        rng = np.random.default_rng(9)
        for _ in range(10):
            q = rng.normal(scale=1e-19)
            phi = rng.normal(scale=PHI0)
            got = evaluate_hamiltonian(model, {"Q": [q], "P": [phi], "n": [], "phi": [], "m": [], "q": []})
            want = (
                q**2 / (2 * c)
                + (phi + phi_ext) ** 2 / (2 * l)
                - e_j * np.cos(2 * np.pi * phi / PHI0)
                - e_s * np.cos(2 * np.pi * q / TWO_E)
            )
            assert np.isclose(got, want, rtol=1e-12)

    def test_fluxonium_origin_energy(self, fluxonium):
        model = build_hamiltonian(fluxonium)
        at_origin = evaluate_hamiltonian(
            model, {"Q": [0.0], "P": [0.0], "n": [], "phi": [], "m": [], "q": []}
        )
        assert np.isclose(at_origin, -(fluxonium.e_j[0] + fluxonium.e_s[0]), rtol=1e-12)

    def test_lc_oscillator_harmonic(self, lc_oscillator):
        model = build_hamiltonian(lc_oscillator)
        assert (model.k, model.j, model.s) == (1, 0, 0)
        assert model.cosines == ()
        q0 = 2.5e-18
        got = evaluate_hamiltonian(model, {"Q": [q0], "P": [0.0], "n": [], "phi": [], "m": [], "q": []})
        assert np.isclose(got, q0**2 / (2 * lc_oscillator.c[0, 0]), rtol=1e-12)

    def test_transmon_closed_form(self):
        q_ext = 0.3 * TWO_E
        topo = build_topology(
            BranchNetlist(
                branches=(Branch("josephson", 0, 1, value=6.5e-14, energy=12 * GHZ, label="j"),),
                external_charge={1: q_ext},
            )
        )
        model = build_hamiltonian(topo)
        assert (model.k, model.j, model.s) == (0, 1, 0)
        c = topo.c[0, 0]
        for n in (-2, 0, 3):
            for phi in (0.0, 0.9, np.pi):
                got = evaluate_hamiltonian(
                    model, {"Q": [], "P": [], "n": [n], "phi": [phi], "m": [], "q": []}
                )
                want = (TWO_E * n - q_ext) ** 2 / (2 * c) - 12 * GHZ * np.cos(phi)
                assert np.isclose(got, want, rtol=1e-12)

    def test_variable_inventory_excludes_removed_pairs(self, fluxonium, mixed):
        for topo in (fluxonium, mixed):
            model = build_hamiltonian(topo)
            names = model.variable_names()
            assert set(names) == {"Q", "P", "n", "phi", "m", "q"}
            assert names["Q"] == names["P"] == model.k
            assert model.cinv.shape == (model.k + model.j,) * 2
            assert model.linv.shape == (model.k + model.s,) * 2
            # compact variables only in cosines, discrete only in quadratics
            for t in model.cosines:
                assert len(t.extended_row) == model.k
                expected_compact = model.j if t.kind == "josephson" else model.s
                assert len(t.compact_row) == expected_compact

    def test_quadratic_blocks_pd(self, fluxonium, mixed, coupler):
        from nodeloop.numeric import cholesky_pd_check

        for topo in (fluxonium, mixed, coupler):
            model = build_hamiltonian(topo)
            if model.cinv.size:
                assert cholesky_pd_check(model.cinv)
            if model.linv.size:
                assert cholesky_pd_check(model.linv)

    def test_periodicity(self, transmon):
        model = build_hamiltonian(transmon)
        p0 = evaluate_hamiltonian(model, {"Q": [], "P": [], "n": [1], "phi": [0.3], "m": [], "q": []})
        p1 = evaluate_hamiltonian(model, {"Q": [], "P": [], "n": [1], "phi": [0.3 + 2 * np.pi], "m": [], "q": []})
        assert np.isclose(p0, p1, rtol=1e-12)

    def test_non_integer_discrete_rejected(self, transmon):
        model = build_hamiltonian(transmon)
        with pytest.raises(QuantizeError):
            evaluate_hamiltonian(model, {"Q": [], "P": [], "n": [0.5], "phi": [0.0], "m": [], "q": []})


def intermediate_energy(red: CircuitTopology, phi, q, pi, p) -> float:
    """Independent oracle: the pre-transformation Hamiltonian, whose cosines
    still contain the raw node fluxes and loop charges."""
    n, l = red.omega.shape
    k = min(n, l)  # valid for already-reduced identity-block systems
    x = pi.copy()
    x[:k] += q[:k]
    x -= red.q_ext
    y = p - red.phi_ext
    e = 0.5 * x @ np.linalg.inv(red.c) @ x if n else 0.0
    e += 0.5 * y @ np.linalg.inv(red.l) @ y if l else 0.0
    a_j = red.a_j.to_numpy().astype(float)
    b_s = red.b_s.to_numpy().astype(float)
    if red.num_junctions:
        e -= red.e_j @ np.cos((2 * np.pi / PHI0) * (a_j.T @ phi) + red.junction_phase)
    if red.num_slips:
        e -= red.e_s @ np.cos((2 * np.pi / TWO_E) * (b_s.T @ q) + red.slip_phase)
    return float(e)


def shell_state_and_point(red: CircuitTopology, part, rng, n_j_counts, m_s_counts):
    """Construct a canonical state on the integer tunneling shell and the
    matching phase-space point of the emitted Hamiltonian."""
    n, l = red.omega.shape
    k = part.k
    a_red = red.a_j.to_numpy().astype(float)
    b_red = red.b_s.to_numpy().astype(float)
    pi = -TWO_E * (a_red @ n_j_counts) if red.num_junctions else np.zeros(n)
    p = np.zeros(l)
    p[:k] = rng.normal(scale=1e-16, size=k)
    if red.num_slips:
        p += PHI0 * (b_red @ m_s_counts)
        p[:k] += 0.0
    phi = np.zeros(n)
    phi[k:] = rng.normal(scale=1e-16, size=n - k)
    phi[:k] = -p[:k] + (PHI0 * (b_red @ m_s_counts))[:k] if red.num_slips else -p[:k]
    q = np.zeros(l)
    q[:k] = rng.normal(scale=1e-19, size=k)
    q[k:] = rng.normal(scale=1e-19, size=l - k)
    point = {
        "Q": q[:k] + pi[:k],
        "P": p[:k],
        "n": pi[k:] / TWO_E,
        "phi": (2 * np.pi / PHI0) * phi[k:],
        "m": p[k:] / PHI0,
        "q": (2 * np.pi / TWO_E) * q[k:],
    }
    return (phi, q, pi, p), point


class TestAgainstIntermediateOracle:
    """The emitted Hamiltonian equals the pre-transformation one on the
    integer tunneling shell."""

    @pytest.mark.parametrize("fixture", ["fluxonium", "mixed", "transmon", "slip_pair"])
    def test_energy_matches(self, fixture, request):
        topo = request.getfixturevalue(fixture)
        model = build_hamiltonian(topo)
        red, part = classify_and_reduce(topo)
        rng = np.random.default_rng(hash(fixture) % 2**31)
        for _ in range(25):
            n_j = rng.integers(-2, 3, size=red.num_junctions).astype(float)
            m_s = rng.integers(-2, 3, size=red.num_slips).astype(float)
            (phi, q, pi, p), point = shell_state_and_point(red, part, rng, n_j, m_s)
            h_final = evaluate_hamiltonian(model, point)
            h_int = intermediate_energy(red, phi, q, pi, p)
            scale = max(abs(h_int), GHZ)
            assert abs(h_final - h_int) <= 1e-10 * scale


class TestGaugeInvariance:
    def test_integer_offsets_do_nothing(self, request):
        """Adding integer trapped charge/flux leaves the Hamiltonian
        unchanged on 50 random points."""
        rng = np.random.default_rng(31)
        for fixture in ("fluxonium", "mixed", "transmon", "slip_pair"):
            topo = request.getfixturevalue(fixture)
            model0 = build_hamiltonian(topo)
            n_add = rng.integers(-4, 5, size=topo.num_nodes).astype(float)
            m_add = rng.integers(-4, 5, size=topo.num_loops).astype(float)
            shifted = CircuitTopology(
                c=topo.c, l=topo.l, a_j=topo.a_j, b_s=topo.b_s, omega=topo.omega,
                q_ext=topo.q_ext, phi_ext=topo.phi_ext,
                n0=topo.n0 + n_add, m0=topo.m0 + m_add,
                e_j=topo.e_j, e_s=topo.e_s,
            )
            model1 = build_hamiltonian(shifted)
            for _ in range(50 // 4 + 1):
                pt = random_point(model0, rng)
                h0 = evaluate_hamiltonian(model0, pt)
                h1 = evaluate_hamiltonian(model1, pt)
                assert np.isclose(h0, h1, rtol=1e-10, atol=1e-10 * max(abs(h0), GHZ))

    def test_trapped_equals_external_shift_at_mapped_points(self, request):
        """Trapped charge/flux enters only through the combinations
        Q_ext - 2e N_0 and Phi_ext - Phi0 M_0.

        Folding them into the external offsets is a canonical variable
        shift: the extended charges move by the trapped charge, the
        extended fluxes by the trapped flux, and the discrete counters by
        the integer parts.  At correspondingly shifted points the two
        emitted Hamiltonians agree exactly.
        """
        rng = np.random.default_rng(37)
        for fixture in ("fluxonium", "mixed", "transmon"):
            topo = request.getfixturevalue(fixture)
            nu = rng.uniform(-2.5, 2.5, size=topo.num_nodes)
            mu = rng.uniform(-2.5, 2.5, size=topo.num_loops)
            with_trapped = CircuitTopology(
                c=topo.c, l=topo.l, a_j=topo.a_j, b_s=topo.b_s, omega=topo.omega,
                q_ext=topo.q_ext, phi_ext=topo.phi_ext, n0=nu, m0=mu,
                e_j=topo.e_j, e_s=topo.e_s,
            )
            with_ext = CircuitTopology(
                c=topo.c, l=topo.l, a_j=topo.a_j, b_s=topo.b_s, omega=topo.omega,
                q_ext=topo.q_ext - TWO_E * nu, phi_ext=topo.phi_ext - PHI0 * mu,
                n0=None, m0=None, e_j=topo.e_j, e_s=topo.e_s,
            )
            m1 = build_hamiltonian(with_trapped)
            m2 = build_hamiltonian(with_ext)
            part = m1.partition
            u_np = part.u.m.to_numpy().astype(float)
            w_np = part.w.m.to_numpy().astype(float)
            nu_red = u_np @ nu
            mu_red = w_np @ mu
            k = m1.k
            for _ in range(20):
                pt = random_point(m1, rng)
                pt2 = {
                    "Q": pt["Q"] - TWO_E * nu_red[:k],
                    "P": pt["P"] - PHI0 * mu_red[:k],
                    "n": pt["n"] - np.round(nu_red[k:]),
                    "phi": pt["phi"],
                    "m": pt["m"] - np.round(mu_red[k:]),
                    "q": pt["q"],
                }
                h1 = evaluate_hamiltonian(m1, pt)
                h2 = evaluate_hamiltonian(m2, pt2)
                assert np.isclose(h1, h2, rtol=1e-10, atol=1e-10 * max(abs(h1), GHZ))


class TestBasisIndependence:
    @pytest.mark.parametrize("fixture", ["fluxonium", "mixed", "slip_pair"])
    def test_random_unimodular_pre_transform(self, fixture, request):
        topo = request.getfixturevalue(fixture)
        rng = np.random.default_rng(len(fixture))
        for trial in range(8):
            u = _random_unimodular(rng, topo.num_nodes)
            w = _random_unimodular(rng, topo.num_loops)
            moved = apply_basis_change(topo, u, w)
            m1 = build_hamiltonian(topo)
            m2 = build_hamiltonian(moved)
            red1, part1 = classify_and_reduce(topo)
            red2, part2 = classify_and_reduce(moved)
            assert (part1.k, part1.j, part1.s) == (part2.k, part2.j, part2.s)
            for _ in range(6):
                n_j = rng.integers(-2, 3, size=red1.num_junctions).astype(float)
                m_s = rng.integers(-2, 3, size=red1.num_slips).astype(float)
                (phi1, q1, pi1, p1), pt1 = shell_state_and_point(red1, part1, rng, n_j, m_s)
                # carry the full canonical state through the chained bases
                u1t = part1.u.m.to_numpy().astype(float).T
                w1t = part1.w.m.to_numpy().astype(float).T
                phi_o = u1t @ phi1
                pi_o = part1.u.m_inv.to_numpy().astype(float) @ pi1
                q_o = w1t @ q1
                p_o = part1.w.m_inv.to_numpy().astype(float) @ p1
                u_np = u.m.to_numpy().astype(float)
                w_np = w.m.to_numpy().astype(float)
                phi_m = np.linalg.solve(u_np.T, phi_o)
                pi_m = u_np @ pi_o
                q_m = np.linalg.solve(w_np.T, q_o)
                p_m = w_np @ p_o
                u2 = part2.u.m.to_numpy().astype(float)
                w2 = part2.w.m.to_numpy().astype(float)
                phi2 = np.linalg.solve(u2.T, phi_m)
                pi2 = u2 @ pi_m
                q2 = np.linalg.solve(w2.T, q_m)
                p2 = w2 @ p_m
                k = part2.k
                n2 = pi2[k:] / TWO_E
                m2_counts = p2[k:] / PHI0
                assert np.allclose(n2, np.round(n2), atol=1e-6)
                assert np.allclose(m2_counts, np.round(m2_counts), atol=1e-6)
                pt2 = {
                    "Q": q2[:k] + pi2[:k],
                    "P": p2[:k],
                    "n": np.round(n2),
                    "phi": (2 * np.pi / PHI0) * phi2[k:],
                    "m": np.round(m2_counts),
                    "q": (2 * np.pi / TWO_E) * q2[k:],
                }
                h1 = evaluate_hamiltonian(m1, pt1)
                h2 = evaluate_hamiltonian(m2, pt2)
                assert abs(h1 - h2) <= 1e-10 * max(abs(h1), GHZ)


class TestZeroLimits:
    def test_noop(self, fluxonium):
        out, rec = apply_zero_limits(fluxonium)
        assert rec.trivial
        assert out.omega == fluxonium.omega

    def test_squid_flux_moves_to_cosines(self, squid):
        out, rec = apply_zero_limits(squid, zero_ind_loops=[0])
        assert out.num_loops == 0
        assert out.num_nodes == 1
        assert rec.flux_pairs == ((1, 0),)
        # the two junction phases differ by exactly the loop frustration
        delta = out.junction_phase[1] - out.junction_phase[0]
        frustration = 2 * np.pi * squid.phi_ext[0] / PHI0
        assert np.isclose(abs(delta), abs(frustration), rtol=1e-12)
        # flux no longer appears anywhere else
        assert out.phi_ext.size == 0

    def test_junction_parallel_cap_limit_rejected(self, fluxonium):
        with pytest.raises(QuantizeError, match="junction"):
            apply_zero_limits(fluxonium, zero_cap_nodes=[0])

    def test_slip_series_ind_limit_rejected(self, fluxonium):
        with pytest.raises(QuantizeError, match="phase slip"):
            apply_zero_limits(fluxonium, zero_ind_loops=[0])

    def test_scalar_gamma_shift(self):
        """One junction node capacitively coupled to a flux-constrained
        node: the cosine argument shifts by (c14/c11) * drive."""
        cj, c_c, c_g = 5e-15, 2e-15, 8e-15
        phi_ext = 0.2 * PHI0
        net = BranchNetlist(
            branches=(
                Branch("josephson", 0, 1, value=cj, energy=5 * GHZ, label="j1"),
                Branch("capacitor", 1, 2, value=c_c, label="cc"),
                Branch("capacitor", 0, 2, value=c_g, label="cg"),
                Branch("inductor", 0, 2, value=1e-10, label="lz"),
            ),
            external_flux={"lz": phi_ext},
        )
        topo = build_topology(net)
        out, rec = apply_zero_limits(topo, zero_ind_loops=[0])
        assert rec.flux_pairs == ((1, 0),)
        c11 = cj + c_c
        c14 = -c_c
        gamma = c14 / c11
        d = -phi_ext  # constrained flux value
        want = -(2 * np.pi / PHI0) * gamma * d
        assert np.isclose(out.junction_phase[0], want, rtol=1e-12)

    def test_zero_capacitance_charge_dual(self):
        """Two phase slips joining an island whose capacitance vanishes:
        the external charge moves into the slip phases (charge frustration),
        the dual of the flux-frustrated loop."""
        q_ext = 0.35 * TWO_E
        net = BranchNetlist(
            branches=(
                Branch("capacitor", 0, 1, value=1.5e-15, label="c1"),
                Branch("phase_slip", 0, 1, value=1.2e-7, energy=0.25 * GHZ, label="sa"),
                Branch("phase_slip", 1, 0, value=0.9e-7, energy=0.35 * GHZ, label="sb"),
            ),
            external_charge={1: q_ext},
        )
        topo = build_topology(net)
        out, rec = apply_zero_limits(topo, zero_cap_nodes=[0])
        assert out.num_nodes == 0
        assert out.num_loops == 1
        assert len(rec.charge_pairs) == 1
        delta = out.slip_phase[1] - out.slip_phase[0]
        frustration = 2 * np.pi * q_ext / TWO_E
        assert np.isclose(abs(delta) % (2 * np.pi), frustration % (2 * np.pi), rtol=1e-10)
        assert out.q_ext.size == 0

    def test_limit_matches_small_inductance_dynamics(self):
        """The zero-inductance model is the small-inductance limit of the
        full dynamics: junction sine arguments converge as the loop
        inductance shrinks."""
        from nodeloop.dynamics import InitialState, integrate

        limit_topo, rec = apply_zero_limits(build_topology(squid_netlist(1e-10)), zero_ind_loops=[0])
        t_end, dt = 3.0e-10, 2.0e-14
        phi10 = 0.05 * PHI0

        # irrotational gauge: the retained flux is shifted by gamma @ drive
        phi_lim0 = phi10 + (rec.gamma @ rec.flux_drives).item()
        lim_init = InitialState(np.array([phi_lim0]), np.zeros(0), np.zeros(1), np.zeros(0))
        lim = integrate(limit_topo, lim_init, t_end, dt)
        arg_lim = (2 * np.pi / PHI0) * lim.junction_flux + limit_topo.junction_phase

        devs = []
        for loop_l in (3e-11, 1e-11):
            full = build_topology(squid_netlist(loop_l))
            pinned = -full.phi_ext[0]  # constrained flux of node 2
            init = InitialState(
                np.array([phi10, pinned]), np.zeros(1), np.zeros(2), np.zeros(1)
            )
            traj = integrate(full, init, t_end, dt)
            arg_full = (2 * np.pi / PHI0) * traj.junction_flux
            devs.append(np.max(np.abs(np.sin(arg_full) - np.sin(arg_lim))))
        assert devs[1] < devs[0]
        assert devs[1] < 5e-3
