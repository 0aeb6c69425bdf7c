"""Shared circuit fixtures.

All values SI.  The four-node coupler drives the step-by-step decomposition
checks; the single-node junction+slip loop is the minimal circuit with both
tunneling kinds.
"""

from __future__ import annotations

import numpy as np
import pytest

from nodeloop.constants import FLUX_QUANTUM, PLANCK
from nodeloop.graphs import Branch, BranchNetlist, build_topology

GHZ = PLANCK * 1e9  # energy of a 1 GHz quantum [J]


def fluxonium_netlist(q_ext: float = 0.0, phi_ext: float = 0.0) -> BranchNetlist:
    """Junction in parallel with a capacitor, across an inductive branch
    carrying fluxon tunneling."""
    return BranchNetlist(
        branches=(
            Branch("josephson", 0, 1, value=1.2e-14, energy=4.0 * GHZ, label="j1"),
            Branch("phase_slip", 0, 1, value=1.5e-7, energy=0.3 * GHZ, label="s1"),
        ),
        external_charge={1: q_ext} if q_ext else {},
        external_flux={"s1": phi_ext} if phi_ext else {},
    )


@pytest.fixture
def fluxonium():
    return build_topology(fluxonium_netlist())


def coupler_netlist() -> BranchNetlist:
    """Four-node, three-junction, two-inductor coupler.

    Junction ordering pins the edge network matrix to
    [[0,0],[-1,-1],[1,0],[1,1]], the sequence the acceptance suite replays
    step by step.
    """
    return BranchNetlist(
        branches=(
            Branch("josephson", 2, 1, value=2e-15, energy=8.0 * GHZ, label="ja"),
            Branch("josephson", 3, 4, value=2e-15, energy=7.0 * GHZ, label="jb"),
            Branch("josephson", 3, 2, value=2e-15, energy=6.0 * GHZ, label="jc"),
            Branch("capacitor", 0, 4, value=5e-14, label="c4"),
            Branch("inductor", 0, 2, value=8e-10, label="l1"),
            Branch("inductor", 0, 3, value=1.1e-9, label="l2"),
        )
    )


@pytest.fixture
def coupler():
    return build_topology(coupler_netlist())


def mixed_netlist() -> BranchNetlist:
    """Junction, phase slip, and an LC pair: one of everything."""
    return BranchNetlist(
        branches=(
            Branch("josephson", 0, 1, value=6e-15, energy=5.0 * GHZ, label="j1"),
            Branch("capacitor", 1, 2, value=1.5e-14, label="c12"),
            Branch("capacitor", 2, 0, value=3e-14, label="c20"),
            Branch("inductor", 1, 2, value=2e-9, label="l1"),
            Branch("phase_slip", 2, 0, value=9e-8, energy=0.2 * GHZ, label="s1"),
        )
    )


@pytest.fixture
def mixed():
    return build_topology(mixed_netlist())


def squid_netlist(loop_l: float = 3e-10) -> BranchNetlist:
    """Two junctions sharing a loop closed by a small inductor."""
    return BranchNetlist(
        branches=(
            Branch("josephson", 0, 1, value=3e-15, energy=9.0 * GHZ, label="j1"),
            Branch("josephson", 2, 1, value=3e-15, energy=8.5 * GHZ, label="j2"),
            Branch("capacitor", 0, 1, value=4e-14, label="cs"),
            Branch("inductor", 0, 2, value=loop_l, label="lloop"),
        ),
        external_flux={"lloop": 0.3 * FLUX_QUANTUM},
    )


@pytest.fixture
def squid():
    return build_topology(squid_netlist())


def slip_pair_netlist() -> BranchNetlist:
    """Two phase slips joining one capacitive island: the slip dual of a
    two-junction loop."""
    return BranchNetlist(
        branches=(
            Branch("capacitor", 0, 1, value=2e-14, label="c1"),
            Branch("phase_slip", 0, 1, value=1.2e-7, energy=0.25 * GHZ, label="sa"),
            Branch("phase_slip", 1, 0, value=0.9e-7, energy=0.35 * GHZ, label="sb"),
        )
    )


@pytest.fixture
def slip_pair():
    return build_topology(slip_pair_netlist())


def lc_netlist(c: float = 1e-12, l: float = 1e-9) -> BranchNetlist:
    return BranchNetlist(
        branches=(
            Branch("capacitor", 0, 1, value=c, label="c1"),
            Branch("inductor", 0, 1, value=l, label="l1"),
        )
    )


@pytest.fixture
def lc_oscillator():
    return build_topology(lc_netlist())


def lc_mesh_netlist() -> BranchNetlist:
    """Purely linear two-node, two-loop network with coupling."""
    return BranchNetlist(
        branches=(
            Branch("capacitor", 0, 1, value=2e-12, label="ca"),
            Branch("capacitor", 1, 2, value=1e-12, label="cb"),
            Branch("capacitor", 2, 0, value=3e-12, label="cc"),
            Branch("inductor", 0, 1, value=2e-9, label="la"),
            Branch("inductor", 1, 2, value=5e-9, label="lb"),
        )
    )


@pytest.fixture
def lc_mesh():
    return build_topology(lc_mesh_netlist())


def transmon_netlist(q_ext: float = 0.0) -> BranchNetlist:
    return BranchNetlist(
        branches=(
            Branch("josephson", 0, 1, value=6.5e-14, energy=12.0 * GHZ, label="j1"),
        ),
        external_charge={1: q_ext} if q_ext else {},
    )


@pytest.fixture
def transmon():
    return build_topology(transmon_netlist())


def invariance_fixture_netlists():
    """The five circuits used for the trajectory-invariance checks."""
    return {
        "fluxonium": fluxonium_netlist(),
        "coupler": coupler_netlist(),
        "mixed": mixed_netlist(),
        "squid": squid_netlist(),
        "slip_pair": slip_pair_netlist(),
    }
