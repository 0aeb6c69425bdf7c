"""Reciprocal lumped-element superconducting circuit toolkit.

Node/loop circuit graphs with exact integer network matrices, Hamiltonian
generation, fundamental decomposition via structure-preserving pivots, and
transformerless model extraction from hybrid response data.
"""

from .constants import COOPER_PAIR_CHARGE, FLUX_QUANTUM
from .graphs import (
    Branch,
    BranchNetlist,
    CircuitTopology,
    TreeCotree,
    apply_basis_change,
    build_topology,
    find_tree_cotree,
    load_netlist,
    netlist_from_dict,
    validate,
)
from .intlin import IntMatrix, UnimodularTransform

__all__ = [
    "Branch",
    "BranchNetlist",
    "CircuitTopology",
    "COOPER_PAIR_CHARGE",
    "FLUX_QUANTUM",
    "IntMatrix",
    "TreeCotree",
    "UnimodularTransform",
    "apply_basis_change",
    "build_topology",
    "find_tree_cotree",
    "load_netlist",
    "netlist_from_dict",
    "validate",
]

__version__ = "0.1.0"
