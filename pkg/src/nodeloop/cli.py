"""Command-line front end.

Reports are JSON on stdout, diagnostics on stderr.  Exit codes: 0 success,
1 domain violation, 2 I/O or parse failure, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from typing import List, Optional

import numpy as np

from . import decompose, dynamics, extract, graphs, quantize
from .graphs import BranchNetlist, CircuitTopology, NetlistError, TopologyError

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_PARSE = 2
EXIT_NUMERIC = 3


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _emit(data) -> None:
    json.dump(data, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")


def _load_topology(path: str) -> CircuitTopology:
    try:
        loaded = graphs.load_netlist(path)
    except (OSError, json.JSONDecodeError, KeyError, ValueError) as exc:
        if isinstance(exc, (TopologyError,)):
            raise CliError(str(exc), EXIT_DOMAIN) from exc
        raise CliError(f"cannot parse netlist {path}: {exc}", EXIT_PARSE) from exc
    if isinstance(loaded, BranchNetlist):
        try:
            return graphs.build_topology(loaded)
        except (NetlistError, TopologyError) as exc:
            raise CliError(str(exc), EXIT_DOMAIN) from exc
    return loaded


def cmd_validate(args) -> int:
    topo = _load_topology(args.netlist)
    diag = graphs.validate(topo)
    _emit(diag.to_dict())
    return EXIT_OK if diag.ok else EXIT_DOMAIN


def cmd_quantize(args) -> int:
    topo = _load_topology(args.netlist)
    diag = graphs.validate(topo)
    if not diag.ok and not (args.zero_cap or args.zero_ind):
        print(f"validation failed: {diag.to_dict()}", file=sys.stderr)
        return EXIT_DOMAIN
    record = None
    if args.zero_cap or args.zero_ind:
        try:
            topo, record = quantize.apply_zero_limits(topo, args.zero_cap, args.zero_ind)
        except quantize.QuantizeError as exc:
            raise CliError(str(exc), EXIT_DOMAIN) from None
    try:
        model = quantize.build_hamiltonian(topo)
    except (quantize.QuantizeError, np.linalg.LinAlgError) as exc:
        raise CliError(str(exc), EXIT_NUMERIC) from None
    if args.standard_notation:
        model = model.with_standard_notation()
    report = model.to_dict()
    if record is not None and not record.trivial:
        report["zero_limits"] = {
            "flux_constrained_nodes": [p for p, _ in record.flux_pairs],
            "charge_constrained_loops": [q for q, _ in record.charge_pairs],
            "dropped_nodes": list(record.dropped_nodes),
            "dropped_loops": list(record.dropped_loops),
        }
    if model.free_modes is not None and not model.free_modes.trivial:
        report["removed_free_modes"] = {
            "islands": list(model.free_modes.alpha_nodes),
            "loops": list(model.free_modes.beta_loops),
        }
    _emit(report)
    return EXIT_OK


def cmd_decompose(args) -> int:
    topo = _load_topology(args.netlist)
    diag = graphs.validate(topo)
    if not diag.ok:
        print(f"validation failed: {diag.to_dict()}", file=sys.stderr)
        return EXIT_DOMAIN
    tc = graphs.find_tree_cotree(topo)
    es = decompose.to_edge_basis(topo, tc)
    final, ff = decompose.fundamental_decomposition(es)
    steps = [
        {"op": st.kind, "row": st.i, "col": st.j, "matrix": st.snapshot.to_lists()}
        for st in final.history
    ]
    try:
        signature = decompose.canonical_signature(ff).to_dict()
    except decompose.UnsupportedSizeError:
        signature = None
    report = {
        "steps": steps,
        "fundamental_form": {
            "junctions": ff.j,
            "phase_slips": ff.s,
            "inductor_branches": ff.f,
            "capacitor_branches": ff.p,
            "harmonic_modes": ff.r,
            "free_islands": ff.alpha,
            "free_loops": ff.beta,
            "block_matrix": ff.block_matrix().to_lists(),
            "omega_js": ff.omega_js.to_lists(),
            "omega_jf": ff.omega_jf.to_lists(),
            "omega_ps": ff.omega_ps.to_lists(),
        },
        "signature": signature,
        "edge_matrix": final.omega_e.to_lists(),
    }
    if args.replay:
        for st in final.history:
            where = "" if st.i < 0 else f" at ({st.i}, {st.j})"
            print(f"{st.kind}{where}: {st.snapshot.to_lists()}", file=sys.stderr)
    _emit(report)
    return EXIT_OK


def cmd_classify(args) -> int:
    topo = _load_topology(args.netlist)
    diag = graphs.validate(topo)
    if not diag.ok:
        print(f"validation failed: {diag.to_dict()}", file=sys.stderr)
        return EXIT_DOMAIN
    tc = graphs.find_tree_cotree(topo)
    es = decompose.to_edge_basis(topo, tc)
    _final, ff = decompose.fundamental_decomposition(es)
    try:
        sig = decompose.canonical_signature(ff)
    except decompose.UnsupportedSizeError as exc:
        raise CliError(str(exc), EXIT_DOMAIN) from None
    _emit({"signature": sig.to_dict()})
    return EXIT_OK


def _load_samples(path: str, n_cap: Optional[int], n_ind: Optional[int]) -> extract.HybridSamples:
    if path.endswith(".json"):
        with open(path) as fh:
            data = json.load(fh)
        if "poles" in data:
            raise CliError("file holds a pole-residue model; use it directly", EXIT_PARSE)
        return extract.HybridSamples(
            n_cap=int(data["c_ports"]),
            n_ind=int(data["l_ports"]),
            omegas=np.array(data["omegas"], dtype=float),
            matrices=np.array(data["real"], dtype=float) + 1j * np.array(data["imag"], dtype=float),
        )
    if n_cap is None or n_ind is None:
        raise CliError("CSV input needs --c-ports and --l-ports", EXIT_PARSE)
    size = n_cap + n_ind
    omegas: List[float] = []
    mats: List[np.ndarray] = []
    with open(path) as fh:
        for row in csv.reader(fh):
            if not row or row[0].startswith("#"):
                continue
            vals = [float(v) for v in row]
            if len(vals) != 1 + 2 * size * size:
                raise CliError(
                    f"CSV row needs 1 + 2*{size}^2 = {1 + 2 * size * size} values", EXIT_PARSE
                )
            omegas.append(vals[0])
            re = np.array(vals[1 : 1 + size * size]).reshape(size, size)
            im = np.array(vals[1 + size * size :]).reshape(size, size)
            mats.append(re + 1j * im)
    return extract.HybridSamples(
        n_cap=n_cap, n_ind=n_ind, omegas=np.array(omegas), matrices=np.array(mats)
    )


def cmd_extract(args) -> int:
    try:
        if args.response.endswith(".json"):
            with open(args.response) as fh:
                data = json.load(fh)
        else:
            data = None
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(f"cannot read {args.response}: {exc}", EXIT_PARSE) from None
    try:
        if data is not None and "poles" in data:
            model = extract.PoleResidueModel.from_dict(data)
            residual = 0.0
        else:
            samples = _load_samples(args.response, args.c_ports, args.l_ports)
            model, residual = extract.fit_pole_residue(samples, args.poles)
    except extract.LosslessnessError as exc:
        raise CliError(str(exc), EXIT_DOMAIN) from None
    except extract.ExtractionError as exc:
        raise CliError(str(exc), EXIT_NUMERIC) from None
    except (OSError, KeyError, ValueError) as exc:
        raise CliError(f"cannot parse response data: {exc}", EXIT_PARSE) from None
    circuit = extract.synthesize(model)
    elements = {"junctions": [], "slips": [], "charge_drives": {}, "flux_drives": {}}
    if args.elements:
        try:
            with open(args.elements) as fh:
                elements.update(json.load(fh))
        except (OSError, json.JSONDecodeError) as exc:
            raise CliError(f"cannot read elements file: {exc}", EXIT_PARSE) from None
    topo = extract.reinsert_elements(
        circuit,
        junctions=[tuple(j) for j in elements.get("junctions", [])],
        slips=[tuple(s) for s in elements.get("slips", [])],
        charge_drives=elements.get("charge_drives", {}),
        flux_drives=elements.get("flux_drives", {}),
    )
    report = {
        "matrix_form": topo.to_dict(),
        "extract_report": {
            "circuit": circuit.to_dict(),
            "pole_frequencies": [w for w, _, _ in model.poles],
            "fit_residual": residual,
        },
    }
    if args.plot:
        _plot_fit(args, model)
    _emit(report)
    return EXIT_OK


def _plot_fit(args, model) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    samples = _load_samples(args.response, args.c_ports, args.l_ports)
    fitted = np.array([extract.eval_hybrid(model, 1j * w) for w in samples.omegas])
    mag_data = np.linalg.norm(samples.matrices, axis=(1, 2))
    mag_fit = np.linalg.norm(fitted, axis=(1, 2))
    fig, ax = plt.subplots()
    ax.semilogy(samples.omegas / (2 * np.pi), mag_data, label="data")
    ax.semilogy(samples.omegas / (2 * np.pi), mag_fit, "--", label="fit")
    ax.set_xlabel("frequency [Hz]")
    ax.set_ylabel("|H| (Frobenius)")
    ax.legend()
    fig.savefig(args.plot, dpi=150)
    plt.close(fig)


def cmd_simulate(args) -> int:
    topo = _load_topology(args.netlist)
    n, l = topo.omega.shape
    initial = dynamics.InitialState.zeros(topo)
    if args.initial:
        try:
            with open(args.initial) as fh:
                data = json.load(fh)
            initial = dynamics.InitialState(
                phi=np.array(data.get("phi", np.zeros(n)), dtype=float),
                q=np.array(data.get("q", np.zeros(l)), dtype=float),
                phi_dot=np.array(data.get("phi_dot", np.zeros(n)), dtype=float),
                q_dot=np.array(data.get("q_dot", np.zeros(l)), dtype=float),
            )
        except (OSError, json.JSONDecodeError, ValueError) as exc:
            raise CliError(f"cannot read initial state: {exc}", EXIT_PARSE) from None
    try:
        traj = dynamics.integrate(topo, initial, args.t_end, args.dt)
    except dynamics.DynamicsError as exc:
        raise CliError(str(exc), EXIT_NUMERIC) from None
    writer = csv.writer(sys.stdout)
    header = (
        ["t"]
        + [f"phi_{i+1}" for i in range(n)]
        + [f"q_{i+1}" for i in range(l)]
        + [f"phi_dot_{i+1}" for i in range(n)]
        + [f"q_dot_{i+1}" for i in range(l)]
    )
    writer.writerow(header)
    for idx, t in enumerate(traj.times):
        writer.writerow(
            [f"{t:.12e}"]
            + [f"{v:.12e}" for v in traj.phi[idx]]
            + [f"{v:.12e}" for v in traj.q[idx]]
            + [f"{v:.12e}" for v in traj.phi_dot[idx]]
            + [f"{v:.12e}" for v in traj.q_dot[idx]]
        )
    if args.plot:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        fig, ax = plt.subplots()
        for i in range(n):
            ax.plot(traj.times, traj.phi[:, i], label=f"node flux {i+1}")
        for i in range(l):
            ax.plot(traj.times, traj.q[:, i], "--", label=f"loop charge {i+1}")
        ax.set_xlabel("t [s]")
        ax.legend()
        fig.savefig(args.plot, dpi=150)
        plt.close(fig)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nodeloop",
        description="Reciprocal lumped superconducting circuits: validation, "
        "quantization, decomposition, classification, model extraction, simulation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a netlist against the model constraints")
    p.add_argument("netlist")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("quantize", help="emit the structured Hamiltonian")
    p.add_argument("netlist")
    p.add_argument("--zero-cap", type=int, action="append", default=[], metavar="NODE",
                   help="take the zero-capacitance limit at this node index")
    p.add_argument("--zero-ind", type=int, action="append", default=[], metavar="LOOP",
                   help="take the zero-inductance limit in this loop index")
    p.add_argument("--standard-notation", action="store_true",
                   help="relabel extended fluxes as Phi = -P")
    p.set_defaults(func=cmd_quantize)

    p = sub.add_parser("decompose", help="fundamental decomposition of the circuit")
    p.add_argument("netlist")
    p.add_argument("--replay", action="store_true", help="narrate each step on stderr")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("classify", help="canonical class of the fundamental form")
    p.add_argument("netlist")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("extract", help="fit response data and synthesize a circuit")
    p.add_argument("response", help="CSV samples, sample JSON, or pole-residue JSON")
    p.add_argument("--poles", type=int, default=0, help="number of finite poles to fit")
    p.add_argument("--c-ports", type=int, default=None)
    p.add_argument("--l-ports", type=int, default=None)
    p.add_argument("--elements", help="JSON file of junctions/slips/drives to reinsert")
    p.add_argument("--plot", help="write a |H| data-vs-fit overlay image")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("simulate", help="integrate the classical equations of motion")
    p.add_argument("netlist")
    p.add_argument("--t-end", type=float, required=True)
    p.add_argument("--dt", type=float, required=True)
    p.add_argument("--initial", help="JSON file with phi/q/phi_dot/q_dot arrays")
    p.add_argument("--plot", help="write a trajectory plot image")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(str(exc), file=sys.stderr)
        return exc.code
    except (NetlistError, TopologyError) as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_DOMAIN
    except BrokenPipeError:
        try:
            sys.stdout.close()
        except OSError:
            pass
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
