"""Lumped-model extraction from hybrid admittance/impedance response data.

A lossless reciprocal multiport with capacitive (shunt) and inductive
(series) ports tied to a tree/cotree placement has a hybrid response that
is fully described by: an integer constant block (the edge network matrix),
linear-in-s residues (the core capacitance/inductance), and finite
imaginary-axis pole pairs whose PSD residues factor into real per-port
participation vectors.  Matching those pieces with a lumped circuit --
core C/L matrices plus one auxiliary LC resonator per participation pair --
reproduces the response exactly and without transformers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .graphs import CircuitTopology
from .intlin import IntMatrix
from .numeric import cholesky_pd_check


class ExtractionError(ValueError):
    pass


class LosslessnessError(ExtractionError):
    pass


# ---------------------------------------------------------------------------
# Data containers


@dataclass(frozen=True)
class HybridSamples:
    """Sampled hybrid matrix response.

    ``matrices[i]`` is the (nc+nl) x (nc+nl) complex response at angular
    frequency ``omegas[i]``: admittance block (capacitive ports) top-left,
    impedance block (inductive ports) bottom-right, dimensionless couplings
    off-diagonal.
    """

    n_cap: int
    n_ind: int
    omegas: np.ndarray  # [rad/s], strictly increasing, >= 0
    matrices: np.ndarray  # complex, (count, nc+nl, nc+nl)
    cap_labels: Tuple[str, ...] = ()
    ind_labels: Tuple[str, ...] = ()

    def __post_init__(self):
        om = np.asarray(self.omegas, dtype=float)
        mats = np.asarray(self.matrices, dtype=complex)
        size = self.n_cap + self.n_ind
        if mats.shape != (om.size, size, size):
            raise ExtractionError(f"matrix block must be ({om.size}, {size}, {size})")
        if np.any(om < 0.0) or np.any(np.diff(om) <= 0.0):
            raise ExtractionError("frequencies must be non-negative and strictly increasing")
        if not np.all(np.isfinite(mats)):
            raise ExtractionError("response samples contain non-finite entries")
        object.__setattr__(self, "omegas", om)
        object.__setattr__(self, "matrices", mats)
        if not self.cap_labels:
            object.__setattr__(self, "cap_labels", tuple(f"C{i+1}" for i in range(self.n_cap)))
        if not self.ind_labels:
            object.__setattr__(self, "ind_labels", tuple(f"L{i+1}" for i in range(self.n_ind)))


@dataclass(frozen=True)
class PoleResidueModel:
    """Rational hybrid response: constant integer block, poles at infinity,
    and finite-pole participation vectors."""

    omega_e: IntMatrix  # nc x nl
    kcc_inf: np.ndarray  # [F] nc x nc, positive definite
    kll_inf: np.ndarray  # [H] nl x nl, positive definite
    poles: Tuple[Tuple[float, np.ndarray, np.ndarray], ...]  # (omega_r, r_c, r_l)
    cap_labels: Tuple[str, ...] = ()
    ind_labels: Tuple[str, ...] = ()

    def __post_init__(self):
        nc, nl = self.omega_e.shape
        object.__setattr__(self, "kcc_inf", np.asarray(self.kcc_inf, dtype=float).reshape(nc, nc))
        object.__setattr__(self, "kll_inf", np.asarray(self.kll_inf, dtype=float).reshape(nl, nl))
        fixed = []
        for w_r, r_c, r_l in self.poles:
            if w_r <= 0.0:
                raise ExtractionError("pole frequencies must be positive")
            r_c = np.asarray(r_c, dtype=float).reshape(nc)
            r_l = np.asarray(r_l, dtype=float).reshape(nl)
            # participation pair sign is gauge; fix it so synthesized
            # matrices are reproducible
            lead_vec = r_c if np.linalg.norm(r_c) > 0 else r_l
            if lead_vec.size and lead_vec[np.argmax(np.abs(lead_vec))] < 0:
                r_c, r_l = -r_c, -r_l
            fixed.append((float(w_r), r_c, r_l))
        object.__setattr__(self, "poles", tuple(fixed))
        if not self.omega_e.entries_in_unit_range():
            raise ExtractionError("constant block entries must be -1, 0, +1")
        if nc and not cholesky_pd_check(self.kcc_inf):
            raise ExtractionError("capacitive infinity residue must be positive definite")
        if nl and not cholesky_pd_check(self.kll_inf):
            raise ExtractionError("inductive infinity residue must be positive definite")
        if not self.cap_labels:
            object.__setattr__(self, "cap_labels", tuple(f"C{i+1}" for i in range(nc)))
        if not self.ind_labels:
            object.__setattr__(self, "ind_labels", tuple(f"L{i+1}" for i in range(nl)))

    @property
    def n_cap(self) -> int:
        return self.omega_e.rows

    @property
    def n_ind(self) -> int:
        return self.omega_e.cols

    def to_dict(self) -> dict:
        return {
            "network_matrix": self.omega_e.to_lists(),
            "kcc_inf": self.kcc_inf.tolist(),
            "kll_inf": self.kll_inf.tolist(),
            "poles": [
                {"omega": w, "r_cap": rc.tolist(), "r_ind": rl.tolist()}
                for w, rc, rl in self.poles
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PoleResidueModel":
        omega_e = IntMatrix(d["network_matrix"]) if d["network_matrix"] else IntMatrix.zeros(0, 0)
        return cls(
            omega_e=omega_e,
            kcc_inf=np.array(d["kcc_inf"], dtype=float),
            kll_inf=np.array(d["kll_inf"], dtype=float),
            poles=tuple(
                (p["omega"], np.array(p["r_cap"], dtype=float), np.array(p["r_ind"], dtype=float))
                for p in d.get("poles", [])
            ),
        )


@dataclass(frozen=True)
class SynthesizedCircuit:
    """Lumped realization: core ports plus one LC resonator per pole pair."""

    omega_e: IntMatrix  # (nc+r) x (nl+r), core block plus identity resonator block
    c: np.ndarray  # [F] (nc+r) x (nc+r)
    l: np.ndarray  # [H] (nl+r) x (nl+r)
    n_cap: int
    n_ind: int
    resonators: Tuple[Tuple[float, float, float], ...]  # (omega_r, c_rr, l_rr)
    cap_labels: Tuple[str, ...] = ()
    ind_labels: Tuple[str, ...] = ()

    @property
    def n_res(self) -> int:
        return len(self.resonators)

    def to_dict(self) -> dict:
        return {
            "network_matrix": self.omega_e.to_lists(),
            "capacitance": self.c.tolist(),
            "inductance": self.l.tolist(),
            "ports": {
                "capacitive": list(self.cap_labels) or [f"C{i+1}" for i in range(self.n_cap)],
                "inductive": list(self.ind_labels) or [f"L{i+1}" for i in range(self.n_ind)],
            },
            "resonators": [
                {"omega": w, "c": c_rr, "l": l_rr} for w, c_rr, l_rr in self.resonators
            ],
        }


# ---------------------------------------------------------------------------
# Response evaluation


def eval_hybrid_model(model: PoleResidueModel, s: complex) -> np.ndarray:
    """Hybrid matrix of the pole-residue expansion at Laplace point ``s``."""
    nc, nl = model.n_cap, model.n_ind
    size = nc + nl
    omega_np = model.omega_e.to_numpy().astype(float)
    h = np.zeros((size, size), dtype=complex)
    h[:nc, nc:] = -omega_np
    h[nc:, :nc] = omega_np.T
    cap_sum = model.kcc_inf.copy()
    ind_sum = model.kll_inf.copy()
    for w_r, r_c, r_l in model.poles:
        cap_sum += np.outer(r_c, r_c)
        ind_sum += np.outer(r_l, r_l)
    h[:nc, :nc] += s * cap_sum
    h[nc:, nc:] += s * ind_sum
    for w_r, r_c, r_l in model.poles:
        denom = s * s + w_r * w_r
        if abs(denom) < 1e-12 * w_r * w_r:
            raise ExtractionError(f"evaluation at pole frequency {w_r:.6e}")
        pref = s * s / denom
        h[:nc, :nc] += pref * (-s) * np.outer(r_c, r_c)
        h[:nc, nc:] += pref * (-w_r) * np.outer(r_c, r_l)
        h[nc:, :nc] += pref * w_r * np.outer(r_l, r_c)
        h[nc:, nc:] += pref * (-s) * np.outer(r_l, r_l)
    return h


def eval_hybrid_circuit(circuit: SynthesizedCircuit, s: complex) -> np.ndarray:
    """Hybrid matrix of the lumped circuit, by eliminating the resonator
    equations of motion at Laplace point ``s``.

    This is an independent evaluation route from the pole-residue formula:
    it solves each auxiliary resonator's two-by-two linear system.
    """
    nc, nl, nr = circuit.n_cap, circuit.n_ind, circuit.n_res
    c_cc = circuit.c[:nc, :nc]
    c_cr = circuit.c[:nc, nc:]
    l_ll = circuit.l[:nl, :nl]
    l_lr = circuit.l[:nl, nl:]
    omega_core = circuit.omega_e.submatrix(range(nc), range(nl)).to_numpy().astype(float)
    size = nc + nl
    h = np.zeros((size, size), dtype=complex)

    def respond(v_c: np.ndarray, i_l: np.ndarray) -> np.ndarray:
        # Each auxiliary resonator row pair reads
        #   i_r = dc + s c_rr v_r,   v_r = -dl - s l_rr i_r
        # with dc = s C_rC v_C and dl = s L_rL i_L; solve the two-by-two
        # system per resonator, then read the port rows.
        i_r = np.zeros(nr, dtype=complex)
        v_r = np.zeros(nr, dtype=complex)
        for idx, (w_r, c_rr, l_rr) in enumerate(circuit.resonators):
            dc = s * complex(circuit.c[nc + idx, :nc] @ v_c)
            dl = s * complex(circuit.l[nl + idx, :nl] @ i_l)
            det = 1.0 + s * s * c_rr * l_rr
            if abs(det) < 1e-12:
                raise ExtractionError(f"evaluation at resonator frequency {w_r:.6e}")
            i_r[idx] = (dc - s * c_rr * dl) / det
            v_r[idx] = -(dl + s * l_rr * dc) / det
        i_c = s * (c_cc @ v_c) + s * (c_cr @ v_r) - omega_core @ i_l
        v_l = s * (l_ll @ i_l) + s * (l_lr @ i_r) + omega_core.T @ v_c
        return np.concatenate([i_c, v_l])

    for col in range(size):
        v_c = np.zeros(nc, dtype=complex)
        i_l = np.zeros(nl, dtype=complex)
        if col < nc:
            v_c[col] = 1.0
        else:
            i_l[col - nc] = 1.0
        h[:, col] = respond(v_c, i_l)
    return h


def eval_hybrid(obj, s: complex) -> np.ndarray:
    """Evaluate either a pole-residue model or a synthesized circuit."""
    if isinstance(obj, PoleResidueModel):
        return eval_hybrid_model(obj, s)
    if isinstance(obj, SynthesizedCircuit):
        return eval_hybrid_circuit(obj, s)
    raise TypeError(f"cannot evaluate hybrid response of {type(obj)!r}")


def sample_circuit(circuit: SynthesizedCircuit, omegas: Sequence[float]) -> HybridSamples:
    mats = np.array([eval_hybrid_circuit(circuit, 1j * w) for w in omegas])
    return HybridSamples(
        n_cap=circuit.n_cap,
        n_ind=circuit.n_ind,
        omegas=np.asarray(omegas, dtype=float),
        matrices=mats,
        cap_labels=circuit.cap_labels,
        ind_labels=circuit.ind_labels,
    )


# ---------------------------------------------------------------------------
# Diagnostics


@dataclass(frozen=True)
class LprDiagnostics:
    lossless_residuals: np.ndarray  # per sample
    symmetry_residuals: np.ndarray
    tolerance: float

    @property
    def ok(self) -> bool:
        return bool(
            np.all(self.lossless_residuals <= self.tolerance)
            and np.all(self.symmetry_residuals <= self.tolerance)
        )

    def to_dict(self) -> dict:
        return {
            "lossless_ok": bool(np.all(self.lossless_residuals <= self.tolerance)),
            "symmetry_ok": bool(np.all(self.symmetry_residuals <= self.tolerance)),
            "max_lossless_residual": float(np.max(self.lossless_residuals, initial=0.0)),
            "max_symmetry_residual": float(np.max(self.symmetry_residuals, initial=0.0)),
            "tolerance": self.tolerance,
        }


def check_lpr(samples: HybridSamples, tol: float = 1e-8) -> LprDiagnostics:
    """Check losslessness (H + H^dagger = 0 on the imaginary axis) and the
    reciprocal hybrid symmetry (symmetric diagonal blocks, negated-transpose
    off-diagonal blocks), relative to each sample's norm."""
    nc = samples.n_cap
    lossless = []
    symmetry = []
    for h in samples.matrices:
        scale = max(float(np.linalg.norm(h)), 1e-300)
        lossless.append(float(np.linalg.norm(h + h.conj().T)) / scale)
        sym = 0.0
        sym = max(sym, float(np.linalg.norm(h[:nc, :nc] - h[:nc, :nc].T)))
        sym = max(sym, float(np.linalg.norm(h[nc:, nc:] - h[nc:, nc:].T)))
        sym = max(sym, float(np.linalg.norm(h[:nc, nc:] + h[nc:, :nc].T)))
        symmetry.append(sym / scale)
    return LprDiagnostics(np.array(lossless), np.array(symmetry), tol)


# ---------------------------------------------------------------------------
# Zero-frequency constraint


def extract_zero_freq(
    source, round_tol: float = 1e-6, fit_points: int = 5
) -> IntMatrix:
    """Integer network matrix from the zero-frequency hybrid constraint.

    Extrapolates H(0) from the lowest-frequency samples with an even
    polynomial fit per entry, checks that the diagonal blocks vanish (a
    nonzero value indicates a zero-frequency pole, i.e. a port placement
    that does not follow a tree/cotree), and rounds the off-diagonal block
    to integers in -1, 0, +1.
    """
    if isinstance(source, PoleResidueModel):
        return source.omega_e
    samples: HybridSamples = source
    nc, nl = samples.n_cap, samples.n_ind
    size = nc + nl
    count = min(max(fit_points, 3), samples.omegas.size)
    om = samples.omegas[:count]
    mats = samples.matrices[:count]
    x = om**2
    x = x / max(float(np.max(x)), 1e-300)
    basis = np.vander(x, N=3, increasing=True)  # 1, w^2, w^4 (scaled)

    # Lossless structure: Re H is even in frequency and carries the
    # constant block; Im H is odd, so Im H * w extrapolates to the residue
    # of a zero-frequency pole (which must be absent).
    h0_real = np.zeros((size, size))
    pole_res = np.zeros((size, size))
    for i in range(size):
        for j in range(size):
            coef_re, *_ = np.linalg.lstsq(basis, mats[:, i, j].real, rcond=None)
            coef_k, *_ = np.linalg.lstsq(basis, mats[:, i, j].imag * om, rcond=None)
            h0_real[i, j] = coef_re[0]
            pole_res[i, j] = coef_k[0]
    pole_scale = float(np.max(np.abs(mats.imag * om[:, None, None])))
    if pole_scale > 0.0 and float(np.max(np.abs(pole_res))) > round_tol * pole_scale:
        raise ExtractionError(
            "the response has a zero-frequency pole; ports do not follow a "
            "tree/cotree placement"
        )
    block_scale = max(float(np.max(np.abs(h0_real))), 1.0)
    diag_resid = max(
        float(np.max(np.abs(h0_real[:nc, :nc]), initial=0.0)),
        float(np.max(np.abs(h0_real[nc:, nc:]), initial=0.0)),
    )
    if diag_resid > round_tol * block_scale:
        raise ExtractionError(
            f"H(0) diagonal blocks do not vanish (residual {diag_resid:.3e})"
        )
    block = -h0_real[:nc, nc:]
    rounded = np.round(block)
    resid = float(np.max(np.abs(block - rounded), initial=0.0))
    if resid > round_tol or np.any(np.abs(rounded) > 1):
        raise ExtractionError(
            f"H(0) coupling block is not an integer network matrix (residual {resid:.3e}); "
            "ports are not in a tree/cotree placement"
        )
    other = h0_real[nc:, :nc]
    if float(np.max(np.abs(other - rounded.T), initial=0.0)) > round_tol:
        raise ExtractionError("H(0) coupling blocks are not consistent")
    return IntMatrix.from_numpy(rounded)


# ---------------------------------------------------------------------------
# Pole-residue fitting


def _locate_poles(samples: HybridSamples, pole_count: int) -> np.ndarray:
    """Common-denominator rational fit of the admittance/impedance traces.

    The traces t(w) = Im tr H_CC / w + Im tr H_LL / w are rational in w^2
    with simple poles at the resonance frequencies; fitting
    t(x) * prod_r (x_r - x) = polynomial linearly (Levy's method) and
    rooting the denominator recovers the pole frequencies.
    """
    om = samples.omegas
    usable = om > 0.0
    om = om[usable]
    mats = samples.matrices[usable]
    nc = samples.n_cap
    trace = (
        np.einsum("kii->k", mats[:, :nc, :nc].imag)
        + np.einsum("kii->k", mats[:, nc:, nc:].imag)
    ) / om
    x = om**2
    x_scale = float(np.max(x))
    xs = x / x_scale
    p = pole_count
    # Linearized common-denominator fit (coarse scan); the caller refines
    # each root against the full fit residual.
    weights = 1.0 / np.maximum(np.abs(trace), np.median(np.abs(trace)) * 1e-3)
    rows = []
    rhs = []
    for xi, ti, wi in zip(xs, trace, weights):
        den_part = [ti * xi**m for m in range(p)]
        num_part = [-(xi**m) for m in range(p + 1)]
        rows.append(wi * np.array(den_part + num_part))
        rhs.append(wi * (-ti * xi**p * (-1.0) ** p))
    sol, *_ = np.linalg.lstsq(np.array(rows), np.array(rhs), rcond=None)
    den = np.zeros(p + 1)
    den[:p] = sol[:p]
    den[p] = (-1.0) ** p
    roots = np.roots(den[::-1])
    roots = roots[np.abs(roots.imag) < 1e-6 * np.maximum(np.abs(roots.real), 1.0)].real
    roots = roots[roots > 0.0]
    if roots.size < pole_count:
        raise ExtractionError(
            f"located only {roots.size} of {pole_count} positive pole frequencies"
        )
    poles = np.sort(np.sqrt(roots * x_scale))[:pole_count]
    return poles


def _solve_given_poles(samples: HybridSamples, omega_e: IntMatrix, poles: np.ndarray):
    """Linear residue fit for fixed pole frequencies.

    Returns (kcc, kll, per-pole CC coefficients, per-pole LL coefficients,
    per-pole coupling coefficients, relative residual)."""
    nc, nl = samples.n_cap, samples.n_ind
    om = samples.omegas
    usable = om > 0.0
    omu = om[usable]
    mats = samples.matrices[usable]

    n_basis = 1 + poles.size
    basis = np.empty((omu.size, n_basis))
    basis[:, 0] = 1.0
    for r, w_r in enumerate(poles):
        basis[:, 1 + r] = w_r**2 / (w_r**2 - omu**2)
    basis_g = np.empty((omu.size, poles.size))
    for r, w_r in enumerate(poles):
        basis_g[:, r] = omu**2 * w_r / (w_r**2 - omu**2)

    sse = 0.0

    def fit_entries(target: np.ndarray, base: np.ndarray):
        # per-sample relative weighting, floored so near-zero entries are
        # judged against the entry's overall scale
        nonlocal sse
        scale = np.maximum(np.abs(target), np.max(np.abs(target), axis=0, keepdims=True) * 1e-3)
        resid = 0.0
        flat = target.reshape(target.shape[0], -1)
        flat_scale = scale.reshape(scale.shape[0], -1)
        out = np.empty((base.shape[1], flat.shape[1]))
        for col in range(flat.shape[1]):
            w = 1.0 / flat_scale[:, col]
            a = base * w[:, None]
            b = flat[:, col] * w
            sol, *_ = np.linalg.lstsq(a, b, rcond=None)
            out[:, col] = sol
            err = a @ sol - b
            resid = max(resid, float(np.max(np.abs(err))))
            sse += float(err @ err)
        return out.reshape((base.shape[1],) + target.shape[1:]), resid

    cap_target = mats[:, :nc, :nc].imag / omu[:, None, None]
    ind_target = mats[:, nc:, nc:].imag / omu[:, None, None]
    cap_coefs, res_c = fit_entries(cap_target, basis)
    ind_coefs, res_l = fit_entries(ind_target, basis)
    residual = max(res_c, res_l)

    couple_target = mats[:, :nc, nc:].real + omega_e.to_numpy().astype(float)[None, :, :]
    if poles.size:
        couple_coefs, res_g = fit_entries(couple_target, basis_g)
        residual = max(residual, res_g)
    else:
        residual = max(residual, float(np.max(np.abs(couple_target), initial=0.0)))
        couple_coefs = np.zeros((0, nc, nl))
    return cap_coefs, ind_coefs, couple_coefs, residual, sse


def _refine_poles(
    samples: HybridSamples, omega_e: IntMatrix, poles: np.ndarray, rel_bracket: float = 2e-3
) -> np.ndarray:
    """Golden-section refinement of each pole frequency against the full
    linear-fit residual (coordinate descent with shrinking brackets)."""
    gr = (np.sqrt(5.0) - 1.0) / 2.0
    poles = poles.copy()

    def objective(candidate: np.ndarray) -> float:
        return _solve_given_poles(samples, omega_e, candidate)[4]

    for sweep in range(5):
        bracket = max(rel_bracket * 0.08**sweep, 1e-9)
        for idx in range(poles.size):
            lo = poles[idx] * (1.0 - bracket)
            hi = poles[idx] * (1.0 + bracket)
            c = hi - gr * (hi - lo)
            d = lo + gr * (hi - lo)
            trial = poles.copy()
            trial[idx] = c
            fc = objective(trial)
            trial[idx] = d
            fd = objective(trial)
            for _ in range(45):
                if fc < fd:
                    hi, d, fd = d, c, fc
                    c = hi - gr * (hi - lo)
                    trial[idx] = c
                    fc = objective(trial)
                else:
                    lo, c, fc = c, d, fd
                    d = lo + gr * (hi - lo)
                    trial[idx] = d
                    fd = objective(trial)
            poles[idx] = 0.5 * (lo + hi)
    return poles


def fit_pole_residue(
    samples: HybridSamples,
    pole_count: int,
    pole_freqs: Optional[Sequence[float]] = None,
    tol: float = 1e-6,
) -> Tuple[PoleResidueModel, float]:
    """Fit the rational hybrid model to samples.

    Pole frequencies come from a common-denominator linearized scan refined
    by golden sections against the fit residual (or are supplied
    explicitly); residues follow from linear least squares in the pole
    basis, and each finite-pole residue is factored into real
    participation vectors.  Returns the model and the relative fit
    residual.
    """
    if samples.omegas.size < 4 * (pole_count + 1):
        raise ExtractionError(
            f"need at least {4 * (pole_count + 1)} samples for {pole_count} poles"
        )
    lpr = check_lpr(samples)
    if not lpr.ok:
        raise LosslessnessError(f"samples fail the lossless/reciprocity checks: {lpr.to_dict()}")
    nc, nl = samples.n_cap, samples.n_ind
    omega_e = extract_zero_freq(samples)
    if pole_freqs is not None:
        poles = np.sort(np.asarray(pole_freqs, dtype=float))
        if poles.size != pole_count:
            raise ExtractionError("pole_freqs length must equal pole_count")
    elif pole_count:
        poles = _locate_poles(samples, pole_count)
        poles = _refine_poles(samples, omega_e, poles)
    else:
        poles = np.zeros(0)

    om = samples.omegas
    for w_r in poles:
        if np.any(np.abs(om - w_r) <= 1e-9 * w_r):
            raise ExtractionError(f"sample lies on the fitted pole at {w_r:.6e} rad/s")

    cap_coefs, ind_coefs, couple_coefs, residual, _sse = _solve_given_poles(samples, omega_e, poles)
    if residual > tol:
        raise ExtractionError(f"pole-residue fit residual {residual:.3e} exceeds {tol:.1e}")

    kcc = 0.5 * (cap_coefs[0] + cap_coefs[0].T)
    kll = 0.5 * (ind_coefs[0] + ind_coefs[0].T)
    pole_terms: List[Tuple[float, np.ndarray, np.ndarray]] = []
    for r, w_r in enumerate(poles):
        p_cc = 0.5 * (cap_coefs[1 + r] + cap_coefs[1 + r].T)
        p_ll = 0.5 * (ind_coefs[1 + r] + ind_coefs[1 + r].T)
        g = couple_coefs[r]
        k_r = np.zeros((nc + nl, nc + nl), dtype=complex)
        k_r[:nc, :nc] = p_cc
        k_r[nc:, nc:] = p_ll
        k_r[:nc, nc:] = -1j * g
        k_r[nc:, :nc] = 1j * g.T
        for r_c, r_l in decompose_residues(k_r, nc, w_r):
            pole_terms.append((float(w_r), r_c, r_l))

    model = PoleResidueModel(
        omega_e=omega_e,
        kcc_inf=kcc,
        kll_inf=kll,
        poles=tuple(pole_terms),
        cap_labels=samples.cap_labels,
        ind_labels=samples.ind_labels,
    )
    return model, residual


def decompose_residues(
    k_r: np.ndarray, n_cap: int, omega_r: float, tol: float = 1e-10
) -> List[Tuple[np.ndarray, np.ndarray]]:
    """Factor a Hermitian PSD pole residue into real participation pairs.

    The diagonal blocks must be real, the off-diagonal blocks imaginary.
    Each pair (r_c, r_l) reproduces a rank-one piece of the residue; when
    the capacitive content exceeds what the coupling explains (singular
    value below one), an extra capacitive-only vector carries the
    remainder, and symmetrically for inductive-only content.
    """
    k_r = np.asarray(k_r, dtype=complex)
    size = k_r.shape[0]
    nc = n_cap
    nl = size - nc
    if not np.allclose(k_r, k_r.conj().T, atol=tol * max(np.linalg.norm(k_r), 1e-300)):
        raise ExtractionError("pole residue is not Hermitian")
    scale = float(np.linalg.norm(k_r))
    if scale == 0.0:
        return []
    evals = np.linalg.eigvalsh(k_r)
    if evals.min() < -1e-10 * max(np.trace(k_r).real, scale):
        raise ExtractionError(
            f"pole residue at {omega_r:.4e} rad/s is not positive semi-definite "
            f"(min eigenvalue {evals.min():.3e})"
        )
    p_cc = k_r[:nc, :nc].real
    p_ll = k_r[nc:, nc:].real
    g = (1j * k_r[:nc, nc:]).real  # upper block is -i g

    def psd_factor(p: np.ndarray) -> np.ndarray:
        if p.size == 0:
            return np.zeros((p.shape[0], 0))
        vals, vecs = np.linalg.eigh(0.5 * (p + p.T))
        cut = max(np.max(vals), 0.0) * 1e-12
        keep = vals > cut
        return vecs[:, keep] * np.sqrt(vals[keep])

    f_c = psd_factor(p_cc)  # nc x a
    f_l = psd_factor(p_ll)  # nl x b
    a, b = f_c.shape[1], f_l.shape[1]
    if a and b:
        d_hat = np.linalg.pinv(f_c) @ g @ np.linalg.pinv(f_l).T
        if np.linalg.norm(f_c @ d_hat @ f_l.T - g) > 1e-8 * max(np.linalg.norm(g), 1e-30):
            raise ExtractionError("coupling block is outside the residue column spaces")
        u2, dvals, w2t = np.linalg.svd(d_hat)
        w2 = w2t.T
    elif np.linalg.norm(g) > 1e-12 * scale:
        raise ExtractionError("coupling block present without matching diagonal residue")
    else:
        u2 = np.eye(a)
        w2 = np.eye(b)
        dvals = np.zeros(0)
    u_cols = f_c @ u2  # nc x a
    w_cols = f_l @ w2  # nl x b

    pairs: List[Tuple[np.ndarray, np.ndarray]] = []
    # Singular values within noise of one (or zero) collapse to pure pairs:
    # the leftover-capacitance branch scales like sqrt of the fit error, so
    # a genuine split below this threshold is indistinguishable from noise.
    xi_tol = 1e-4
    for nu in range(max(a, b)):
        d = float(dvals[nu]) if nu < dvals.size else 0.0
        if d > 1.0 + 1e-6:
            raise ExtractionError(
                f"participation singular value {d:.6f} exceeds one; residue is not "
                "realizable with a single resonator pair"
            )
        d = min(d, 1.0)
        if nu < a and nu < b:
            if d > xi_tol:
                pairs.append((d * u_cols[:, nu], w_cols[:, nu]))
                xi = np.sqrt(max(1.0 - d * d, 0.0))
                if xi > xi_tol:
                    pairs.append((xi * u_cols[:, nu], np.zeros(nl)))
            else:
                pairs.append((np.zeros(nc), w_cols[:, nu]))
                pairs.append((u_cols[:, nu], np.zeros(nl)))
        elif nu < a:
            pairs.append((u_cols[:, nu], np.zeros(nl)))
        else:
            pairs.append((np.zeros(nc), w_cols[:, nu]))

    # Deterministic sign: first significant component of r_c (or r_l) positive.
    normed = []
    for r_c, r_l in pairs:
        vec = r_c if np.linalg.norm(r_c) > 0 else r_l
        lead = vec[np.argmax(np.abs(vec))]
        sign = -1.0 if lead < 0 else 1.0
        normed.append((sign * r_c, sign * r_l))
    return normed


# ---------------------------------------------------------------------------
# Synthesis


def synthesize(model: PoleResidueModel) -> SynthesizedCircuit:
    """Realize a pole-residue hybrid model as a transformerless circuit.

    Core capacitance/inductance absorb the infinity residues plus the
    participation outer products; each pole pair becomes one auxiliary LC
    resonator tuned to the pole frequency and coupled through the
    participation vectors.  The resonator capacitance scale is gauge; it is
    set from the capacitive participation (or the inductive one when the
    pole couples only inductively).
    """
    nc, nl = model.n_cap, model.n_ind
    nr = len(model.poles)
    c_cc = model.kcc_inf.copy()
    l_ll = model.kll_inf.copy()
    for _w, r_c, r_l in model.poles:
        c_cc += np.outer(r_c, r_c)
        l_ll += np.outer(r_l, r_l)
    c = np.zeros((nc + nr, nc + nr))
    l = np.zeros((nl + nr, nl + nr))
    c[:nc, :nc] = c_cc
    l[:nl, :nl] = l_ll
    resonators = []
    for idx, (w_r, r_c, r_l) in enumerate(model.poles):
        nc_norm = float(r_c @ r_c)
        nl_norm = float(r_l @ r_l)
        if nc_norm > 0.0:
            c_rr = nc_norm
        elif nl_norm > 0.0:
            c_rr = 1.0 / (w_r**2 * nl_norm)
        else:
            raise ExtractionError("pole with vanishing participation")
        l_rr = 1.0 / (w_r**2 * c_rr)
        c[:nc, nc + idx] = np.sqrt(c_rr) * r_c
        c[nc + idx, :nc] = np.sqrt(c_rr) * r_c
        c[nc + idx, nc + idx] = c_rr
        l[:nl, nl + idx] = np.sqrt(l_rr) * r_l
        l[nl + idx, :nl] = np.sqrt(l_rr) * r_l
        l[nl + idx, nl + idx] = l_rr
        resonators.append((float(w_r), float(c_rr), float(l_rr)))
    base = model.omega_e.to_lists()
    rows = [list(r) + [0] * nr for r in base] if nc else []
    for idx in range(nr):
        rows.append([0] * nl + [1 if k == idx else 0 for k in range(nr)])
    omega_aug = IntMatrix(rows, shape=(nc + nr, nl + nr))
    if (nc + nr) and not cholesky_pd_check(c):
        raise ExtractionError("synthesized capacitance matrix is not positive definite")
    if (nl + nr) and not cholesky_pd_check(l):
        raise ExtractionError("synthesized inductance matrix is not positive definite")
    return SynthesizedCircuit(
        omega_e=omega_aug,
        c=c,
        l=l,
        n_cap=nc,
        n_ind=nl,
        resonators=tuple(resonators),
        cap_labels=model.cap_labels,
        ind_labels=model.ind_labels,
    )


# ---------------------------------------------------------------------------
# Reinsertion of tunneling and drive elements


def reinsert_elements(
    circuit: SynthesizedCircuit,
    junctions: Sequence[Tuple[str, float, float]] = (),
    slips: Sequence[Tuple[str, float, float]] = (),
    charge_drives: Optional[Dict[str, float]] = None,
    flux_drives: Optional[Dict[str, float]] = None,
) -> CircuitTopology:
    """Insert tunneling elements and drives across the synthesized ports.

    ``junctions``: (capacitive port label, tunneling energy [J], extra shunt
    capacitance [F]); ``slips``: (inductive port label, tunneling energy
    [J], extra series inductance [H]).  Port rows/columns are reordered so
    junction ports come first among capacitive edges and slip ports first
    among inductive edges, giving an edge-basis topology ready for
    quantization.
    """
    cap_labels = list(circuit.cap_labels)
    ind_labels = list(circuit.ind_labels)
    charge_drives = dict(charge_drives or {})
    flux_drives = dict(flux_drives or {})

    j_ports = []
    for label, energy, extra_c in junctions:
        if label not in cap_labels:
            raise ExtractionError(f"junction assigned to non-capacitive port {label!r}")
        j_ports.append((cap_labels.index(label), energy, extra_c))
    s_ports = []
    for label, energy, extra_l in slips:
        if label not in ind_labels:
            raise ExtractionError(f"phase slip assigned to non-inductive port {label!r}")
        s_ports.append((ind_labels.index(label), energy, extra_l))
    for label in charge_drives:
        if label not in cap_labels:
            raise ExtractionError(f"charge drive on unknown capacitive port {label!r}")
    for label in flux_drives:
        if label not in ind_labels:
            raise ExtractionError(f"flux drive on unknown inductive port {label!r}")

    nc, nl, nr = circuit.n_cap, circuit.n_ind, circuit.n_res
    c = circuit.c.copy()
    l = circuit.l.copy()
    for idx, _e, extra in j_ports:
        c[idx, idx] += extra
    for idx, _e, extra in s_ports:
        l[idx, idx] += extra

    j_idx = [idx for idx, _, _ in j_ports]
    s_idx = [idx for idx, _, _ in s_ports]
    row_order = j_idx + [i for i in range(nc) if i not in j_idx] + list(range(nc, nc + nr))
    col_order = s_idx + [i for i in range(nl) if i not in s_idx] + list(range(nl, nl + nr))

    c = c[np.ix_(row_order, row_order)]
    l = l[np.ix_(col_order, col_order)]
    omega = circuit.omega_e.submatrix(row_order, col_order)
    n_rows, n_cols = omega.shape
    a_j = IntMatrix(
        [[1 if (i == jj) else 0 for jj in range(len(j_idx))] for i in range(n_rows)],
        shape=(n_rows, len(j_idx)),
    )
    b_s = IntMatrix(
        [[1 if (i == ss) else 0 for ss in range(len(s_idx))] for i in range(n_cols)],
        shape=(n_cols, len(s_idx)),
    )
    q_ext = np.zeros(n_rows)
    for label, val in charge_drives.items():
        q_ext[row_order.index(cap_labels.index(label))] = val
    phi_ext = np.zeros(n_cols)
    for label, val in flux_drives.items():
        phi_ext[col_order.index(ind_labels.index(label))] = val
    return CircuitTopology(
        c=c,
        l=l,
        a_j=a_j,
        b_s=b_s,
        omega=omega,
        q_ext=q_ext,
        phi_ext=phi_ext,
        n0=np.zeros(n_rows),
        m0=np.zeros(n_cols),
        e_j=np.array([e for _, e, _ in j_ports]),
        e_s=np.array([e for _, e, _ in s_ports]),
    )
