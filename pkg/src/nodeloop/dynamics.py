"""Classical time-domain integration of the circuit equations of motion.

Fixed-step RK4 on the second-order node-flux / loop-charge system.  This is
the verification oracle for the rest of the package: structure-preserving
transformations must leave the junction flux and slip charge trajectories
invariant, and the conservative system's energy drift bounds the integrator
error.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from .constants import COOPER_PAIR_CHARGE, FLUX_QUANTUM
from .graphs import CircuitTopology
from .numeric import cholesky_pd_check


class DynamicsError(ValueError):
    pass


@dataclass(frozen=True)
class InitialState:
    phi: np.ndarray  # node fluxes [Wb]
    q: np.ndarray  # loop charges [C]
    phi_dot: np.ndarray  # node voltages [V]
    q_dot: np.ndarray  # loop currents [A]

    @classmethod
    def zeros(cls, topo: CircuitTopology) -> "InitialState":
        n, l = topo.omega.shape
        return cls(np.zeros(n), np.zeros(l), np.zeros(n), np.zeros(l))

    @classmethod
    def consistent(cls, topo: CircuitTopology, phi, q) -> "InitialState":
        """Initial state with velocities fixed by the integrated equations
        of motion (zero initial tunneling counts).

        The integrated continuity/Faraday relations are first integrals of
        the standard equations; starting on that manifold gives the usual
        LC dynamics for the flux and charge coordinates themselves.
        """
        from .constants import COOPER_PAIR_CHARGE, FLUX_QUANTUM

        n, l = topo.omega.shape
        phi = np.asarray(phi, dtype=float).reshape(n)
        q = np.asarray(q, dtype=float).reshape(l)
        omega_np = topo.omega.to_numpy().astype(float)
        phi_dot = (
            np.linalg.solve(topo.c, omega_np @ q + COOPER_PAIR_CHARGE * topo.n0 - topo.q_ext)
            if n
            else np.zeros(0)
        )
        q_dot = (
            np.linalg.solve(topo.l, FLUX_QUANTUM * topo.m0 - topo.phi_ext - omega_np.T @ phi)
            if l
            else np.zeros(0)
        )
        return cls(phi, q, phi_dot, q_dot)


@dataclass(frozen=True)
class StateTrajectory:
    times: np.ndarray  # [s], uniform grid
    phi: np.ndarray  # (steps, n) node fluxes
    q: np.ndarray  # (steps, l) loop charges
    phi_dot: np.ndarray
    q_dot: np.ndarray
    junction_flux: np.ndarray  # (steps, J) fluxes across junctions
    slip_charge: np.ndarray  # (steps, S) charges along slips
    energy: np.ndarray  # [J] classical energy per step


def _drive_rates(series: Optional[Dict[int, Tuple[np.ndarray, np.ndarray]]], size: int):
    """Time derivative of linearly interpolated drive series.

    Only the rates force the dynamics; constant offsets drop out of the
    standard equations of motion.
    """
    if not series:
        return None

    def derivative(t: float) -> np.ndarray:
        out = np.zeros(size)
        for idx, (ts, vs) in series.items():
            pos = np.searchsorted(ts, t, side="right") - 1
            pos = min(max(pos, 0), len(ts) - 2)
            out[idx] = (vs[pos + 1] - vs[pos]) / (ts[pos + 1] - ts[pos])
        return out

    return derivative


def classical_energy(topo: CircuitTopology, phi, q, phi_dot, q_dot) -> float:
    """Conserved energy of the undriven system."""
    a_j = topo.a_j.to_numpy().astype(float)
    b_s = topo.b_s.to_numpy().astype(float)
    e = 0.5 * float(phi_dot @ topo.c @ phi_dot) + 0.5 * float(q_dot @ topo.l @ q_dot)
    if topo.num_junctions:
        arg = (2.0 * np.pi / FLUX_QUANTUM) * (a_j.T @ phi) + topo.junction_phase
        e -= float(topo.e_j @ np.cos(arg))
    if topo.num_slips:
        arg = (2.0 * np.pi / COOPER_PAIR_CHARGE) * (b_s.T @ q) + topo.slip_phase
        e -= float(topo.e_s @ np.cos(arg))
    return e


def characteristic_frequencies(topo: CircuitTopology) -> np.ndarray:
    """Small-oscillation angular frequencies [rad/s] of the linearized system.

    Expands the tunneling terms to quadratic order around zero phase, so the
    junction energies contribute an effective inverse inductance and the
    slip energies an effective inverse capacitance.
    """
    n, l = topo.omega.shape
    omega_np = topo.omega.to_numpy().astype(float)
    a_j = topo.a_j.to_numpy().astype(float)
    b_s = topo.b_s.to_numpy().astype(float)
    freqs = []
    if n:
        l_inv_eff = np.zeros((n, n))
        if l:
            l_inv_eff += omega_np @ np.linalg.inv(topo.l) @ omega_np.T
        if topo.num_junctions:
            scale = (2.0 * np.pi / FLUX_QUANTUM) ** 2
            l_inv_eff += a_j @ np.diag(scale * topo.e_j) @ a_j.T
        vals = np.linalg.eigvalsh(np.linalg.solve(topo.c, l_inv_eff))
        freqs.extend(np.sqrt(np.abs(vals)))
    if l:
        c_inv_eff = np.zeros((l, l))
        if n:
            c_inv_eff += omega_np.T @ np.linalg.inv(topo.c) @ omega_np
        if topo.num_slips:
            scale = (2.0 * np.pi / COOPER_PAIR_CHARGE) ** 2
            c_inv_eff += b_s @ np.diag(scale * topo.e_s) @ b_s.T
        vals = np.linalg.eigvalsh(np.linalg.solve(topo.l, c_inv_eff))
        freqs.extend(np.sqrt(np.abs(vals)))
    freqs = np.array([f for f in freqs if f > 0.0])
    return np.sort(freqs)


def integrate(
    topo: CircuitTopology,
    initial: InitialState,
    t_end: float,
    dt: float,
    charge_series: Optional[Dict[int, Tuple[np.ndarray, np.ndarray]]] = None,
    flux_series: Optional[Dict[int, Tuple[np.ndarray, np.ndarray]]] = None,
) -> StateTrajectory:
    """Fixed-step RK4 integration of the standard equations of motion.

    Static external charge/flux offsets exert no force (only their time
    derivatives enter); optional sampled drive series are linearly
    interpolated.
    """
    if dt <= 0.0:
        raise DynamicsError("dt must be positive")
    n, l = topo.omega.shape
    if n and not cholesky_pd_check(topo.c):
        raise DynamicsError("capacitance matrix must be positive definite")
    if l and not cholesky_pd_check(topo.l):
        raise DynamicsError("inductance matrix must be positive definite")

    omega_np = topo.omega.to_numpy().astype(float)
    a_j = topo.a_j.to_numpy().astype(float)
    b_s = topo.b_s.to_numpy().astype(float)
    i0 = (2.0 * np.pi / FLUX_QUANTUM) * topo.e_j  # junction critical currents
    v0 = (2.0 * np.pi / COOPER_PAIR_CHARGE) * topo.e_s  # slip critical voltages
    c_fact = np.linalg.cholesky(topo.c) if n else None
    l_fact = np.linalg.cholesky(topo.l) if l else None
    q_rate = _drive_rates(charge_series, n)
    f_rate = _drive_rates(flux_series, l)

    def solve_chol(fact, rhs):
        y = np.linalg.solve(fact, rhs)
        return np.linalg.solve(fact.T, y)

    def rhs(t: float, state: np.ndarray) -> np.ndarray:
        phi = state[:n]
        q = state[n : n + l]
        phi_dot = state[n + l : 2 * n + l]
        q_dot = state[2 * n + l :]
        i_j = i0 * np.sin((2.0 * np.pi / FLUX_QUANTUM) * (a_j.T @ phi) + topo.junction_phase) if topo.num_junctions else np.zeros(0)
        v_s = v0 * np.sin((2.0 * np.pi / COOPER_PAIR_CHARGE) * (b_s.T @ q) + topo.slip_phase) if topo.num_slips else np.zeros(0)
        force_n = -(a_j @ i_j) + omega_np @ q_dot if n else np.zeros(0)
        force_l = -(b_s @ v_s) - omega_np.T @ phi_dot if l else np.zeros(0)
        if q_rate is not None:
            force_n = force_n - q_rate(t)
        if f_rate is not None:
            force_l = force_l - f_rate(t)
        phi_ddot = solve_chol(c_fact, force_n) if n else np.zeros(0)
        q_ddot = solve_chol(l_fact, force_l) if l else np.zeros(0)
        return np.concatenate([phi_dot, q_dot, phi_ddot, q_ddot])

    steps = int(round(t_end / dt)) + 1
    times = np.arange(steps) * dt
    state = np.concatenate([initial.phi, initial.q, initial.phi_dot, initial.q_dot])
    out = np.empty((steps, state.size))
    out[0] = state
    with np.errstate(over="ignore", invalid="ignore"):
        for step in range(1, steps):
            t = times[step - 1]
            k1 = rhs(t, state)
            k2 = rhs(t + 0.5 * dt, state + 0.5 * dt * k1)
            k3 = rhs(t + 0.5 * dt, state + 0.5 * dt * k2)
            k4 = rhs(t + dt, state + dt * k3)
            state = state + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if not np.all(np.isfinite(state)):
                raise DynamicsError(f"trajectory diverged at t={t + dt:.3e}; reduce the step size")
            out[step] = state

    phi = out[:, :n]
    q = out[:, n : n + l]
    phi_dot = out[:, n + l : 2 * n + l]
    q_dot = out[:, 2 * n + l :]
    energy = np.array(
        [classical_energy(topo, phi[i], q[i], phi_dot[i], q_dot[i]) for i in range(steps)]
    )
    return StateTrajectory(
        times=times,
        phi=phi,
        q=q,
        phi_dot=phi_dot,
        q_dot=q_dot,
        junction_flux=phi @ a_j,
        slip_charge=q @ b_s,
        energy=energy,
    )


def compare_observables(a: StateTrajectory, b: StateTrajectory) -> float:
    """Max absolute deviation of junction fluxes and slip charges."""
    if a.times.shape != b.times.shape or not np.allclose(a.times, b.times):
        raise DynamicsError("trajectories use different time grids")
    dev = 0.0
    if a.junction_flux.size or b.junction_flux.size:
        if a.junction_flux.shape != b.junction_flux.shape:
            raise DynamicsError("junction counts differ")
        dev = max(dev, float(np.max(np.abs(a.junction_flux - b.junction_flux))))
    if a.slip_charge.size or b.slip_charge.size:
        if a.slip_charge.shape != b.slip_charge.shape:
            raise DynamicsError("slip counts differ")
        dev = max(dev, float(np.max(np.abs(a.slip_charge - b.slip_charge))))
    return dev


def map_state(
    state: InitialState,
    u: "np.ndarray | object",
    w: "np.ndarray | object",
) -> InitialState:
    """Carry an initial state through a node/loop basis change (U, W).

    Fluxes transform by the inverse transpose, like the coordinates.
    """

    def as_inv_t(m):
        if hasattr(m, "m_inv"):
            return m.m_inv.to_numpy().astype(float).T
        return np.linalg.inv(np.asarray(m, dtype=float)).T

    u_it = as_inv_t(u)
    w_it = as_inv_t(w)
    return InitialState(
        phi=u_it @ state.phi,
        q=w_it @ state.q,
        phi_dot=u_it @ state.phi_dot,
        q_dot=w_it @ state.q_dot,
    )
