"""Shared real-matrix kernels: positive-definiteness, Schur complements,
simultaneous diagonalization of a capacitance/inductance pair."""

from __future__ import annotations

from typing import Sequence, Tuple

import numpy as np

PD_PIVOT_RTOL = 1e-14


def cholesky_pd_check(m: np.ndarray, rtol: float = PD_PIVOT_RTOL) -> bool:
    """True iff ``m`` is symmetric positive definite.

    Uses an explicit Cholesky loop so the minimum pivot can be compared
    against ``rtol * max(diag)``; circuits in SI units span many orders of
    magnitude, so the tolerance must be relative.
    """
    m = np.asarray(m, dtype=float)
    n = m.shape[0]
    if n == 0:
        return True
    full_scale = float(np.max(np.abs(m)))
    if m.shape != (n, n) or full_scale == 0.0:
        return False
    if np.max(np.abs(m - m.T)) > 1e-10 * full_scale:
        return False
    scale = float(np.max(np.abs(np.diag(m))))
    if scale <= 0.0:
        return False
    a = m.copy()
    for k in range(n):
        pivot = a[k, k]
        if pivot <= rtol * scale:
            return False
        root = np.sqrt(pivot)
        a[k:, k] /= root
        for j in range(k + 1, n):
            a[j:, j] -= a[j:, k] * a[j, k]
    return True


def schur_complement(m: np.ndarray, retained: Sequence[int]) -> np.ndarray:
    """Schur complement of a PD matrix onto the retained index set."""
    m = np.asarray(m, dtype=float)
    retained = list(retained)
    dropped = [i for i in range(m.shape[0]) if i not in retained]
    if not dropped:
        return m[np.ix_(retained, retained)].copy()
    m_rr = m[np.ix_(retained, retained)]
    m_ra = m[np.ix_(retained, dropped)]
    m_aa = m[np.ix_(dropped, dropped)]
    return m_rr - m_ra @ np.linalg.solve(m_aa, m_ra.T)


def _jacobi_eigh(a: np.ndarray, sweeps: int = 100, tol: float = 1e-15) -> Tuple[np.ndarray, np.ndarray]:
    """Cyclic Jacobi eigensolver for a real symmetric matrix.

    Returns (eigenvalues, eigenvectors) sorted ascending, with a
    deterministic sign convention (largest-magnitude component positive,
    ties broken towards the lower index).
    """
    a = np.asarray(a, dtype=float).copy()
    n = a.shape[0]
    v = np.eye(n)
    if n == 0:
        return np.zeros(0), v
    norm = np.linalg.norm(a)
    if norm == 0.0:
        return np.zeros(n), v
    for _ in range(sweeps):
        off = np.sqrt(np.sum(np.tril(a, -1) ** 2))
        if off <= tol * norm:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= tol * norm:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                if theta == 0.0:
                    t = 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                rot = np.eye(n)
                rot[p, p] = rot[q, q] = c
                rot[p, q] = s
                rot[q, p] = -s
                a = rot.T @ a @ rot
                v = v @ rot
    vals = np.diag(a).copy()
    order = np.argsort(vals, kind="stable")
    vals = vals[order]
    v = v[:, order]
    for j in range(n):
        col = v[:, j]
        lead = int(np.argmax(np.abs(col)))
        if col[lead] < 0:
            v[:, j] = -col
    return vals, v


def simultaneous_diagonalize(c: np.ndarray, l: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Congruence transform diagonalizing a PD capacitance/inductance pair.

    Returns ``(x, c_d, l_d, w2)`` with ``x^T c x = c_d`` and
    ``x^T inv(l) x = c_d w2`` both diagonal, ``l_d = inv(c_d w2)``, and the
    squared mode frequencies ``w2`` sorted ascending.  The eigenbasis is
    normalized so that ``c_d`` is the identity.
    """
    c = np.asarray(c, dtype=float)
    l = np.asarray(l, dtype=float)
    if not cholesky_pd_check(c):
        raise ValueError("capacitance matrix is not positive definite")
    if not cholesky_pd_check(l):
        raise ValueError("inductance matrix is not positive definite")
    n = c.shape[0]
    if n == 0:
        z = np.zeros((0, 0))
        return z, z.copy(), z.copy(), np.zeros(0)
    m = np.linalg.cholesky(c).T  # c = m^T m
    l_inv = np.linalg.inv(l)
    kernel = np.linalg.solve(m.T, np.linalg.solve(m.T, l_inv.T).T)
    kernel = 0.5 * (kernel + kernel.T)
    w2, y = _jacobi_eigh(kernel)
    x = np.linalg.solve(m, y)
    c_d = np.eye(n)
    l_d = np.diag(1.0 / w2)
    return x, c_d, l_d, w2
