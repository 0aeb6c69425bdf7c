"""Exact integer linear algebra for network-matrix manipulation.

Matrices here hold circuit connectivity (incidence matrices, loop matrices,
node-loop network matrices) and the unimodular basis changes that act on
them.  Everything is computed exactly over the integers; results are checked
against the signed 64-bit range so that overflow raises instead of wrapping.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, List, Sequence, Tuple

INT64_MIN = -(2**63)
INT64_MAX = 2**63 - 1


class IntOverflowError(OverflowError):
    """Raised when an exact integer result leaves the signed 64-bit range."""


def _checked(value: int) -> int:
    if value < INT64_MIN or value > INT64_MAX:
        raise IntOverflowError(f"integer entry {value} exceeds 64-bit range")
    return int(value)


class IntMatrix:
    """Immutable integer matrix with overflow-checked arithmetic."""

    __slots__ = ("rows", "cols", "_data")

    def __init__(self, rows_data: Iterable[Iterable[int]], shape: Tuple[int, int] | None = None):
        data = tuple(tuple(_checked(int(v)) for v in row) for row in rows_data)
        if shape is not None and not data:
            self.rows, self.cols = shape
            self._data = tuple(() for _ in range(self.rows))
            return
        self.rows = len(data)
        self.cols = len(data[0]) if data else 0
        if any(len(row) != self.cols for row in data):
            raise ValueError("ragged rows in integer matrix")
        self._data = data

    # -- construction -----------------------------------------------------

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "IntMatrix":
        return cls([[0] * cols for _ in range(rows)] if rows else [], shape=(rows, cols))

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)] if n else [], shape=(n, n))

    @classmethod
    def from_numpy(cls, arr) -> "IntMatrix":
        rows = [[int(round(float(v))) for v in row] for row in arr]
        return cls(rows, shape=tuple(arr.shape))

    # -- access ------------------------------------------------------------

    def __getitem__(self, idx: Tuple[int, int]) -> int:
        i, j = idx
        return self._data[i][j]

    def row(self, i: int) -> Tuple[int, ...]:
        return self._data[i]

    def to_lists(self) -> List[List[int]]:
        return [list(r) for r in self._data]

    def to_numpy(self):
        import numpy as np

        return np.array([list(r) for r in self._data], dtype=np.int64).reshape(self.rows, self.cols)

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.rows, self.cols)

    def __eq__(self, other) -> bool:
        return isinstance(other, IntMatrix) and self.shape == other.shape and self._data == other._data

    def __hash__(self) -> int:
        return hash((self.shape, self._data))

    def __repr__(self) -> str:
        return f"IntMatrix({self.to_lists()!r})"

    # -- arithmetic ---------------------------------------------------------

    def __matmul__(self, other: "IntMatrix") -> "IntMatrix":
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        out = []
        for i in range(self.rows):
            ri = self._data[i]
            out.append(
                [_checked(sum(ri[k] * other._data[k][j] for k in range(self.cols))) for j in range(other.cols)]
            )
        return IntMatrix(out, shape=(self.rows, other.cols))

    def __neg__(self) -> "IntMatrix":
        return IntMatrix([[-v for v in row] for row in self._data], shape=self.shape)

    @property
    def T(self) -> "IntMatrix":
        return IntMatrix(
            [[self._data[i][j] for i in range(self.rows)] for j in range(self.cols)],
            shape=(self.cols, self.rows),
        )

    def hstack(self, other: "IntMatrix") -> "IntMatrix":
        if self.rows != other.rows:
            raise ValueError("row mismatch in hstack")
        return IntMatrix(
            [list(self._data[i]) + list(other._data[i]) for i in range(self.rows)],
            shape=(self.rows, self.cols + other.cols),
        )

    def submatrix(self, row_idx: Sequence[int], col_idx: Sequence[int]) -> "IntMatrix":
        return IntMatrix(
            [[self._data[i][j] for j in col_idx] for i in row_idx],
            shape=(len(row_idx), len(col_idx)),
        )

    def entries_in_unit_range(self) -> bool:
        return all(v in (-1, 0, 1) for row in self._data for v in row)

    def is_zero(self) -> bool:
        return all(v == 0 for row in self._data for v in row)

    # -- exact determinant (Bareiss fraction-free elimination) --------------

    def det(self) -> int:
        if self.rows != self.cols:
            raise ValueError("determinant of non-square matrix")
        n = self.rows
        if n == 0:
            return 1
        a = [list(map(int, row)) for row in self._data]
        sign = 1
        prev = 1
        for k in range(n - 1):
            if a[k][k] == 0:
                pivot_row = next((r for r in range(k + 1, n) if a[r][k] != 0), None)
                if pivot_row is None:
                    return 0
                a[k], a[pivot_row] = a[pivot_row], a[k]
                sign = -sign
            for i in range(k + 1, n):
                for j in range(k + 1, n):
                    a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
                a[i][k] = 0
            prev = a[k][k]
        return _checked(sign * a[n - 1][n - 1])

    def rank(self) -> int:
        """Rank via exact fraction-free Gaussian elimination."""
        a = [[Fraction(v) for v in row] for row in self._data]
        rank = 0
        for col in range(self.cols):
            pivot = next((r for r in range(rank, self.rows) if a[r][col] != 0), None)
            if pivot is None:
                continue
            a[rank], a[pivot] = a[pivot], a[rank]
            inv = 1 / a[rank][col]
            a[rank] = [v * inv for v in a[rank]]
            for r in range(self.rows):
                if r != rank and a[r][col] != 0:
                    f = a[r][col]
                    a[r] = [v - f * w for v, w in zip(a[r], a[rank])]
            rank += 1
            if rank == self.rows:
                break
        return rank


@dataclass(frozen=True)
class UnimodularTransform:
    """Invertible integer basis change with its exact inverse."""

    m: IntMatrix
    m_inv: IntMatrix

    def __post_init__(self):
        n = self.m.rows
        if self.m.shape != (n, n) or self.m_inv.shape != (n, n):
            raise ValueError("transform must be square")
        if self.m @ self.m_inv != IntMatrix.identity(n):
            raise ValueError("inverse does not reproduce the identity")

    @classmethod
    def identity(cls, n: int) -> "UnimodularTransform":
        eye = IntMatrix.identity(n)
        return cls(eye, eye)

    @classmethod
    def from_matrix(cls, m: IntMatrix) -> "UnimodularTransform":
        return cls(m, invert_unimodular(m))

    def compose(self, other: "UnimodularTransform") -> "UnimodularTransform":
        """Transform equal to applying `other` first, then `self`."""
        return UnimodularTransform(self.m @ other.m, other.m_inv @ self.m_inv)

    def inverse(self) -> "UnimodularTransform":
        return UnimodularTransform(self.m_inv, self.m)

    @property
    def size(self) -> int:
        return self.m.rows


def invert_unimodular(m: IntMatrix) -> IntMatrix:
    """Exact integer inverse of a matrix with determinant +/-1."""
    if m.rows != m.cols:
        raise ValueError("cannot invert non-square matrix")
    n = m.rows
    d = m.det()
    if d not in (-1, 1):
        raise ValueError(f"matrix determinant {d} is not +/-1; no integer inverse")
    a = [[Fraction(v) for v in row] for row in m.to_lists()]
    inv = [[Fraction(1 if i == j else 0) for j in range(n)] for i in range(n)]
    for col in range(n):
        pivot = next(r for r in range(col, n) if a[r][col] != 0)
        a[col], a[pivot] = a[pivot], a[col]
        inv[col], inv[pivot] = inv[pivot], inv[col]
        scale = 1 / a[col][col]
        a[col] = [v * scale for v in a[col]]
        inv[col] = [v * scale for v in inv[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [v - f * w for v, w in zip(a[r], a[col])]
                inv[r] = [v - f * w for v, w in zip(inv[r], inv[col])]
    out = [[int(v) for v in row] for row in inv]
    if any(Fraction(out[i][j]) != inv[i][j] for i in range(n) for j in range(n)):
        raise ValueError("inverse is not integer-valued")
    return IntMatrix(out, shape=(n, n))


def _elementary_row_op(n: int, target: int, source: int, factor: int) -> List[List[int]]:
    u = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    u[target][source] = _checked(factor)
    return u


def row_pivot(m: IntMatrix, i: int, j: int) -> Tuple[IntMatrix, UnimodularTransform]:
    """Eliminate every entry of column ``j`` except the pivot at ``(i, j)``.

    Returns the pivoted matrix and the row transform ``U`` with ``M' = U M``.
    Requires the pivot value to divide the entries it eliminates (always true
    for network matrices, whose entries are -1, 0, +1).
    """
    piv = m[i, j]
    if piv == 0:
        raise ValueError(f"zero pivot entry at ({i}, {j})")
    n = m.rows
    u_rows = [[1 if r == c else 0 for c in range(n)] for r in range(n)]
    out = m.to_lists()
    for r in range(n):
        if r == i or out[r][j] == 0:
            continue
        if out[r][j] % piv != 0:
            raise ValueError(f"pivot {piv} does not divide entry {out[r][j]} in column {j}")
        f = out[r][j] // piv
        out[r] = [_checked(a - f * b) for a, b in zip(out[r], m.row(i))]
        u_rows[r][i] = -f
    u = IntMatrix(u_rows, shape=(n, n))
    u_inv_rows = [[1 if r == c else 0 for c in range(n)] for r in range(n)]
    for r in range(n):
        if r != i and u_rows[r][i] != 0:
            u_inv_rows[r][i] = -u_rows[r][i]
    transform = UnimodularTransform(u, IntMatrix(u_inv_rows, shape=(n, n)))
    return IntMatrix(out, shape=m.shape), transform


def col_pivot(m: IntMatrix, i: int, j: int) -> Tuple[IntMatrix, UnimodularTransform]:
    """Eliminate every entry of row ``i`` except the pivot at ``(i, j)``.

    Returns the pivoted matrix and the column transform ``W`` with
    ``M' = M W^T``.
    """
    piv = m[i, j]
    if piv == 0:
        raise ValueError(f"zero pivot entry at ({i}, {j})")
    mt, u = row_pivot(m.T, j, i)
    return mt.T, u


def reduce_to_identity_block(omega: IntMatrix) -> Tuple[UnimodularTransform, UnimodularTransform, int]:
    """Unimodular reduction of a network matrix to ``[[I_k, 0], [0, 0]]``.

    Returns integer transforms ``(U, W, k)`` with ``U omega W^T`` equal to the
    identity block of size ``k = rank(omega)``.  Euclidean row/column steps
    handle entries larger than one; if an invariant factor other than one
    appears the reduction is impossible over the integers and a ValueError is
    raised (cannot happen for totally unimodular circuit matrices).
    """
    n, l = omega.shape
    a = [list(map(int, row)) for row in omega.to_lists()]
    u = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    w = [[1 if i == j else 0 for j in range(l)] for i in range(l)]

    def swap_rows(r1, r2):
        a[r1], a[r2] = a[r2], a[r1]
        u[r1], u[r2] = u[r2], u[r1]

    def swap_cols(c1, c2):
        for row in a:
            row[c1], row[c2] = row[c2], row[c1]
        w[c1], w[c2] = w[c2], w[c1]

    def add_row(target, source, factor):
        a[target] = [_checked(x - factor * y) for x, y in zip(a[target], a[source])]
        u[target] = [_checked(x - factor * y) for x, y in zip(u[target], u[source])]

    def add_col(target, source, factor):
        for row in a:
            row[target] = _checked(row[target] - factor * row[source])
        w[target] = [_checked(x - factor * y) for x, y in zip(w[target], w[source])]

    k = 0
    for t in range(min(n, l)):
        best = None
        for i in range(t, n):
            for j in range(t, l):
                if a[i][j] != 0 and (best is None or abs(a[i][j]) < abs(a[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            break
        swap_rows(t, best[0])
        swap_cols(t, best[1])
        while True:
            # Euclidean passes until the pivot divides its row and column.
            changed = False
            for i in range(t + 1, n):
                if a[i][t] != 0:
                    q = a[i][t] // a[t][t]
                    add_row(i, t, q)
                    if a[i][t] != 0:
                        swap_rows(t, i)
                        changed = True
            for j in range(t + 1, l):
                if a[t][j] != 0:
                    q = a[t][j] // a[t][t]
                    add_col(j, t, q)
                    if a[t][j] != 0:
                        swap_cols(t, j)
                        changed = True
            if not changed:
                break
        if a[t][t] < 0:
            a[t] = [-v for v in a[t]]
            u[t] = [-v for v in u[t]]
        if a[t][t] != 1:
            raise ValueError(
                f"invariant factor {a[t][t]} != 1; matrix is not reducible to an identity block"
            )
        k += 1

    u_m = IntMatrix(u, shape=(n, n))
    w_m = IntMatrix(w, shape=(l, l))
    return (
        UnimodularTransform(u_m, invert_unimodular(u_m)),
        UnimodularTransform(w_m, invert_unimodular(w_m)),
        k,
    )


_EXHAUSTIVE_TU_LIMIT = 12


def check_tu_sampled(m: IntMatrix, trials: int = 200, seed: int = 0) -> bool:
    """Check total unimodularity: all square submatrix determinants in {-1,0,1}.

    Exhaustive for matrices with rows + cols <= 12, sampled otherwise.
    """
    if not m.entries_in_unit_range():
        return False
    n, l = m.shape
    if n == 0 or l == 0:
        return True
    if n + l <= _EXHAUSTIVE_TU_LIMIT:
        for k in range(2, min(n, l) + 1):
            for rows in itertools.combinations(range(n), k):
                for cols in itertools.combinations(range(l), k):
                    if m.submatrix(rows, cols).det() not in (-1, 0, 1):
                        return False
        return True
    rng = random.Random(seed)
    for _ in range(trials):
        k = rng.randint(2, min(n, l))
        rows = sorted(rng.sample(range(n), k))
        cols = sorted(rng.sample(range(l), k))
        if m.submatrix(rows, cols).det() not in (-1, 0, 1):
            return False
    return True


def complete_to_unimodular(columns: IntMatrix) -> IntMatrix:
    """Extend a full-column-rank integer matrix to a square one with det +/-1.

    The first ``columns.cols`` columns of the result equal the input.  Used to
    complete a phase-slip loop matrix to a full cotree loop matrix.
    """
    n, s = columns.shape
    if s > n:
        raise ValueError("more columns than rows; cannot complete")
    if s == 0:
        return IntMatrix.identity(n)
    u, _w, k = reduce_to_identity_block(columns)
    if k < s:
        raise ValueError("columns are not linearly independent")
    # With U columns = [[T], [0]] (T invertible), appending the trailing
    # columns of U^-1 gives U full = [[T, 0], [0, I]], so det(full) = +/-1.
    ext = columns.to_lists()
    full = IntMatrix(
        [ext[i] + [u.m_inv[i, j + s] for j in range(n - s)] for i in range(n)],
        shape=(n, n),
    )
    if full.det() not in (-1, 1):  # pragma: no cover - guaranteed by construction
        raise ValueError("completion failed to be unimodular")
    return full
