"""Matrices over GF(q) and exact Gaussian-elimination based routines.

Elimination always takes the first nonzero entry at or below the current row
as pivot and only swaps rows, so every derived output (ranks, inverses,
canonical solutions, span bases) is a deterministic function of the input.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .errors import FieldTooSmall, Infeasible, NotFullColumnRank, ShapeMismatch
from .fq import Field, Fq


class FqMatrix:
    """A dense matrix of GF(q) element codes.  Treated as immutable."""

    __slots__ = ("field", "data")

    def __init__(self, field: Field, data):
        arr = field.coerce(np.asarray(data, dtype=np.int64))
        if arr.ndim == 1:
            arr = arr.reshape(-1, 1)
        if arr.ndim != 2:
            raise ShapeMismatch(f"matrix data must be 2-D, got shape {arr.shape}")
        arr = np.array(arr, dtype=np.int64)
        arr.flags.writeable = False
        self.field = field
        self.data = arr

    # construction -----------------------------------------------------
    @classmethod
    def zeros(cls, field: Field, rows: int, cols: int) -> "FqMatrix":
        return cls(field, np.zeros((rows, cols), dtype=np.int64))

    @classmethod
    def identity(cls, field: Field, n: int) -> "FqMatrix":
        return cls(field, np.eye(n, dtype=np.int64))

    @classmethod
    def random(cls, field: Field, rows: int, cols: int, rng: np.random.Generator) -> "FqMatrix":
        return cls(field, field.random((rows, cols), rng))

    @classmethod
    def column(cls, field: Field, values: Iterable[int]) -> "FqMatrix":
        return cls(field, np.asarray(list(values), dtype=np.int64).reshape(-1, 1))

    # shape ------------------------------------------------------------
    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    @property
    def T(self) -> "FqMatrix":
        return FqMatrix(self.field, self.data.T)

    def columns(self, idx: Sequence[int]) -> "FqMatrix":
        return FqMatrix(self.field, self.data[:, list(idx)].reshape(self.rows, len(idx)))

    def take_rows(self, idx: Sequence[int]) -> "FqMatrix":
        return FqMatrix(self.field, self.data[list(idx), :].reshape(len(idx), self.cols))

    def __getitem__(self, key):
        out = self.data[key]
        if np.ndim(out) == 0:
            return Fq(self.field, int(out))
        if np.ndim(out) == 1:
            # keep orientation: a row slice stays a row, a column slice a column
            if isinstance(key, tuple) and len(key) == 2 and isinstance(key[0], (int, np.integer)):
                return FqMatrix(self.field, out.reshape(1, -1))
            return FqMatrix(self.field, out.reshape(-1, 1))
        return FqMatrix(self.field, out)

    def tolist(self) -> list[list[int]]:
        return self.data.tolist()

    def vector(self) -> np.ndarray:
        """Flatten a single column (or row) into a 1-D code array."""
        if self.cols != 1 and self.rows != 1:
            raise ShapeMismatch("not a vector")
        return self.data.reshape(-1).copy()

    # algebra ----------------------------------------------------------
    def _check(self, other: "FqMatrix") -> None:
        if not isinstance(other, FqMatrix):
            raise TypeError(f"expected FqMatrix, got {type(other).__name__}")
        if other.field != self.field:
            raise ValueError("matrices over different fields")

    def __add__(self, other: "FqMatrix") -> "FqMatrix":
        self._check(other)
        if self.shape != other.shape:
            raise ShapeMismatch(f"{self.shape} + {other.shape}")
        return FqMatrix(self.field, self.field.add(self.data, other.data))

    def __sub__(self, other: "FqMatrix") -> "FqMatrix":
        self._check(other)
        if self.shape != other.shape:
            raise ShapeMismatch(f"{self.shape} - {other.shape}")
        return FqMatrix(self.field, self.field.sub(self.data, other.data))

    def __neg__(self) -> "FqMatrix":
        return FqMatrix(self.field, self.field.neg(self.data))

    def __matmul__(self, other: "FqMatrix") -> "FqMatrix":
        self._check(other)
        if self.cols != other.rows:
            raise ShapeMismatch(f"{self.shape} @ {other.shape}")
        return FqMatrix(self.field, self.field.matmul(self.data, other.data))

    def scale(self, c: int | Fq) -> "FqMatrix":
        c = c.value if isinstance(c, Fq) else int(self.field.coerce(c))
        return FqMatrix(self.field, self.field.mul(self.data, c))

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, FqMatrix)
            and other.field == self.field
            and other.shape == self.shape
            and bool(np.array_equal(other.data, self.data))
        )

    def __hash__(self) -> int:
        return hash((self.field, self.shape, self.data.tobytes()))

    def is_zero(self) -> bool:
        return not self.data.any()

    def __repr__(self) -> str:
        return f"FqMatrix({self.field!r}, {self.data.tolist()})"


def hstack(mats: Sequence[FqMatrix], rows: int | None = None, field: Field | None = None) -> FqMatrix:
    """Concatenate horizontally; ``rows``/``field`` are needed only for an empty list."""
    if not mats:
        return FqMatrix(field, np.zeros((rows or 0, 0), dtype=np.int64))
    return FqMatrix(mats[0].field, np.hstack([m.data for m in mats]))


def vstack(mats: Sequence[FqMatrix], cols: int | None = None, field: Field | None = None) -> FqMatrix:
    if not mats:
        return FqMatrix(field, np.zeros((0, cols or 0), dtype=np.int64))
    return FqMatrix(mats[0].field, np.vstack([m.data for m in mats]))


def block_diag(mats: Sequence[FqMatrix]) -> FqMatrix:
    field = mats[0].field
    rows = sum(m.rows for m in mats)
    cols = sum(m.cols for m in mats)
    out = np.zeros((rows, cols), dtype=np.int64)
    r = c = 0
    for m in mats:
        out[r : r + m.rows, c : c + m.cols] = m.data
        r += m.rows
        c += m.cols
    return FqMatrix(field, out)


# ---------------------------------------------------------------------------
# elimination


def _rref(field: Field, A: np.ndarray, ncols: int | None = None) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form, pivoting only among the first ``ncols`` columns."""
    A = np.array(A, dtype=np.int64)
    m, n = A.shape
    ncols = n if ncols is None else ncols
    pivots: list[int] = []
    row = 0
    for col in range(ncols):
        if row >= m:
            break
        nz = np.nonzero(A[row:, col])[0]
        if nz.size == 0:
            continue
        piv = row + int(nz[0])
        if piv != row:
            A[[row, piv]] = A[[piv, row]]
        A[row] = field.mul(A[row], field.inv(A[row, col]))
        factors = A[:, col].copy()
        factors[row] = 0
        hit = np.nonzero(factors)[0]
        if hit.size:
            A[hit] = field.sub(A[hit], field.mul(factors[hit, None], A[row][None, :]))
        pivots.append(col)
        row += 1
    return A, pivots


def rref(M: FqMatrix) -> tuple[FqMatrix, list[int]]:
    R, piv = _rref(M.field, M.data)
    return FqMatrix(M.field, R), piv


def rank(M: FqMatrix) -> int:
    if M.rows == 0 or M.cols == 0:
        return 0
    return len(_rref(M.field, M.data)[1])


def left_inverse(M: FqMatrix) -> FqMatrix:
    """``L`` with ``L @ M = I``; M must have full column rank."""
    m, k = M.shape
    aug = np.hstack([M.data, np.eye(m, dtype=np.int64)])
    R, piv = _rref(M.field, aug, ncols=k)
    if len(piv) != k:
        raise NotFullColumnRank(f"rank {len(piv)} < {k} columns")
    return FqMatrix(M.field, R[:k, k:])


def inverse(M: FqMatrix) -> FqMatrix:
    if M.rows != M.cols:
        raise ShapeMismatch("inverse of a non-square matrix")
    return left_inverse(M)


def solve_right(A: FqMatrix, C: FqMatrix) -> FqMatrix:
    """Canonical ``X`` with ``A @ X = C`` (free variables zero)."""
    if A.rows != C.rows:
        raise ShapeMismatch(f"row counts differ: {A.rows} vs {C.rows}")
    n = A.cols
    aug = np.hstack([A.data, C.data])
    R, piv = _rref(A.field, aug, ncols=n)
    r = len(piv)
    if R[r:, n:].any():
        raise Infeasible("column space of C is not contained in that of A")
    X = np.zeros((n, C.cols), dtype=np.int64)
    X[piv, :] = R[:r, n:]
    return FqMatrix(A.field, X)


def nullspace(M: FqMatrix) -> FqMatrix:
    """Basis (as columns) of the right kernel ``{x : M x = 0}``."""
    m, n = M.shape
    R, piv = _rref(M.field, M.data)
    free = [j for j in range(n) if j not in set(piv)]
    field = M.field
    K = np.zeros((n, len(free)), dtype=np.int64)
    for c, f in enumerate(free):
        K[f, c] = 1
        for i, pc in enumerate(piv):
            K[pc, c] = field.neg(R[i, f])
    return FqMatrix(field, K)


def column_basis(M: FqMatrix) -> FqMatrix:
    """The pivot columns of M: a basis of its column span, in column order."""
    if M.cols == 0:
        return M
    _, piv = _rref(M.field, M.data)
    return M.columns(piv)


def intersect_column_spans(A: FqMatrix, B: FqMatrix) -> FqMatrix:
    """Basis matrix of ``<A> ∩ <B>`` via the kernel of ``[A | -B]``."""
    if A.rows != B.rows:
        raise ShapeMismatch(f"row counts differ: {A.rows} vs {B.rows}")
    Ab, Bb = column_basis(A), column_basis(B)
    K = nullspace(hstack([Ab, -Bb], rows=A.rows, field=A.field))
    if K.cols == 0:
        return FqMatrix.zeros(A.field, A.rows, 0)
    return Ab @ K.take_rows(range(Ab.cols))


def is_invertible(M: FqMatrix) -> bool:
    return M.rows == M.cols and rank(M) == M.rows


def mds_generator(k: int, n: int, field: Field) -> FqMatrix:
    """k x n Vandermonde (Reed-Solomon) generator on the first n field elements."""
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    if field.q < n:
        raise FieldTooSmall(f"q = {field.q} < n = {n}")
    points = np.arange(n, dtype=np.int64)
    rows = [np.ones(n, dtype=np.int64)]
    for _ in range(1, k):
        rows.append(field.mul(rows[-1], points))
    return FqMatrix(field, np.vstack(rows))
