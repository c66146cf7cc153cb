"""Storage formats, vector kernels, and the linear-operator abstraction.

Vectors are plain 1-D float64 numpy arrays; :func:`as_vector` validates them
(nonempty, finite). Sparse matrices use compressed sparse row storage with
columns sorted within each row, which makes the row-wise matvec the natural
kernel. Dense matrices are validated 2-D float64 arrays.

All containers are immutable by convention after construction and every
operation here is a pure function, so concurrent reads are safe. Kernels use
a fixed summation order, making repeated calls bit-identical.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def as_vector(values, n: int | None = None, name: str = "vector") -> np.ndarray:
    """Validate and convert to a 1-D float64 array.

    Rejects empty vectors and non-finite entries. When ``n`` is given, the
    length must match exactly.
    """
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got shape {v.shape}")
    if v.size == 0:
        raise ValueError(f"{name} must have length > 0")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} contains non-finite entries")
    if n is not None and v.size != n:
        raise ValueError(f"{name} has length {v.size}, expected {n}")
    return v


def as_dense_matrix(values, name: str = "matrix") -> np.ndarray:
    """Validate and convert to a 2-D float64 array with finite entries."""
    a = np.asarray(values, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {a.shape}")
    if a.size == 0:
        raise ValueError(f"{name} must be nonempty")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite entries")
    return a


@dataclass(frozen=True)
class SparseMatrixCsr:
    """Compressed sparse row matrix.

    ``row_offsets`` has length ``n_rows + 1`` with ``row_offsets[0] == 0``;
    columns are strictly increasing within each row and all stored values are
    finite. Construction validates these invariants.
    """

    n_rows: int
    n_cols: int
    row_offsets: np.ndarray
    col_indices: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "row_offsets", np.asarray(self.row_offsets, dtype=np.int64))
        object.__setattr__(self, "col_indices", np.asarray(self.col_indices, dtype=np.int64))
        object.__setattr__(self, "values", np.asarray(self.values, dtype=np.float64))
        if self.n_rows <= 0 or self.n_cols <= 0:
            raise ValueError("matrix dimensions must be positive")
        off = self.row_offsets
        if off.shape != (self.n_rows + 1,):
            raise ValueError(f"row_offsets has length {off.size}, expected {self.n_rows + 1}")
        if off[0] != 0:
            raise ValueError("row_offsets[0] must be 0")
        if np.any(np.diff(off) < 0):
            raise ValueError("row_offsets must be non-decreasing")
        nnz = int(off[-1])
        if self.col_indices.shape != (nnz,) or self.values.shape != (nnz,):
            raise ValueError(f"col_indices/values must have length {nnz} (last row offset)")
        if nnz:
            if self.col_indices.min() < 0 or self.col_indices.max() >= self.n_cols:
                raise ValueError(f"column indices must lie in [0, {self.n_cols})")
            # strictly increasing within each row: every in-row gap positive
            gaps = np.diff(self.col_indices)
            row_starts = off[1:-1]  # boundaries between rows, exempt from the check
            in_row = np.ones(gaps.size, dtype=bool)
            in_row[row_starts[(row_starts > 0) & (row_starts < nnz)] - 1] = False
            if np.any(gaps[in_row] <= 0):
                raise ValueError("column indices must be strictly increasing within each row")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("stored values must be finite")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_rows, self.n_cols)

    @property
    def nnz(self) -> int:
        return int(self.row_offsets[-1])

    def row(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        """Column indices and values of row ``i`` (views, do not mutate)."""
        a, b = self.row_offsets[i], self.row_offsets[i + 1]
        return self.col_indices[a:b], self.values[a:b]

    def diagonal(self) -> np.ndarray:
        """Main diagonal as a dense vector (absent entries are 0)."""
        d = np.zeros(min(self.n_rows, self.n_cols))
        for i in range(d.size):
            cols, vals = self.row(i)
            j = np.searchsorted(cols, i)
            if j < cols.size and cols[j] == i:
                d[i] = vals[j]
        return d

    def to_dense(self) -> np.ndarray:
        a = np.zeros((self.n_rows, self.n_cols))
        rows = np.repeat(np.arange(self.n_rows), np.diff(self.row_offsets))
        a[rows, self.col_indices] = self.values
        return a

    @classmethod
    def from_dense(cls, a, drop_tolerance: float = 0.0) -> "SparseMatrixCsr":
        """Build from a dense array, storing entries with |a_ij| > drop_tolerance."""
        a = as_dense_matrix(a)
        mask = np.abs(a) > drop_tolerance
        counts = mask.sum(axis=1)
        offsets = np.concatenate([[0], np.cumsum(counts)])
        rows, cols = np.nonzero(mask)
        return cls(a.shape[0], a.shape[1], offsets, cols, a[rows, cols])

    @classmethod
    def from_coo(cls, n_rows: int, n_cols: int, rows, cols, vals) -> "SparseMatrixCsr":
        """Build from coordinate triplets; duplicates are summed, rows sorted by column."""
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        vals = np.asarray(vals, dtype=np.float64)
        if not (rows.shape == cols.shape == vals.shape):
            raise ValueError("rows, cols, vals must have equal lengths")
        if rows.size:
            if rows.min() < 0 or rows.max() >= n_rows:
                raise ValueError(f"row indices must lie in [0, {n_rows})")
            if cols.min() < 0 or cols.max() >= n_cols:
                raise ValueError(f"column indices must lie in [0, {n_cols})")
        # lexicographic (row, col) sort, then merge duplicates
        order = np.lexsort((cols, rows))
        rows, cols, vals = rows[order], cols[order], vals[order]
        if rows.size:
            keep = np.concatenate([[True], (np.diff(rows) != 0) | (np.diff(cols) != 0)])
            group = np.cumsum(keep) - 1
            merged = np.bincount(group, weights=vals)
            rows, cols, vals = rows[keep], cols[keep], merged
        counts = np.bincount(rows, minlength=n_rows)
        offsets = np.concatenate([[0], np.cumsum(counts)])
        return cls(n_rows, n_cols, offsets, cols, vals)


def identity_csr(n: int) -> SparseMatrixCsr:
    return SparseMatrixCsr(n, n, np.arange(n + 1), np.arange(n), np.ones(n))


def _csr_matvec(a: SparseMatrixCsr, v: np.ndarray) -> np.ndarray:
    out = np.zeros(a.n_rows)
    if a.nnz == 0:
        return out
    prod = a.values * v[a.col_indices]
    starts = a.row_offsets[:-1]
    # reduceat needs in-range indices; empty rows are fixed up afterwards
    seg = np.add.reduceat(prod, np.minimum(starts, a.nnz - 1))
    seg[np.diff(a.row_offsets) == 0] = 0.0
    out[:] = seg
    return out


def _csr_matvec_transpose(a: SparseMatrixCsr, v: np.ndarray) -> np.ndarray:
    if a.nnz == 0:
        return np.zeros(a.n_cols)
    rows = np.repeat(np.arange(a.n_rows), np.diff(a.row_offsets))
    return np.bincount(a.col_indices, weights=a.values * v[rows], minlength=a.n_cols)


class LinearOperator:
    """Square linear map exposed only through matrix-vector products."""

    def __init__(self, dimension: int):
        self.dimension = int(dimension)

    def apply(self, v: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _check(self, v) -> np.ndarray:
        return as_vector(v, self.dimension)


class MatrixOperator(LinearOperator):
    """Wraps a square CSR or dense matrix."""

    def __init__(self, matrix):
        if isinstance(matrix, SparseMatrixCsr):
            n_rows, n_cols = matrix.shape
        else:
            matrix = as_dense_matrix(matrix)
            n_rows, n_cols = matrix.shape
        if n_rows != n_cols:
            raise ValueError(f"operator requires a square matrix, got {n_rows}x{n_cols}")
        super().__init__(n_rows)
        self.matrix = matrix

    def apply(self, v):
        v = self._check(v)
        if isinstance(self.matrix, SparseMatrixCsr):
            return _csr_matvec(self.matrix, v)
        return self.matrix @ v


class NormalEquationsOperator(LinearOperator):
    """Lazy v -> A^T (A v) for a possibly rectangular A; never forms A^T A."""

    def __init__(self, a):
        if not isinstance(a, SparseMatrixCsr):
            a = as_dense_matrix(a)
        super().__init__(a.shape[1])
        self.a = a

    def apply(self, v):
        v = self._check(v)
        if isinstance(self.a, SparseMatrixCsr):
            return _csr_matvec_transpose(self.a, _csr_matvec(self.a, v))
        return self.a.T @ (self.a @ v)


def as_operator(a) -> LinearOperator:
    """Coerce a CSR matrix, dense square array, or operator to LinearOperator."""
    if isinstance(a, LinearOperator):
        return a
    if isinstance(a, SparseMatrixCsr) or (isinstance(a, np.ndarray) and a.ndim == 2):
        return MatrixOperator(a)
    raise TypeError(f"cannot interpret {type(a).__name__} as a linear operator")


def matvec(a, v) -> np.ndarray:
    """Matrix-vector product for CSR, dense, or operator inputs.

    Deterministic: the summation order within each row is fixed, so repeated
    calls with identical inputs are bit-identical.
    """
    if isinstance(a, SparseMatrixCsr):
        v = as_vector(v, a.n_cols)
        return _csr_matvec(a, v)
    if isinstance(a, LinearOperator):
        return a.apply(as_vector(v, a.dimension))
    a = as_dense_matrix(a)
    v = as_vector(v, a.shape[1])
    return a @ v


def matvec_transpose(a, v) -> np.ndarray:
    """Product A^T v for CSR or dense A (v has length n_rows)."""
    if isinstance(a, SparseMatrixCsr):
        v = as_vector(v, a.n_rows)
        return _csr_matvec_transpose(a, v)
    a = as_dense_matrix(a)
    v = as_vector(v, a.shape[0])
    return a.T @ v


def saxpy(alpha: float, x, y) -> np.ndarray:
    """Return alpha * x + y elementwise."""
    x = as_vector(x, name="x")
    y = as_vector(y, name="y")
    if x.size != y.size:
        raise ValueError(f"length mismatch: x has {x.size}, y has {y.size}")
    return alpha * x + y


def dot(x, y) -> float:
    """Inner product with a fixed, deterministic summation order."""
    x = as_vector(x, name="x")
    y = as_vector(y, name="y")
    if x.size != y.size:
        raise ValueError(f"length mismatch: x has {x.size}, y has {y.size}")
    return float(np.dot(x, y))


def normal_equations(a, b) -> tuple[NormalEquationsOperator, np.ndarray]:
    """Reduce Ax = b (full column rank A) to the SPD system (A^T A) x = A^T b.

    The returned operator evaluates A^T (A v) lazily with two matvecs; A^T A
    is never materialized.
    """
    op = NormalEquationsOperator(a)
    n_rows = a.shape[0]
    b = as_vector(b, n_rows, name="b")
    return op, matvec_transpose(a, b)
