"""Preconditioners: objects applying M^{-1} to a vector cheaply.

All kinds represent a symmetric positive-definite M through its inverse
action only; M^{-1} is never formed densely except for the ExactInverse
test kind. Instances are immutable after construction and their ``apply``
is pure, so concurrent use is safe.
"""

from __future__ import annotations

import numpy as np

from .sparse import SparseMatrixCsr, as_dense_matrix, as_vector


class FactorizationBreakdown(RuntimeError):
    """Incomplete factorization hit a nonpositive pivot despite shifting."""


class Preconditioner:
    """Base class; subclasses implement ``apply(r) -> M^{-1} r``."""

    kind = "Abstract"

    def __init__(self, dimension: int):
        self.dimension = int(dimension)

    def apply(self, r: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _check(self, r) -> np.ndarray:
        return as_vector(r, self.dimension, name="r")


class IdentityPreconditioner(Preconditioner):
    kind = "Identity"

    def apply(self, r):
        return self._check(r).copy()


class JacobiPreconditioner(Preconditioner):
    """Diagonal scaling M = diag(A)."""

    kind = "Jacobi"

    def __init__(self, diagonal):
        diagonal = as_vector(diagonal, name="diagonal")
        bad = np.nonzero(diagonal <= 0)[0]
        if bad.size:
            raise ValueError(f"nonpositive diagonal entry at row {bad[0]}")
        super().__init__(diagonal.size)
        self._inverse_diagonal = 1.0 / diagonal

    def apply(self, r):
        return self._check(r) * self._inverse_diagonal


class PriorDiagonalPreconditioner(JacobiPreconditioner):
    """M = Lambda, the prior precision diagonal of a shrinkage regression."""

    kind = "PriorDiagonal"


class SsorPreconditioner(Preconditioner):
    """Symmetric successive overrelaxation built from A = D + L + L^T.

    Uses the classical scaling M = (D + wL) D^{-1} (D + wL^T) / (w(2 - w)),
    applied as one forward and one backward triangular sweep. PCG iterates
    are invariant to the scalar convention; it only fixes what M denotes.
    """

    kind = "Ssor"

    def __init__(self, a: SparseMatrixCsr, omega: float = 1.0):
        if not isinstance(a, SparseMatrixCsr):
            raise TypeError("SSOR requires a SparseMatrixCsr")
        if a.n_rows != a.n_cols:
            raise ValueError("SSOR requires a square matrix")
        if not 0.0 < omega < 2.0:
            raise ValueError(f"omega must lie in (0, 2), got {omega}")
        super().__init__(a.n_rows)
        self.omega = float(omega)
        d = a.diagonal()
        bad = np.nonzero(d <= 0)[0]
        if bad.size:
            raise ValueError(f"nonpositive diagonal entry at row {bad[0]}")
        self._diag = d
        # per-row strict lower and strict upper slices of A
        self._lower = []
        self._upper = []
        for i in range(a.n_rows):
            cols, vals = a.row(i)
            split = np.searchsorted(cols, i)
            self._lower.append((cols[:split].copy(), vals[:split].copy()))
            has_diag = split < cols.size and cols[split] == i
            up = split + 1 if has_diag else split
            self._upper.append((cols[up:].copy(), vals[up:].copy()))

    def apply(self, r):
        r = self._check(r)
        n = self.dimension
        w, d = self.omega, self._diag
        # forward sweep: (D + wL) y = r
        y = np.empty(n)
        for i in range(n):
            cols, vals = self._lower[i]
            y[i] = (r[i] - w * float(vals @ y[cols])) / d[i]
        y *= d
        # backward sweep: (D + wL^T) z = y
        z = np.empty(n)
        for i in range(n - 1, -1, -1):
            cols, vals = self._upper[i]
            z[i] = (y[i] - w * float(vals @ z[cols])) / d[i]
        return w * (2.0 - w) * z


class IncompleteCholeskyPreconditioner(Preconditioner):
    """M = L L^T from a zero-fill incomplete Cholesky factor L."""

    kind = "IncompleteCholesky"

    def __init__(self, factor: SparseMatrixCsr):
        super().__init__(factor.n_rows)
        self.factor = factor
        self._rows = []
        diag = np.empty(factor.n_rows)
        for i in range(factor.n_rows):
            cols, vals = factor.row(i)
            if cols.size == 0 or cols[-1] != i:
                raise ValueError("factor must store a positive diagonal in every row")
            diag[i] = vals[-1]
            self._rows.append((cols[:-1].copy(), vals[:-1].copy()))
        self._diag = diag

    def apply(self, r):
        r = self._check(r)
        n = self.dimension
        # forward: L y = r
        y = np.empty(n)
        for i in range(n):
            cols, vals = self._rows[i]
            y[i] = (r[i] - float(vals @ y[cols])) / self._diag[i]
        # backward: L^T z = y, column-oriented over rows of L
        z = y.copy()
        for i in range(n - 1, -1, -1):
            z[i] /= self._diag[i]
            cols, vals = self._rows[i]
            if cols.size:
                z[cols] -= vals * z[i]
        return z


class ExactInversePreconditioner(Preconditioner):
    """M^{-1} = A^{-1} held densely; a test kind collapsing the spectrum."""

    kind = "ExactInverse"

    def __init__(self, inverse: np.ndarray):
        inverse = as_dense_matrix(inverse)
        super().__init__(inverse.shape[0])
        self._inverse = inverse

    def apply(self, r):
        return self._inverse @ self._check(r)


def identity_preconditioner(n: int) -> IdentityPreconditioner:
    return IdentityPreconditioner(n)


def _diag_of(a) -> np.ndarray:
    if isinstance(a, SparseMatrixCsr):
        return a.diagonal()
    return np.diag(as_dense_matrix(a)).copy()


def jacobi_from(a) -> JacobiPreconditioner:
    """Diagonal preconditioner from a matrix with strictly positive diagonal."""
    return JacobiPreconditioner(_diag_of(a))


def prior_diagonal_from(prior_precision) -> PriorDiagonalPreconditioner:
    """Preconditioner M = Lambda from a positive prior-precision diagonal."""
    return PriorDiagonalPreconditioner(prior_precision)


def ssor_from(a: SparseMatrixCsr, omega: float = 1.0) -> SsorPreconditioner:
    """SSOR preconditioner; omega = 1 is symmetric Gauss-Seidel."""
    return SsorPreconditioner(a, omega)


def incomplete_cholesky_from(a: SparseMatrixCsr) -> IncompleteCholeskyPreconditioner:
    """IC(0): lower-triangular factor restricted to A's lower sparsity pattern.

    A nonpositive pivot triggers refactorization of A + alpha*I with alpha
    doubling from 1e-3 * mean(diag(A)), three attempts, after which
    :class:`FactorizationBreakdown` is raised.
    """
    if not isinstance(a, SparseMatrixCsr):
        a = SparseMatrixCsr.from_dense(as_dense_matrix(a))
    if a.n_rows != a.n_cols:
        raise ValueError("incomplete Cholesky requires a square matrix")
    mean_diag = float(np.mean(a.diagonal()))
    shifts = [0.0] + [1e-3 * mean_diag * 2.0**t for t in range(3)]
    last_fail = None
    for shift in shifts:
        factor = _ic0(a, shift)
        if factor is not None:
            return IncompleteCholeskyPreconditioner(factor)
        last_fail = shift
    raise FactorizationBreakdown(
        f"nonpositive pivot persisted through diagonal shifts up to {last_fail:g}"
    )


def _ic0(a: SparseMatrixCsr, shift: float) -> SparseMatrixCsr | None:
    """One IC(0) attempt on A + shift*I; None on pivot breakdown."""
    n = a.n_rows
    l_cols: list[np.ndarray] = []
    l_vals: list[np.ndarray] = []
    for i in range(n):
        cols, vals = a.row(i)
        keep = cols <= i
        cols, vals = cols[keep], vals[keep].copy()
        if cols.size == 0 or cols[-1] != i:
            return None  # structurally missing diagonal cannot pivot
        if shift:
            vals[-1] += shift
        row_vals = np.empty(cols.size)
        for t in range(cols.size - 1):
            j = cols[t]
            jc, jv = l_cols[j], l_vals[j]
            # sparse dot of L[i, :j] and L[j, :j] over the shared pattern
            s = 0.0
            ti, tj = 0, 0
            while ti < t and tj < jc.size - 1:
                ci, cj = cols[ti], jc[tj]
                if ci == cj:
                    s += row_vals[ti] * jv[tj]
                    ti += 1
                    tj += 1
                elif ci < cj:
                    ti += 1
                else:
                    tj += 1
            row_vals[t] = (vals[t] - s) / l_vals[j][-1]
        pivot = vals[-1] - float(row_vals[:-1] @ row_vals[:-1])
        if pivot <= 0.0:
            return None
        row_vals[-1] = np.sqrt(pivot)
        l_cols.append(cols)
        l_vals.append(row_vals)
    offsets = np.concatenate([[0], np.cumsum([c.size for c in l_cols])])
    return SparseMatrixCsr(n, n, offsets, np.concatenate(l_cols), np.concatenate(l_vals))


def exact_inverse_from(a) -> ExactInversePreconditioner:
    """Dense-inverse preconditioner; only sensible at test scale."""
    dense = a.to_dense() if isinstance(a, SparseMatrixCsr) else as_dense_matrix(a)
    if dense.shape[0] != dense.shape[1]:
        raise ValueError("exact inverse requires a square matrix")
    if dense.shape[0] > 2000:
        raise ValueError("exact inverse is a desk-scale test kind (n <= 2000)")
    return ExactInversePreconditioner(np.linalg.inv(dense))
