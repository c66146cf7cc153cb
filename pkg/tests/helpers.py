"""Shared oracles and instance builders for the test suite."""

from __future__ import annotations

import numpy as np

from cgkit import LinearOperator, Preconditioner, SparseMatrixCsr, as_operator


def dense_of(a) -> np.ndarray:
    return a.to_dense() if isinstance(a, SparseMatrixCsr) else np.asarray(a, dtype=float)


def triple_loop_matvec(a: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Row-by-row scalar-loop matvec; the independent dense oracle."""
    m, n = a.shape
    out = np.zeros(m)
    for i in range(m):
        s = 0.0
        for j in range(n):
            s += a[i, j] * v[j]
        out[i] = s
    return out


def kahan_dot(x: np.ndarray, y: np.ndarray) -> float:
    """Compensated-summation inner product oracle."""
    s = 0.0
    c = 0.0
    for a, b in zip(x, y):
        term = a * b - c
        t = s + term
        c = (t - s) - term
        s = t
    return s


def lu_determinant(a: np.ndarray) -> float:
    """Determinant via dense LU with partial pivoting (oracle)."""
    a = np.array(a, dtype=float)
    n = a.shape[0]
    det = 1.0
    for k in range(n):
        p = k + int(np.argmax(np.abs(a[k:, k])))
        if a[p, k] == 0.0:
            return 0.0
        if p != k:
            a[[k, p]] = a[[p, k]]
            det = -det
        det *= a[k, k]
        a[k + 1:, k] /= a[k, k]
        a[k + 1:, k + 1:] -= np.outer(a[k + 1:, k], a[k, k + 1:])
    return det


def spd_from_spectrum(eigenvalues, seed: int) -> np.ndarray:
    """Dense SPD matrix with the given spectrum and a random eigenbasis."""
    lam = np.asarray(eigenvalues, dtype=float)
    n = lam.size
    rng = np.random.default_rng(seed)
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    a = (q * lam) @ q.T
    return 0.5 * (a + a.T)


def manufactured_problem(a, seed: int):
    """Right-hand side with a known random solution: b = A x_true."""
    n = a.shape[0]
    x_true = np.random.default_rng(seed).standard_normal(n)
    return dense_of(a) @ x_true if not isinstance(a, SparseMatrixCsr) else _csr_b(a, x_true), x_true


def _csr_b(a: SparseMatrixCsr, x: np.ndarray) -> np.ndarray:
    from cgkit import matvec

    return matvec(a, x)


class CountingOperator(LinearOperator):
    """Wraps an operator and counts apply() calls (the matvec budget)."""

    def __init__(self, inner):
        inner = as_operator(inner)
        super().__init__(inner.dimension)
        self.inner = inner
        self.calls = 0

    def apply(self, v):
        self.calls += 1
        return self.inner.apply(v)


class CountingPreconditioner(Preconditioner):
    """Wraps a preconditioner and counts apply() calls."""

    kind = "Counting"

    def __init__(self, inner):
        super().__init__(inner.dimension)
        self.inner = inner
        self.calls = 0

    def apply(self, r):
        self.calls += 1
        return self.inner.apply(r)


def energy_distance_pvalue(x: np.ndarray, y: np.ndarray, n_permutations: int = 199,
                           seed: int = 0) -> float:
    """Two-sample energy-distance permutation test p-value.

    Precomputes the pooled pairwise-distance matrix, so keep the combined
    sample below ~6000 points. Each permutation costs one matrix-vector
    product with the distance matrix.
    """
    x = np.atleast_2d(x)
    y = np.atleast_2d(y)
    n, m = x.shape[0], y.shape[0]
    z = np.vstack([x, y])
    sq = np.sum(z * z, axis=1)
    d = np.sqrt(np.maximum(sq[:, None] + sq[None, :] - 2.0 * (z @ z.T), 0.0))
    total = float(d.sum())

    def statistic(mask_x):
        # quadratic forms via one matvec: within/between sums from d @ g
        g = mask_x.astype(float)
        dg = d @ g
        s_xx = float(g @ dg)
        s_x_all = float(dg.sum())
        s_xy = s_x_all - s_xx
        s_yy = total - 2.0 * s_x_all + s_xx
        return 2.0 * s_xy / (n * m) - s_xx / (n * n) - s_yy / (m * m)

    base = np.zeros(n + m, dtype=bool)
    base[:n] = True
    observed = statistic(base)
    rng = np.random.default_rng(seed)
    hits = 0
    for _ in range(n_permutations):
        if statistic(rng.permutation(base)) >= observed:
            hits += 1
    return (1.0 + hits) / (n_permutations + 1.0)
