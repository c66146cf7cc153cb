"""Reference problem instances for tests, benchmarks, and demos."""

from __future__ import annotations

import numpy as np

from .sparse import SparseMatrixCsr


def laplacian_2d(nx: int, ny: int | None = None) -> SparseMatrixCsr:
    """Five-point Laplacian on an nx-by-ny grid with Dirichlet boundaries.

    Rows follow the natural (row-major) grid ordering; the stencil is
    [4, -1, -1, -1, -1]. SPD with condition number growing like the square
    of the grid side.
    """
    if ny is None:
        ny = nx
    if nx < 1 or ny < 1:
        raise ValueError("grid dimensions must be positive")
    n = nx * ny
    rows, cols, vals = [], [], []
    for iy in range(ny):
        for ix in range(nx):
            i = iy * nx + ix
            rows.append(i)
            cols.append(i)
            vals.append(4.0)
            for jx, jy in ((ix - 1, iy), (ix + 1, iy), (ix, iy - 1), (ix, iy + 1)):
                if 0 <= jx < nx and 0 <= jy < ny:
                    rows.append(i)
                    cols.append(jy * nx + jx)
                    vals.append(-1.0)
    return SparseMatrixCsr.from_coo(n, n, rows, cols, vals)


def random_spd(n: int, condition_number: float = 100.0, seed: int = 0) -> SparseMatrixCsr:
    """Dense-pattern SPD matrix Q diag(l) Q^T with log-spaced spectrum.

    The spectrum runs from 1 to ``condition_number``; Q is a random
    orthogonal matrix drawn from the given seed.
    """
    if condition_number < 1:
        raise ValueError("condition_number must be >= 1")
    rng = np.random.default_rng(seed)
    lam = np.logspace(0.0, np.log10(condition_number), n) if n > 1 else np.ones(1)
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    a = (q * lam) @ q.T
    a = 0.5 * (a + a.T)
    return SparseMatrixCsr.from_dense(a)


def clustered_diagonal(
    n: int,
    centers,
    jitter: float = 0.0,
    seed: int = 0,
) -> SparseMatrixCsr:
    """Diagonal SPD matrix whose eigenvalues sit in clusters at ``centers``.

    Each eigenvalue is its cluster center scaled by a uniform factor in
    [1 - jitter, 1 + jitter]; jitter = 0 gives exactly len(centers)
    distinct eigenvalues. Cluster sizes are as equal as n allows.
    """
    centers = np.asarray(centers, dtype=np.float64)
    if centers.size < 1 or np.any(centers <= 0):
        raise ValueError("centers must be positive")
    if not 0 <= jitter < 1:
        raise ValueError("jitter must lie in [0, 1)")
    h = centers.size
    sizes = [n // h] * (h - 1) + [n - (n // h) * (h - 1)]
    lam = np.concatenate([np.full(s, c) for c, s in zip(centers, sizes)])
    if jitter:
        rng = np.random.default_rng(seed)
        lam = lam * (1.0 + rng.uniform(-jitter, jitter, n))
    return SparseMatrixCsr(n, n, np.arange(n + 1), np.arange(n), lam)


def badly_scaled_spd(n: int, span: float = 1e4, seed: int = 0) -> SparseMatrixCsr:
    """Well-conditioned core wrapped in diagonal scaling spanning [1/span, span].

    Diagonal entries range over roughly span^2, which cripples plain CG and
    is exactly what diagonal preconditioning repairs.
    """
    rng = np.random.default_rng(seed)
    core = random_spd(n, condition_number=10.0, seed=seed).to_dense()
    scale = np.logspace(-np.log10(span), np.log10(span), n)
    rng.shuffle(scale)
    a = core * np.outer(np.sqrt(scale), np.sqrt(scale))
    a = 0.5 * (a + a.T)
    return SparseMatrixCsr.from_dense(a)
