"""Exact conditional-posterior draws for shrinkage-prior linear regression.

Model: y = X beta + eps with eps ~ N(0, tau^2 I) and independent prior
beta_j ~ N(0, 1/lambda_j). The conditional posterior of beta is Gaussian
with precision Phi = X^T X / tau^2 + Lambda and mean Phi^{-1} X^T y / tau^2.

Sampling is recast as a linear solve: draw u ~ N(0, I_n), v ~ N(0, I_p),
form the randomized right-hand side

    b = X^T y / tau^2 + X^T u / tau + sqrt(Lambda) * v,

whose covariance is Var(b) = X^T X / tau^2 + Lambda = Phi, and solve
Phi beta = b. The solution is then an exact draw from N(mean, Phi^{-1}) up
to solver tolerance. The solve runs preconditioned CG with the prior
precision Lambda as the (diagonal) preconditioner by default.

Hyperparameters tau^2 and Lambda are fixed here; chains that update them
would re-enter through a new RegressionPosterior per sweep.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .preconditioners import (
    JacobiPreconditioner,
    prior_diagonal_from,
)
from .sparse import (
    LinearOperator,
    SparseMatrixCsr,
    as_dense_matrix,
    as_vector,
    matvec,
    matvec_transpose,
)
from .solvers import SolveConfig, SolveResult, solve_cg, solve_pcg

PRECONDITIONER_CHOICES = ("prior", "jacobi", "none")


class RngStream:
    """Seeded stream of standard normals with bit-exact reproducibility.

    Backed by the counter-based Philox generator keyed on the seed; normal
    variates come from numpy's ziggurat transform, so a given (seed, call
    sequence) pins the exact draw values. A stream must not be shared
    across concurrent draws; use one stream per thread of work.
    """

    def __init__(self, seed: int):
        self.seed = int(seed)
        self._generator = np.random.Generator(np.random.Philox(self.seed))

    def standard_normal(self, size: int) -> np.ndarray:
        return self._generator.standard_normal(size)


@dataclass(frozen=True)
class RegressionPosterior:
    """Design matrix, response, noise variance, and prior precision diagonal."""

    design: object  # n x p SparseMatrixCsr or dense array
    response: np.ndarray
    noise_variance: float
    prior_precision: np.ndarray

    def __post_init__(self):
        x = self.design
        if not isinstance(x, SparseMatrixCsr):
            x = as_dense_matrix(x, name="design")
            object.__setattr__(self, "design", x)
        n, p = x.shape
        object.__setattr__(self, "response", as_vector(self.response, n, name="response"))
        lam = as_vector(self.prior_precision, p, name="prior_precision")
        if np.any(lam <= 0):
            raise ValueError("prior_precision entries must be strictly positive")
        object.__setattr__(self, "prior_precision", lam)
        if not self.noise_variance > 0:
            raise ValueError("noise_variance must be strictly positive")

    @property
    def n_obs(self) -> int:
        return self.design.shape[0]

    @property
    def n_coef(self) -> int:
        return self.design.shape[1]


@dataclass(frozen=True)
class GaussianDraw:
    """One posterior draw; reject it unless ``converged`` is True."""

    beta: np.ndarray
    solver_iterations: int
    seed: int
    converged: bool


class PosteriorPrecisionOperator(LinearOperator):
    """Lazy v -> X^T (X v) / tau^2 + Lambda * v; X^T X is never formed."""

    def __init__(self, posterior: RegressionPosterior):
        super().__init__(posterior.n_coef)
        self.posterior = posterior

    def apply(self, v):
        v = self._check(v)
        post = self.posterior
        xv = matvec(post.design, v)
        return matvec_transpose(post.design, xv) / post.noise_variance + post.prior_precision * v


def posterior_precision_operator(posterior: RegressionPosterior) -> PosteriorPrecisionOperator:
    """Operator for the posterior precision Phi = X^T X / tau^2 + Lambda."""
    return PosteriorPrecisionOperator(posterior)


def _phi_diagonal(posterior: RegressionPosterior) -> np.ndarray:
    """diag(Phi) without materializing Phi (column norms of X)."""
    x = posterior.design
    if isinstance(x, SparseMatrixCsr):
        col_sq = np.bincount(x.col_indices, weights=x.values**2, minlength=x.n_cols)
    else:
        col_sq = np.sum(x * x, axis=0)
    return col_sq / posterior.noise_variance + posterior.prior_precision


def _preconditioner_for(posterior: RegressionPosterior, choice: str):
    if choice == "prior":
        return prior_diagonal_from(posterior.prior_precision)
    if choice == "jacobi":
        return JacobiPreconditioner(_phi_diagonal(posterior))
    if choice == "none":
        return None
    raise ValueError(f"unknown preconditioner {choice!r}; expected one of {PRECONDITIONER_CHOICES}")


def sample_beta(
    posterior: RegressionPosterior,
    rng: RngStream,
    config: SolveConfig | None = None,
    preconditioner: str = "prior",
) -> GaussianDraw:
    """Draw beta from the conditional posterior via a randomized solve.

    Consumes n + p standard normals from ``rng`` (u then v), builds the
    perturbed right-hand side, and solves Phi beta = b. Non-convergence is
    surfaced through ``converged=False``; callers decide whether to reject.
    """
    post = posterior
    if config is None:
        config = SolveConfig(record_trace=False)  # traces are dead weight in bulk sampling
    tau = np.sqrt(post.noise_variance)
    u = rng.standard_normal(post.n_obs)
    v = rng.standard_normal(post.n_coef)
    b = (
        matvec_transpose(post.design, post.response) / post.noise_variance
        + matvec_transpose(post.design, u) / tau
        + np.sqrt(post.prior_precision) * v
    )
    operator = posterior_precision_operator(post)
    m = _preconditioner_for(post, preconditioner)
    if m is None:
        result = solve_cg(operator, b, config=config)
    else:
        result = solve_pcg(operator, b, m, config=config)
    return GaussianDraw(
        beta=result.solution,
        solver_iterations=result.iterations,
        seed=rng.seed,
        converged=result.converged,
    )


def sample_beta_cholesky_oracle(posterior: RegressionPosterior, rng: RngStream) -> GaussianDraw:
    """Exact draw through a dense Cholesky of Phi; the expensive baseline.

    Same target distribution as :func:`sample_beta`; consumes p standard
    normals. Dense arithmetic restricts it to p <= 500.
    """
    post = posterior
    p = post.n_coef
    if p > 500:
        raise ValueError("dense oracle is limited to p <= 500")
    x = post.design.to_dense() if isinstance(post.design, SparseMatrixCsr) else post.design
    phi = x.T @ x / post.noise_variance + np.diag(post.prior_precision)
    chol = np.linalg.cholesky(phi)  # raises LinAlgError if Phi is not SPD (signals a bug)
    t = x.T @ post.response / post.noise_variance
    mean = np.linalg.solve(phi, t)
    xi = rng.standard_normal(p)
    beta = mean + np.linalg.solve(chol.T, xi)
    return GaussianDraw(beta=beta, solver_iterations=0, seed=rng.seed, converged=True)


def gibbs_demo(
    posterior: RegressionPosterior,
    n_sweeps: int,
    rng: RngStream,
    config: SolveConfig | None = None,
    preconditioner: str = "prior",
) -> list[GaussianDraw]:
    """Fixed-hyperparameter chain: n_sweeps independent conditional draws.

    With tau^2 and Lambda held fixed the sweeps are independent; the value
    of the chain is the per-draw iteration counts it emits for comparing
    preconditioner choices on identical randomness.
    """
    if n_sweeps < 0:
        raise ValueError("n_sweeps must be >= 0")
    return [
        sample_beta(posterior, rng, config=config, preconditioner=preconditioner)
        for _ in range(n_sweeps)
    ]
