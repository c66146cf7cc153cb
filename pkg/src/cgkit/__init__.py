"""Conjugate-gradient toolkit: sparse SPD solvers, preconditioners,
convergence-bound verification, and exact Gaussian posterior sampling."""

from .analysis import (
    BoundReport,
    SpectralSummary,
    check_bound_eq2,
    check_bound_eq3,
    predict_cluster_iterations,
    symmetric_eigenvalues,
)
from .bayes import (
    GaussianDraw,
    PosteriorPrecisionOperator,
    RegressionPosterior,
    RngStream,
    gibbs_demo,
    posterior_precision_operator,
    sample_beta,
    sample_beta_cholesky_oracle,
)
from .matrix_market import MatrixMarketError, read_matrix_market, write_matrix_market
from .preconditioners import (
    ExactInversePreconditioner,
    FactorizationBreakdown,
    IdentityPreconditioner,
    IncompleteCholeskyPreconditioner,
    JacobiPreconditioner,
    Preconditioner,
    PriorDiagonalPreconditioner,
    SsorPreconditioner,
    exact_inverse_from,
    identity_preconditioner,
    incomplete_cholesky_from,
    jacobi_from,
    prior_diagonal_from,
    ssor_from,
)
from .solvers import (
    MAX_ITERATIONS_EXCEEDED,
    NOT_POSITIVE_DEFINITE,
    NUMERICAL_DIVERGENCE,
    PRECONDITIONER_BREAKDOWN,
    IterationTrace,
    SolveConfig,
    SolveResult,
    residual,
    solve_cg,
    solve_pcg,
)
from .sparse import (
    LinearOperator,
    MatrixOperator,
    NormalEquationsOperator,
    SparseMatrixCsr,
    as_dense_matrix,
    as_operator,
    as_vector,
    dot,
    identity_csr,
    matvec,
    matvec_transpose,
    normal_equations,
    saxpy,
)

__version__ = "0.1.0"
