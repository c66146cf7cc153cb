"""Conjugate gradient and preconditioned conjugate gradient.

Both solvers use the economic recurrence: the direction coefficient is the
ratio of successive rho values, and the residual is updated in place as
``r - a*w`` rather than recomputed. Exactly one matrix-vector product is
spent per iteration (the initial residual is free for a zero initial guess),
and PCG additionally spends one preconditioner application per iteration on
converged runs. With an identity preconditioner, PCG produces iterates that
are bit-identical to CG.

Termination: ||r_k||_2 <= max(rel_tolerance * ||b||_2, abs_tolerance). The
recurrence residual is authoritative during iteration; set
``recheck_final_residual`` to re-evaluate b - Ax once at exit (costs one
extra matvec) and report that instead.

Non-SPD operators surface as breakdown diagnoses on the result, not
exceptions: ``NotPositiveDefinite`` (p^T A p <= 0), ``PreconditionerBreakdown``
(r^T M^{-1} r <= 0 with r != 0), ``NumericalDivergence`` (non-finite residual
norm), and ``MaxIterationsExceeded`` (best iterate attached).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .sparse import LinearOperator, as_operator, as_vector, matvec

NOT_POSITIVE_DEFINITE = "NotPositiveDefinite"
PRECONDITIONER_BREAKDOWN = "PreconditionerBreakdown"
NUMERICAL_DIVERGENCE = "NumericalDivergence"
MAX_ITERATIONS_EXCEEDED = "MaxIterationsExceeded"


@dataclass
class SolveConfig:
    """Solver settings; ``max_iterations`` defaults to 10n at solve time."""

    rel_tolerance: float = 1e-10
    abs_tolerance: float = 0.0
    max_iterations: int | None = None
    record_trace: bool = True
    record_vectors: bool = False
    recheck_final_residual: bool = False

    def __post_init__(self):
        if self.rel_tolerance < 0 or self.abs_tolerance < 0:
            raise ValueError("tolerances must be >= 0")
        if self.max_iterations is not None and self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


@dataclass
class IterationTrace:
    """Per-iteration solve record.

    Row 0 describes the initial state (step size and direction coefficient
    are NaN there); row k holds the step size a and direction coefficient
    tau computed during iteration k, the residual norm ||r_k||, and the
    energy phi(x_k) = x_k.A x_k / 2 - x_k.b evaluated from the tracked
    residual via phi = -(x.(b + r))/2, which costs no extra matvec.

    With ``record_vectors`` on, ``residuals[k]``, ``iterates[k]`` and
    ``directions[k]`` (the direction used in iteration k; row 0 is None)
    are stored for identity and bound checks.
    """

    iterations: list[int] = field(default_factory=list)
    residual_norms: list[float] = field(default_factory=list)
    step_sizes: list[float] = field(default_factory=list)
    direction_coefficients: list[float] = field(default_factory=list)
    energies: list[float] = field(default_factory=list)
    residuals: list[np.ndarray] | None = None
    directions: list[np.ndarray | None] | None = None
    iterates: list[np.ndarray] | None = None

    def __len__(self) -> int:
        return len(self.iterations)


@dataclass
class SolveResult:
    """Outcome of a CG/PCG run.

    ``converged`` implies the reported ``final_rel_residual`` met the
    stopping criterion. On ``MaxIterationsExceeded`` the attached solution
    is the iterate with the smallest recurrence residual norm.
    """

    solution: np.ndarray
    iterations: int
    converged: bool
    final_rel_residual: float
    trace: IterationTrace | None = None
    breakdown: str | None = None


def residual(a, x, b) -> np.ndarray:
    """True residual b - Ax."""
    op = as_operator(a)
    x = as_vector(x, op.dimension, name="x")
    b = as_vector(b, op.dimension, name="b")
    return b - op.apply(x)


def solve_cg(a, b, x0=None, config: SolveConfig | None = None) -> SolveResult:
    """Solve SPD Ax = b by conjugate gradient."""
    return _engine(a, b, x0, None, config)


def solve_pcg(a, b, preconditioner, x0=None, config: SolveConfig | None = None) -> SolveResult:
    """Solve SPD Ax = b by preconditioned conjugate gradient."""
    if preconditioner is None:
        raise ValueError("preconditioner is required; use solve_cg for the plain method")
    return _engine(a, b, x0, preconditioner, config)


def _energy(x: np.ndarray, b: np.ndarray, r: np.ndarray) -> float:
    # phi(x) = x.Ax/2 - x.b with Ax = b - r taken from the tracked residual
    return -0.5 * float(x @ (b + r))


def _engine(a, b, x0, precond, config) -> SolveResult:
    op = as_operator(a)
    n = op.dimension
    b = as_vector(b, n, name="b")
    cfg = config if config is not None else SolveConfig()
    if precond is not None and precond.dimension != n:
        raise ValueError(
            f"preconditioner dimension {precond.dimension} does not match system size {n}"
        )

    if x0 is None:
        x = np.zeros(n)
        r = b.copy()
    else:
        x = as_vector(x0, n, name="x0").copy()
        # a zero initial guess costs no matvec, preserving the cost contract
        r = b.copy() if not np.any(x) else b - op.apply(x)

    norm_b = float(np.linalg.norm(b))
    threshold = max(cfg.rel_tolerance * norm_b, cfg.abs_tolerance)
    max_iterations = cfg.max_iterations if cfg.max_iterations is not None else 10 * n

    trace = None
    if cfg.record_trace:
        trace = IterationTrace()
        if cfg.record_vectors:
            trace.residuals, trace.directions, trace.iterates = [], [], []

    def record(k, rnorm, a_k, tau_k, p_vec):
        if trace is None:
            return
        trace.iterations.append(k)
        trace.residual_norms.append(rnorm)
        trace.step_sizes.append(a_k)
        trace.direction_coefficients.append(tau_k)
        trace.energies.append(_energy(x, b, r))
        if trace.residuals is not None:
            trace.residuals.append(r.copy())
            trace.iterates.append(x.copy())
            trace.directions.append(None if p_vec is None else p_vec.copy())

    def rel(rnorm):
        return rnorm / norm_b if norm_b > 0 else rnorm

    rr = float(r @ r)
    rnorm = float(np.sqrt(rr))
    record(0, rnorm, np.nan, np.nan, None)
    if rnorm <= threshold:
        return _finish(op, x, b, 0, True, rel(rnorm), trace, None, cfg, threshold, norm_b)

    if precond is None:
        z = r
        rho_c = rr
    else:
        z = precond.apply(r)
        rho_c = float(r @ z)
        if rho_c <= 0.0:
            return _finish(
                op, x, b, 0, False, rel(rnorm), trace, PRECONDITIONER_BREAKDOWN, cfg,
                threshold, norm_b,
            )
    p = z.copy()
    rho_minus = rho_c

    best_rnorm, best_x = rnorm, x.copy()
    k = 0
    converged = False
    breakdown = None
    while k < max_iterations:
        k += 1
        tau = np.nan
        if k > 1:
            tau = rho_c / rho_minus
            p = z + tau * p
        w = op.apply(p)
        pw = float(p @ w)
        if not np.isfinite(pw):
            breakdown = NUMERICAL_DIVERGENCE
            k -= 1
            break
        if pw <= 0.0:
            breakdown = NOT_POSITIVE_DEFINITE
            k -= 1  # the update never completed
            break
        a_k = rho_c / pw
        x = x + a_k * p
        r = r - a_k * w
        rr = float(r @ r)
        rnorm = float(np.sqrt(rr))
        if not np.isfinite(rnorm):
            breakdown = NUMERICAL_DIVERGENCE
            break
        record(k, rnorm, a_k, tau, p)
        if rnorm < best_rnorm:
            best_rnorm, best_x = rnorm, x.copy()
        if rnorm <= threshold:
            converged = True
            break
        if precond is None:
            z = r
            rho_minus, rho_c = rho_c, rr
        else:
            z = precond.apply(r)
            rho_minus, rho_c = rho_c, float(r @ z)
            if rho_c <= 0.0:
                breakdown = PRECONDITIONER_BREAKDOWN
                break

    if not converged and breakdown is None:
        breakdown = MAX_ITERATIONS_EXCEEDED
        x, rnorm = best_x, best_rnorm

    return _finish(op, x, b, k, converged, rel(rnorm), trace, breakdown, cfg, threshold, norm_b)


def _finish(op, x, b, iterations, converged, final_rel, trace, breakdown, cfg, threshold, norm_b):
    if cfg.recheck_final_residual:
        true_norm = float(np.linalg.norm(b - op.apply(x)))
        final_rel = true_norm / norm_b if norm_b > 0 else true_norm
        converged = true_norm <= threshold
        if converged:
            breakdown = None
    return SolveResult(
        solution=x,
        iterations=iterations,
        converged=converged,
        final_rel_residual=final_rel,
        trace=trace,
        breakdown=breakdown,
    )
