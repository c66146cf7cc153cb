"""Command-line front door.

Subcommands:

* ``solve``  - solve one system from a Matrix Market file, write the
  solution vector (CSV) and a JSON report.
* ``bounds`` - run CG with full tracing and emit a CSV of the two
  convergence bounds evaluated along the trace.
* ``sample`` - draw from a conditional regression posterior; emits a CSV
  of draws and a JSON summary of iteration statistics.
* ``bench``  - run every preconditioner over a directory of matrices and
  emit a CSV of iteration counts and timings.

Exit codes: 0 success/convergence, 1 I/O or usage errors, 2 solver or
factorization breakdown, 3 iteration limit reached. JSON report keys are a
stable contract: iterations, converged, final_rel_residual, wall_time_ms,
breakdown, n, preconditioner.

Vectors are read as headerless CSV (one value per line, or comma
separated). All randomness flows from ``--seed``; when absent, a fresh
seed is generated and printed so the run stays reproducible after the fact.
"""

from __future__ import annotations

import argparse
import csv
import json
import secrets
import sys
import time
from pathlib import Path

import numpy as np

from .analysis import check_bound_eq2, check_bound_eq3, symmetric_eigenvalues
from .bayes import PRECONDITIONER_CHOICES, RegressionPosterior, RngStream, sample_beta
from .matrix_market import MatrixMarketError, read_matrix_market
from .preconditioners import (
    FactorizationBreakdown,
    exact_inverse_from,
    identity_preconditioner,
    incomplete_cholesky_from,
    jacobi_from,
    prior_diagonal_from,
    ssor_from,
)
from .solvers import MAX_ITERATIONS_EXCEEDED, SolveConfig, solve_cg, solve_pcg
from .sparse import SparseMatrixCsr, as_vector

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_BREAKDOWN = 2
EXIT_MAX_ITERATIONS = 3

_BENCH_PRECONDITIONERS = ("none", "jacobi", "ssor", "ic0", "prior")


class CliError(Exception):
    """Usage or input error; message goes to stderr, exit code 1."""


def _read_vector(path) -> np.ndarray:
    try:
        values = []
        with open(path, "r", encoding="ascii") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    values.extend(float(tok) for tok in line.split(","))
        return as_vector(values, name=str(path))
    except OSError as exc:
        raise CliError(f"cannot read vector {path}: {exc}") from exc
    except ValueError as exc:
        raise CliError(f"bad vector file {path}: {exc}") from exc


def _write_vector(path, v: np.ndarray):
    with open(path, "w", encoding="ascii") as fh:
        fh.writelines(f"{float(x)!r}\n" for x in v)


def _read_square_matrix(path):
    try:
        matrix = read_matrix_market(path)
    except OSError as exc:
        raise CliError(f"cannot read matrix {path}: {exc}") from exc
    except MatrixMarketError as exc:
        raise CliError(f"cannot parse {path}: {exc}") from exc
    n_rows, n_cols = matrix.shape
    if n_rows != n_cols:
        raise CliError(f"matrix {path} is {n_rows}x{n_cols}, expected square")
    return matrix


def _build_preconditioner(name, matrix, omega, prior_precision=None):
    n = matrix.shape[0]
    if name == "none":
        return None
    if name == "jacobi":
        return jacobi_from(matrix)
    if name == "ssor":
        if not isinstance(matrix, SparseMatrixCsr):
            matrix = SparseMatrixCsr.from_dense(matrix)
        return ssor_from(matrix, omega)
    if name == "ic0":
        if not isinstance(matrix, SparseMatrixCsr):
            matrix = SparseMatrixCsr.from_dense(matrix)
        return incomplete_cholesky_from(matrix)
    if name == "prior":
        if prior_precision is None:
            raise CliError("--precond prior requires --lambda with the precision diagonal")
        return prior_diagonal_from(as_vector(prior_precision, n, name="lambda"))
    if name == "exact":
        return exact_inverse_from(matrix)
    raise CliError(f"unknown preconditioner {name!r}")


def _solve_report(matrix, b, preconditioner, cfg):
    start = time.perf_counter()
    if preconditioner is None:
        result = solve_cg(matrix, b, config=cfg)
    else:
        result = solve_pcg(matrix, b, preconditioner, config=cfg)
    elapsed_ms = (time.perf_counter() - start) * 1000.0
    return result, elapsed_ms


def _exit_code_for(result) -> int:
    if result.converged:
        return EXIT_OK
    if result.breakdown == MAX_ITERATIONS_EXCEEDED:
        return EXIT_MAX_ITERATIONS
    return EXIT_BREAKDOWN


def run_solve(args) -> int:
    matrix = _read_square_matrix(args.matrix)
    n = matrix.shape[0]
    b = _read_vector(args.rhs) if args.rhs else np.ones(n)
    if b.size != n:
        raise CliError(f"right-hand side length {b.size} does not match n = {n}")
    lam = _read_vector(args.lam) if args.lam else None
    try:
        preconditioner = _build_preconditioner(args.precond, matrix, args.ssor_omega, lam)
    except FactorizationBreakdown as exc:
        print(f"factorization breakdown: {exc}", file=sys.stderr)
        _write_json(args.report, {
            "iterations": 0, "converged": False, "final_rel_residual": None,
            "wall_time_ms": 0.0, "breakdown": "FactorizationBreakdown",
            "n": n, "preconditioner": args.precond,
        })
        return EXIT_BREAKDOWN
    cfg = SolveConfig(
        rel_tolerance=args.rel_tol,
        abs_tolerance=args.abs_tol,
        max_iterations=args.max_iters,
        recheck_final_residual=True,
    )
    result, elapsed_ms = _solve_report(matrix, b, preconditioner, cfg)
    if args.out:
        _write_vector(args.out, result.solution)
    _write_json(args.report, {
        "iterations": result.iterations,
        "converged": result.converged,
        "final_rel_residual": result.final_rel_residual,
        "wall_time_ms": elapsed_ms,
        "breakdown": result.breakdown,
        "n": n,
        "preconditioner": args.precond,
    })
    status = "converged" if result.converged else (result.breakdown or "stopped")
    print(
        f"{args.matrix}: n={n} precond={args.precond} iterations={result.iterations} "
        f"rel_residual={result.final_rel_residual:.3e} [{status}]"
    )
    return _exit_code_for(result)


def _write_json(path, payload):
    text = json.dumps(payload, indent=2)
    if path:
        Path(path).write_text(text + "\n", encoding="ascii")
    else:
        print(text)


def run_bounds(args) -> int:
    matrix = _read_square_matrix(args.matrix)
    n = matrix.shape[0]
    if n > 2000:
        raise CliError("bounds checking is desk-scale only (n <= 2000)")
    b = _read_vector(args.rhs) if args.rhs else np.ones(n)
    if b.size != n:
        raise CliError(f"right-hand side length {b.size} does not match n = {n}")
    dense = matrix.to_dense() if isinstance(matrix, SparseMatrixCsr) else matrix
    cfg = SolveConfig(
        rel_tolerance=args.rel_tol,
        max_iterations=args.max_iters,
        record_vectors=True,
    )
    result = solve_cg(matrix, b, config=cfg)
    spectrum = symmetric_eigenvalues(dense)
    x_star = np.linalg.solve(dense, b)
    eq2 = check_bound_eq2(result.trace, x_star, spectrum, matrix)
    eq3 = check_bound_eq3(result.trace, x_star, spectrum, matrix)
    eq2_by_k = {int(k): i for i, k in enumerate(eq2.iterations)}
    rows = []
    for i, k in enumerate(eq3.iterations):
        k = int(k)
        j = eq2_by_k.get(k)
        ok = bool(eq3.satisfied[i]) and (j is None or bool(eq2.satisfied[j]))
        rows.append({
            "k": k,
            "residual_norm": result.trace.residual_norms[k],
            "eq2_lhs": eq2.lhs[j] if j is not None else "",
            "eq2_rhs": eq2.rhs[j] if j is not None else "",
            "eq3_lhs": eq3.lhs[i],
            "eq3_rhs": eq3.rhs[i],
            "satisfied": ok,
        })
    _write_csv(args.out, ["k", "residual_norm", "eq2_lhs", "eq2_rhs", "eq3_lhs", "eq3_rhs", "satisfied"], rows)
    n_bad = sum(1 for row in rows if not row["satisfied"])
    print(
        f"{args.matrix}: n={n} kappa={spectrum.condition_number:.3e} "
        f"iterations={result.iterations} bound_violations={n_bad}"
    )
    return EXIT_OK


def _write_csv(path, header, rows):
    def emit(fh):
        writer = csv.DictWriter(fh, fieldnames=header)
        writer.writeheader()
        writer.writerows(rows)

    if path:
        with open(path, "w", newline="", encoding="ascii") as fh:
            emit(fh)
    else:
        emit(sys.stdout)


def run_sample(args) -> int:
    design = None
    try:
        design = read_matrix_market(args.design)
    except (OSError, MatrixMarketError) as exc:
        raise CliError(f"cannot read design matrix {args.design}: {exc}") from exc
    y = _read_vector(args.response)
    lam = _read_vector(args.lam)
    try:
        posterior = RegressionPosterior(design, y, args.tau2, lam)
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    seed = args.seed
    if seed is None:
        seed = secrets.randbits(63)
        print(f"seed: {seed}")
    rng = RngStream(seed)
    cfg = SolveConfig(
        rel_tolerance=args.rel_tol,
        max_iterations=args.max_iters,
        record_trace=False,
    )
    draws = []
    iteration_counts = []
    all_converged = True
    for _ in range(args.draws):
        draw = sample_beta(posterior, rng, config=cfg, preconditioner=args.precond)
        draws.append(draw.beta)
        iteration_counts.append(draw.solver_iterations)
        all_converged &= draw.converged
    if args.out:
        with open(args.out, "w", encoding="ascii") as fh:
            fh.writelines(",".join(repr(float(x)) for x in beta) + "\n" for beta in draws)
    counts = np.array(iteration_counts, dtype=float)
    summary = {
        "seed": seed,
        "draws": args.draws,
        "preconditioner": args.precond,
        "converged_all": bool(all_converged),
        "iterations": {
            "min": int(counts.min()) if counts.size else None,
            "median": float(np.median(counts)) if counts.size else None,
            "mean": float(counts.mean()) if counts.size else None,
            "max": int(counts.max()) if counts.size else None,
        },
    }
    _write_json(args.summary, summary)
    return EXIT_OK if all_converged else EXIT_BREAKDOWN


def run_bench(args) -> int:
    directory = Path(args.dir)
    if not directory.is_dir():
        raise CliError(f"{directory} is not a directory")
    paths = sorted(directory.glob("*.mtx"))
    lam = _read_vector(args.lam) if args.lam else None
    cfg = SolveConfig(
        rel_tolerance=args.rel_tol,
        max_iterations=args.max_iters,
        recheck_final_residual=True,
    )
    rows = []
    processed = 0
    for path in paths:
        try:
            matrix = _read_square_matrix(path)
        except CliError as exc:
            print(f"warning: skipping {path}: {exc}", file=sys.stderr)
            continue
        if not isinstance(matrix, SparseMatrixCsr):
            matrix = SparseMatrixCsr.from_dense(matrix)
        n = matrix.shape[0]
        b = np.ones(n)
        for name in _BENCH_PRECONDITIONERS:
            if name == "prior" and (lam is None or lam.size != n):
                continue
            try:
                preconditioner = _build_preconditioner(name, matrix, args.ssor_omega, lam)
            except (FactorizationBreakdown, ValueError) as exc:
                print(f"warning: {path} {name}: {exc}", file=sys.stderr)
                continue
            result, elapsed_ms = _solve_report(matrix, b, preconditioner, cfg)
            rows.append({
                "matrix": path.name,
                "n": n,
                "nnz": matrix.nnz,
                "preconditioner": name,
                "iterations": result.iterations,
                "wall_time_ms": round(elapsed_ms, 3),
                "final_rel_residual": result.final_rel_residual,
            })
        processed += 1
    if processed == 0:
        print("error: no readable matrices found", file=sys.stderr)
        return EXIT_ERROR
    rows.sort(key=lambda r: (r["matrix"], _BENCH_PRECONDITIONERS.index(r["preconditioner"])))
    _write_csv(args.out, ["matrix", "n", "nnz", "preconditioner", "iterations", "wall_time_ms", "final_rel_residual"], rows)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cgkit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add_tolerances(p, rel_default=1e-10):
        p.add_argument("--rel-tol", type=float, default=rel_default, help="relative residual tolerance")
        p.add_argument("--max-iters", type=int, default=None, help="iteration cap (default 10n)")

    p_solve = sub.add_parser("solve", help="solve a system from a Matrix Market file")
    p_solve.add_argument("--matrix", required=True, help="square .mtx file")
    p_solve.add_argument("--rhs", help="right-hand side CSV (default: vector of ones)")
    p_solve.add_argument(
        "--precond",
        choices=["none", "jacobi", "ssor", "ic0", "prior", "exact"],
        default="none",
    )
    p_solve.add_argument("--ssor-omega", type=float, default=1.0)
    p_solve.add_argument("--lambda", dest="lam", help="prior precision CSV (for --precond prior)")
    p_solve.add_argument("--abs-tol", type=float, default=0.0)
    add_tolerances(p_solve)
    p_solve.add_argument("--out", help="solution vector CSV path")
    p_solve.add_argument("--report", help="JSON report path (default: stdout)")
    p_solve.set_defaults(func=run_solve)

    p_bounds = sub.add_parser("bounds", help="emit convergence-bound CSV for a CG run")
    p_bounds.add_argument("--matrix", required=True)
    p_bounds.add_argument("--rhs")
    add_tolerances(p_bounds)
    p_bounds.add_argument("--out", help="CSV path (default: stdout)")
    p_bounds.set_defaults(func=run_bounds)

    p_sample = sub.add_parser("sample", help="draw from a regression posterior")
    p_sample.add_argument("--design", required=True, help="n x p design matrix .mtx")
    p_sample.add_argument("--response", required=True, help="length-n response CSV")
    p_sample.add_argument("--tau2", type=float, required=True, help="noise variance")
    p_sample.add_argument("--lambda", dest="lam", required=True, help="length-p prior precision CSV")
    p_sample.add_argument("--draws", type=int, required=True)
    p_sample.add_argument("--seed", type=int, default=None)
    p_sample.add_argument("--precond", choices=list(PRECONDITIONER_CHOICES), default="prior")
    add_tolerances(p_sample)
    p_sample.add_argument("--out", help="draws CSV path")
    p_sample.add_argument("--summary", help="JSON summary path (default: stdout)")
    p_sample.set_defaults(func=run_sample)

    p_bench = sub.add_parser("bench", help="compare preconditioners over a matrix corpus")
    p_bench.add_argument("--dir", required=True, help="directory of .mtx files")
    p_bench.add_argument("--ssor-omega", type=float, default=1.0)
    p_bench.add_argument("--lambda", dest="lam", help="prior precision CSV (adds prior rows)")
    add_tolerances(p_bench, rel_default=1e-8)
    p_bench.add_argument("--out", help="CSV path (default: stdout)")
    p_bench.set_defaults(func=run_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


def console_entry():
    raise SystemExit(main())


if __name__ == "__main__":
    console_entry()
