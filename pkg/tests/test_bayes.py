import numpy as np
import pytest

from cgkit import (
    RegressionPosterior,
    RngStream,
    SolveConfig,
    SparseMatrixCsr,
    gibbs_demo,
    posterior_precision_operator,
    sample_beta,
    sample_beta_cholesky_oracle,
)

from helpers import energy_distance_pvalue


def tiny_fixture():
    """p = 2, n = 5 posterior with known dense closed form."""
    x = np.array(
        [
            [1.0, 0.5],
            [-0.3, 1.2],
            [0.8, -0.7],
            [0.2, 0.9],
            [-1.1, 0.4],
        ]
    )
    y = np.array([1.0, 0.3, -0.2, 0.8, -0.5])
    tau2 = 0.5
    lam = np.array([1.5, 4.0])
    return RegressionPosterior(x, y, tau2, lam)


def dense_posterior_moments(post):
    x = post.design.to_dense() if isinstance(post.design, SparseMatrixCsr) else post.design
    phi = x.T @ x / post.noise_variance + np.diag(post.prior_precision)
    cov = np.linalg.inv(phi)
    mean = cov @ (x.T @ post.response) / post.noise_variance
    return mean, cov


class TestPosteriorValidation:
    def test_rejects_nonpositive_noise(self):
        with pytest.raises(ValueError, match="noise_variance"):
            RegressionPosterior(np.ones((3, 2)), np.ones(3), 0.0, np.ones(2))

    def test_rejects_nonpositive_precision(self):
        with pytest.raises(ValueError, match="prior_precision"):
            RegressionPosterior(np.ones((3, 2)), np.ones(3), 1.0, [1.0, -1.0])

    def test_rejects_mismatched_response(self):
        with pytest.raises(ValueError, match="response"):
            RegressionPosterior(np.ones((3, 2)), np.ones(4), 1.0, np.ones(2))


class TestPrecisionOperator:
    def test_zero_design_gives_prior_diagonal(self):
        post = RegressionPosterior(np.zeros((4, 3)), np.zeros(4), 1.0, [2.0, 3.0, 4.0])
        op = posterior_precision_operator(post)
        assert np.allclose(op.apply([1.0, 1.0, 1.0]), [2.0, 3.0, 4.0])

    def test_identity_design_unit_precision(self):
        post = RegressionPosterior(np.eye(3), np.zeros(3), 1.0, np.ones(3))
        op = posterior_precision_operator(post)
        v = np.array([1.0, -2.0, 0.5])
        assert np.allclose(op.apply(v), 2.0 * v)

    def test_matches_dense_materialization(self):
        rng = np.random.default_rng(100)
        x = rng.standard_normal((30, 10))
        post = RegressionPosterior(x, rng.standard_normal(30), 0.7, rng.uniform(0.5, 2.0, 10))
        op = posterior_precision_operator(post)
        phi = x.T @ x / 0.7 + np.diag(post.prior_precision)
        v = rng.standard_normal(10)
        want = phi @ v
        assert np.max(np.abs(op.apply(v) - want)) <= 1e-13 * np.max(np.abs(want))

    def test_sparse_design_matches_dense(self):
        rng = np.random.default_rng(101)
        dense = rng.standard_normal((20, 6)) * (rng.random((20, 6)) > 0.5)
        post_sparse = RegressionPosterior(
            SparseMatrixCsr.from_dense(dense), rng.standard_normal(20), 1.3, np.ones(6)
        )
        post_dense = RegressionPosterior(dense, post_sparse.response, 1.3, np.ones(6))
        v = rng.standard_normal(6)
        a = posterior_precision_operator(post_sparse).apply(v)
        b = posterior_precision_operator(post_dense).apply(v)
        assert np.allclose(a, b, rtol=1e-13)


class TestSampleBeta:
    def test_prior_only_moments(self):
        # X = 0: beta ~ N(0, Lambda^{-1}) in closed form
        lam = np.array([1.0, 4.0, 0.25])
        post = RegressionPosterior(np.zeros((4, 3)), np.zeros(4), 1.0, lam)
        rng = RngStream(200)
        draws = np.array([sample_beta(post, rng).beta for _ in range(20_000)])
        se_mean = np.sqrt(1.0 / lam / draws.shape[0])
        assert np.all(np.abs(draws.mean(axis=0)) <= 3.0 * se_mean)
        var = draws.var(axis=0)
        se_var = (1.0 / lam) * np.sqrt(2.0 / draws.shape[0])
        assert np.all(np.abs(var - 1.0 / lam) <= 4.0 * se_var)

    def test_same_seed_is_bit_identical(self):
        post = tiny_fixture()
        one = sample_beta(post, RngStream(42))
        two = sample_beta(post, RngStream(42))
        assert np.array_equal(one.beta, two.beta)
        assert one.solver_iterations == two.solver_iterations

    def test_seed_recorded_on_draw(self):
        draw = sample_beta(tiny_fixture(), RngStream(7))
        assert draw.seed == 7 and draw.converged

    def test_mean_matches_dense_solve(self):
        post = tiny_fixture()
        mean, cov = dense_posterior_moments(post)
        rng = RngStream(201)
        n_draws = 30_000
        draws = np.array([sample_beta(post, rng).beta for _ in range(n_draws)])
        se = np.sqrt(np.diag(cov) / n_draws)
        assert np.all(np.abs(draws.mean(axis=0) - mean) <= 3.0 * se)

    def test_non_convergence_is_surfaced_not_retried(self):
        post = tiny_fixture()
        cfg = SolveConfig(rel_tolerance=1e-14, max_iterations=1, record_trace=False)
        draw = sample_beta(post, RngStream(11), config=cfg)
        assert not draw.converged

    def test_unknown_preconditioner_rejected(self):
        with pytest.raises(ValueError, match="unknown preconditioner"):
            sample_beta(tiny_fixture(), RngStream(0), preconditioner="ilu")

    def test_jacobi_choice_runs(self):
        draw = sample_beta(tiny_fixture(), RngStream(3), preconditioner="jacobi")
        assert draw.converged


class TestCholeskyOracle:
    def test_prior_only_variance(self):
        # Lambda = 4: draws have variance 1/4
        post = RegressionPosterior(np.zeros((3, 1)), np.zeros(3), 1.0, [4.0])
        rng = RngStream(202)
        draws = np.array([sample_beta_cholesky_oracle(post, rng).beta[0] for _ in range(20_000)])
        se_var = 0.25 * np.sqrt(2.0 / draws.size)
        assert abs(draws.var() - 0.25) <= 4.0 * se_var

    def test_deterministic_under_fixed_seed(self):
        post = tiny_fixture()
        one = sample_beta_cholesky_oracle(post, RngStream(77))
        two = sample_beta_cholesky_oracle(post, RngStream(77))
        assert np.array_equal(one.beta, two.beta)

    def test_distributional_agreement_with_solver_draws(self):
        post = tiny_fixture()
        rng_a, rng_b = RngStream(203), RngStream(204)
        solver = np.array([sample_beta(post, rng_a).beta for _ in range(800)])
        oracle = np.array([sample_beta_cholesky_oracle(post, rng_b).beta for _ in range(800)])
        p = energy_distance_pvalue(solver, oracle, n_permutations=99, seed=205)
        assert p > 0.01, f"energy-distance test rejected: p={p}"

    def test_oracle_rejects_large_p(self):
        post = RegressionPosterior(np.zeros((2, 501)), np.zeros(2), 1.0, np.ones(501))
        with pytest.raises(ValueError, match="p <= 500"):
            sample_beta_cholesky_oracle(post, RngStream(0))


class TestGibbsDemo:
    def test_zero_sweeps_gives_empty_sequence(self):
        assert gibbs_demo(tiny_fixture(), 0, RngStream(0)) == []

    def test_mean_over_sweeps_matches_closed_form(self):
        post = tiny_fixture()
        mean, cov = dense_posterior_moments(post)
        draws = gibbs_demo(post, 10_000, RngStream(206))
        betas = np.array([d.beta for d in draws])
        se = np.sqrt(np.diag(cov) / betas.shape[0])
        assert np.all(np.abs(betas.mean(axis=0) - mean) <= 3.0 * se)

    def test_emits_iteration_counts_per_draw(self):
        draws = gibbs_demo(tiny_fixture(), 5, RngStream(207))
        assert len(draws) == 5
        assert all(d.solver_iterations >= 1 for d in draws)

    def test_prior_preconditioner_beats_plain_cg_under_strong_shrinkage(self):
        rng = np.random.default_rng(208)
        p, n = 100, 40
        lam = np.where(rng.random(p) < 0.9, 1e3, 1e-2)
        x = rng.standard_normal((n, p))
        y = rng.standard_normal(n)
        post = RegressionPosterior(x, y, 1.0, lam)
        with_prior = gibbs_demo(post, 10, RngStream(209), preconditioner="prior")
        without = gibbs_demo(post, 10, RngStream(209), preconditioner="none")
        med_prior = np.median([d.solver_iterations for d in with_prior])
        med_plain = np.median([d.solver_iterations for d in without])
        assert med_prior <= med_plain

    def test_negative_sweeps_rejected(self):
        with pytest.raises(ValueError, match="n_sweeps"):
            gibbs_demo(tiny_fixture(), -1, RngStream(0))


class TestRngStream:
    def test_same_seed_same_sequence(self):
        a = RngStream(12345).standard_normal(10)
        b = RngStream(12345).standard_normal(10)
        assert np.array_equal(a, b)

    def test_different_seeds_differ(self):
        assert not np.array_equal(RngStream(1).standard_normal(4), RngStream(2).standard_normal(4))

    def test_stream_advances(self):
        s = RngStream(5)
        assert not np.array_equal(s.standard_normal(4), s.standard_normal(4))
