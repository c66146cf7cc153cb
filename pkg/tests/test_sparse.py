import numpy as np
import pytest

from cgkit import (
    SparseMatrixCsr,
    as_operator,
    as_vector,
    dot,
    identity_csr,
    matvec,
    matvec_transpose,
    normal_equations,
    saxpy,
)
from cgkit.gallery import laplacian_2d, random_spd

from helpers import kahan_dot, triple_loop_matvec


class TestVectorValidation:
    def test_rejects_empty(self):
        with pytest.raises(ValueError, match="length > 0"):
            as_vector([])

    def test_rejects_nan_and_inf(self):
        with pytest.raises(ValueError, match="non-finite"):
            as_vector([1.0, np.nan])
        with pytest.raises(ValueError, match="non-finite"):
            as_vector([np.inf, 0.0])

    def test_length_mismatch_names_both(self):
        with pytest.raises(ValueError, match="length 2, expected 3"):
            as_vector([1.0, 2.0], n=3)


class TestCsrConstruction:
    def test_offsets_must_start_at_zero(self):
        with pytest.raises(ValueError, match="row_offsets\\[0\\]"):
            SparseMatrixCsr(2, 2, [1, 1, 2], [0, 1], [1.0, 1.0])

    def test_offsets_must_be_monotone(self):
        with pytest.raises(ValueError, match="non-decreasing"):
            SparseMatrixCsr(2, 2, [0, 2, 1], [0, 1], [1.0, 1.0])

    def test_columns_must_be_in_range(self):
        with pytest.raises(ValueError, match="column indices"):
            SparseMatrixCsr(2, 2, [0, 1, 2], [0, 5], [1.0, 1.0])

    def test_columns_strictly_increasing_within_row(self):
        with pytest.raises(ValueError, match="strictly increasing"):
            SparseMatrixCsr(1, 3, [0, 2], [1, 1], [1.0, 1.0])
        # equal columns in different rows are fine
        SparseMatrixCsr(2, 3, [0, 1, 2], [1, 1], [1.0, 1.0])

    def test_values_must_be_finite(self):
        with pytest.raises(ValueError, match="finite"):
            SparseMatrixCsr(1, 1, [0, 1], [0], [np.nan])

    def test_from_coo_sums_duplicates_and_sorts(self):
        a = SparseMatrixCsr.from_coo(2, 2, [0, 0, 1, 0], [1, 0, 1, 1], [5.0, 1.0, 2.0, 3.0])
        assert np.array_equal(a.to_dense(), [[1.0, 8.0], [0.0, 2.0]])

    def test_dense_round_trip(self):
        rng = np.random.default_rng(7)
        d = rng.standard_normal((6, 4)) * (rng.random((6, 4)) > 0.5)
        assert np.array_equal(SparseMatrixCsr.from_dense(d).to_dense(), d)


class TestMatvec:
    def test_identity(self):
        v = np.array([1.0, 2.0, 3.0])
        assert np.array_equal(matvec(identity_csr(3), v), v)

    def test_hand_2x2(self):
        a = SparseMatrixCsr.from_dense([[2.0, 1.0], [1.0, 3.0]])
        assert np.array_equal(matvec(a, [1.0, 1.0]), [3.0, 4.0])

    def test_against_dense_triple_loop_oracle(self):
        a = random_spd(100, condition_number=100.0, seed=0)
        v = np.random.default_rng(1).standard_normal(100)
        got = matvec(a, v)
        want = triple_loop_matvec(a.to_dense(), v)
        assert np.max(np.abs(got - want)) <= 1e-14 * np.max(np.abs(want))

    def test_sparse_pattern_against_oracle(self):
        a = laplacian_2d(12)
        v = np.random.default_rng(2).standard_normal(144)
        want = triple_loop_matvec(a.to_dense(), v)
        assert np.max(np.abs(matvec(a, v) - want)) <= 1e-14 * np.max(np.abs(want))

    def test_deterministic_repeat(self):
        a = random_spd(50, seed=3)
        v = np.random.default_rng(4).standard_normal(50)
        assert np.array_equal(matvec(a, v), matvec(a, v))

    def test_empty_rows_give_zero(self):
        a = SparseMatrixCsr(3, 3, [0, 0, 1, 1], [2], [5.0])
        assert np.array_equal(matvec(a, [1.0, 1.0, 1.0]), [0.0, 5.0, 0.0])

    def test_empty_last_row(self):
        a = SparseMatrixCsr(2, 2, [0, 1, 1], [0], [2.0])
        assert np.array_equal(matvec(a, [3.0, 1.0]), [6.0, 0.0])

    def test_dimension_mismatch_names_both_lengths(self):
        a = identity_csr(3)
        with pytest.raises(ValueError, match="length 2, expected 3"):
            matvec(a, [1.0, 2.0])

    def test_transpose_matches_dense(self):
        a = SparseMatrixCsr.from_dense(np.random.default_rng(5).standard_normal((7, 4)))
        v = np.random.default_rng(6).standard_normal(7)
        want = a.to_dense().T @ v
        assert np.allclose(matvec_transpose(a, v), want, rtol=1e-13, atol=0)


class TestSaxpy:
    def test_zero_alpha(self):
        assert np.array_equal(saxpy(0.0, [5.0, 5.0], [1.0, 2.0]), [1.0, 2.0])

    def test_hand_case(self):
        assert np.array_equal(saxpy(2.0, [1.0, 0.0], [0.0, 1.0]), [2.0, 1.0])

    def test_matches_scalar_loop(self):
        rng = np.random.default_rng(8)
        x, y = rng.standard_normal(1000), rng.standard_normal(1000)
        want = np.array([3.5 * a + b for a, b in zip(x, y)])
        assert np.array_equal(saxpy(3.5, x, y), want)

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="length mismatch"):
            saxpy(1.0, [1.0], [1.0, 2.0])


class TestDot:
    def test_hand_case(self):
        assert dot([1.0, 2.0, 3.0], [1.0, 2.0, 3.0]) == 14.0

    def test_orthogonal_units(self):
        assert dot([1.0, 0.0], [0.0, 1.0]) == 0.0

    def test_against_kahan_oracle(self):
        rng = np.random.default_rng(9)
        x = rng.standard_normal(10_000) * np.exp(rng.uniform(-3, 3, 10_000))
        y = rng.standard_normal(10_000)
        want = kahan_dot(x, y)
        assert abs(dot(x, y) - want) <= 1e-12 * abs(want)

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="length mismatch"):
            dot([1.0], [1.0, 2.0])


class TestNormalEquations:
    def test_identity(self):
        op, t = normal_equations(identity_csr(2), [1.0, 2.0])
        assert np.array_equal(t, [1.0, 2.0])
        assert np.array_equal(op.apply([1.0, 2.0]), [1.0, 2.0])

    def test_diagonal(self):
        a = SparseMatrixCsr.from_dense(np.diag([2.0, 3.0]))
        op, t = normal_equations(a, [2.0, 3.0])
        assert np.array_equal(t, [4.0, 9.0])
        assert np.array_equal(op.apply([1.0, 1.0]), [4.0, 9.0])
        # the reduction preserves the solution x = (1, 1)
        assert np.allclose(np.linalg.solve(np.diag([4.0, 9.0]), t), [1.0, 1.0])

    def test_rectangular_against_materialized_product(self):
        rng = np.random.default_rng(10)
        a = rng.standard_normal((20, 10))
        op, t = normal_equations(a, rng.standard_normal(20))
        ata = a.T @ a
        v = rng.standard_normal(10)
        want = ata @ v
        assert np.max(np.abs(op.apply(v) - want)) <= 1e-13 * np.max(np.abs(want))
        assert op.dimension == 10

    def test_csr_rectangular(self):
        rng = np.random.default_rng(11)
        dense = rng.standard_normal((15, 6))
        a = SparseMatrixCsr.from_dense(dense)
        op, t = normal_equations(a, np.ones(15))
        assert np.allclose(t, dense.T @ np.ones(15), rtol=1e-13)
        v = rng.standard_normal(6)
        assert np.allclose(op.apply(v), dense.T @ (dense @ v), rtol=1e-12)


class TestOperators:
    def test_as_operator_rejects_rectangular(self):
        with pytest.raises(ValueError, match="square"):
            as_operator(np.ones((2, 3)))

    def test_as_operator_rejects_junk(self):
        with pytest.raises(TypeError):
            as_operator("nope")


def test_matvec_agreement_over_gallery():
    # CSR matvec vs dense product within 1e-13 relative in the max norm
    rng = np.random.default_rng(12)
    for a in (laplacian_2d(9), random_spd(60, 1e3, seed=13), identity_csr(40)):
        v = rng.standard_normal(a.shape[1])
        want = a.to_dense() @ v
        scale = np.max(np.abs(want)) or 1.0
        assert np.max(np.abs(matvec(a, v) - want)) <= 1e-13 * scale
