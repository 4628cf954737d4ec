import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from bsmf.errors import ShapeError, ValidationError
from bsmf.linalg import (
    canonical,
    clip_floor,
    entries,
    frobenius_sq,
    l1_norm,
    row_sums,
    sparse_matrix,
    spmm,
)

from conftest import brute_matmul


class TestSparseMatrix:
    def test_canonical_order(self):
        a = sparse_matrix(2, 3, [(1, 2, 1.0), (0, 2, 3.0), (0, 0, 2.0)])
        assert list(entries(a)) == [(0, 0, 2.0), (0, 2, 3.0), (1, 2, 1.0)]

    @pytest.mark.parametrize(
        "bad",
        [
            [(0, 0, -1.0)],
            [(2, 0, 1.0)],
            [(0, 3, 1.0)],
            [(0, 0, 1.0), (0, 0, 2.0)],
            [(0, 0, float("nan"))],
        ],
    )
    def test_invariants_rejected(self, bad):
        with pytest.raises(ValidationError):
            sparse_matrix(2, 3, bad)

    def test_empty(self):
        a = sparse_matrix(2, 2)
        assert a.shape == (2, 2) and a.nnz == 0


class TestSpmm:
    def test_identity(self):
        eye = sparse_matrix(2, 2, [(0, 0, 1), (1, 1, 1)])
        np.testing.assert_array_equal(spmm(eye, [[1, 2], [3, 4]]), [[1, 2], [3, 4]])

    def test_zero(self):
        z = sparse_matrix(2, 3)
        np.testing.assert_array_equal(spmm(z, np.ones((3, 1))), [[0], [0]])

    def test_small(self):
        a = sparse_matrix(2, 2, [(0, 1, 2), (1, 0, 1)])
        np.testing.assert_array_equal(spmm(a, [[1], [1]]), [[2], [1]])

    def test_shape_error(self):
        with pytest.raises(ShapeError):
            spmm(sparse_matrix(2, 3), np.ones((2, 1)))

    def test_against_brute_force(self, rng):
        for _ in range(10):
            dense = rng.random((10, 10)) * (rng.random((10, 10)) < 0.4)
            b = rng.normal(size=(10, 10))
            got = spmm(canonical(sp.csr_array(dense)), b)
            want = brute_matmul(dense, b)
            np.testing.assert_allclose(got, want, rtol=1e-12, atol=1e-14)


class TestReductions:
    def test_frobenius_zero(self):
        assert frobenius_sq(np.zeros((3, 2))) == 0.0

    def test_frobenius_small(self):
        assert frobenius_sq([[1, 2], [3, 4]]) == 30.0

    def test_row_sums(self):
        a = sparse_matrix(2, 2, [(0, 1, 2), (1, 0, 1)])
        np.testing.assert_array_equal(row_sums(a), [2, 1])

    def test_l1(self):
        assert l1_norm([[-1, 2], [0, -3]]) == 6.0

    def test_sparse_matches_dense(self, rng):
        dense = rng.random((6, 7)) * (rng.random((6, 7)) < 0.5)
        a = canonical(sp.csr_array(dense))
        assert frobenius_sq(a) == pytest.approx(frobenius_sq(dense))
        assert l1_norm(a) == pytest.approx(l1_norm(dense))

    @settings(max_examples=50)
    @given(arrays(np.float64, (4, 5), elements=st.floats(-1e3, 1e3)))
    def test_frobenius_is_flattened_l2(self, a):
        flat = [v for row in a.tolist() for v in row]
        assert frobenius_sq(a) == pytest.approx(sum(v * v for v in flat), rel=1e-12, abs=1e-12)
        assert frobenius_sq(a) >= 0


class TestClipFloor:
    def test_negative_set_to_floor(self):
        np.testing.assert_array_equal(clip_floor([[-1, 0.5]], 1e-8), [[1e-8, 0.5]])

    def test_positive_unchanged(self):
        a = np.array([[0.3, 2.0], [1.0, 5.0]])
        np.testing.assert_array_equal(clip_floor(a, 1e-8), a)

    def test_zeros(self):
        np.testing.assert_array_equal(clip_floor([[0, 0]], 1e-8), [[1e-8, 1e-8]])

    def test_floor_must_be_positive(self):
        with pytest.raises(ValidationError):
            clip_floor([[1.0]], 0.0)

    @given(arrays(np.float64, (3, 3), elements=st.floats(-10, 10)), st.floats(1e-12, 1.0))
    def test_min_at_least_floor(self, a, floor):
        assert clip_floor(a, floor).min() >= floor
