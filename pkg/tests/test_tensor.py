import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tnsim.tensor import TensorError, as_tensor, contract, qr_orthonormalize, svd_truncate


def crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def matmul_loops(a, b):
    n, k = a.shape
    m = b.shape[1]
    out = np.zeros((n, m), dtype=complex)
    for i in range(n):
        for j in range(m):
            s = 0j
            for q in range(k):
                s += a[i, q] * b[q, j]
            out[i, j] = s
    return out


class TestContract:
    def test_identity_contraction(self):
        v = np.array([1.0 + 2j, -3.0])
        np.testing.assert_allclose(contract(np.eye(2), [1], v, [0]), v)

    def test_dot_product(self):
        v = np.array([3.0, 4.0])
        assert contract(v, [0], v, [0]).shape == ()
        assert contract(v, [0], v, [0]) == pytest.approx(25.0)

    def test_matches_loop_matmul(self):
        rng = np.random.default_rng(0)
        a, b = crandn(rng, 4, 5), crandn(rng, 5, 6)
        assert np.max(np.abs(contract(a, [1], b, [0]) - matmul_loops(a, b))) <= 1e-12

    def test_free_axis_order(self):
        rng = np.random.default_rng(1)
        a, b = crandn(rng, 2, 3, 4), crandn(rng, 5, 3)
        out = contract(a, [1], b, [1])
        assert out.shape == (2, 4, 5)
        np.testing.assert_allclose(out, np.einsum("ijk,lj->ikl", a, b), atol=1e-12)

    def test_extent_mismatch(self):
        with pytest.raises(TensorError, match="extent mismatch"):
            contract(np.ones((2, 3)), [1], np.ones((4,)), [0])

    def test_axis_out_of_range(self):
        with pytest.raises(TensorError, match="out of range"):
            contract(np.ones((2, 3)), [2], np.ones((3,)), [0])

    def test_duplicate_axes(self):
        with pytest.raises(TensorError, match="duplicate"):
            contract(np.ones((2, 2)), [0, 0], np.ones((2, 2)), [0, 1])

    @settings(max_examples=25, deadline=None)
    @given(st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False),
           st.integers(0, 2**31 - 1))
    def test_bilinear(self, alpha, seed):
        rng = np.random.default_rng(seed)
        a, b = crandn(rng, 3, 4), crandn(rng, 4, 2)
        lhs = contract(alpha * a, [1], b, [0])
        rhs = alpha * contract(a, [1], b, [0])
        assert np.max(np.abs(lhs - rhs)) <= 1e-12 * max(1.0, np.max(np.abs(rhs)))


def test_as_tensor_rejects_empty_extent():
    with pytest.raises(TensorError):
        as_tensor(np.zeros((2, 0)))
    assert as_tensor([[1, 2]]).dtype == np.complex128


class TestSvdTruncate:
    def test_identity_half_discarded(self):
        _, s, _, rep = svd_truncate(np.eye(2), 1)
        assert rep.kept == 1
        assert rep.discarded_weight == pytest.approx(0.5)
        assert s.shape == (1,)

    def test_rank_one_nothing_discarded(self):
        m = np.outer([1.0, 2.0, 3.0], [1.0, -1.0])
        _, _, _, rep = svd_truncate(m, 1)
        assert rep.discarded_weight == pytest.approx(0.0, abs=1e-15)

    def test_reconstruction(self):
        rng = np.random.default_rng(2)
        m = crandn(rng, 6, 4)
        u, s, v, rep = svd_truncate(m, 4, 0.0)
        assert np.max(np.abs(u @ np.diag(s) @ v - m)) <= 1e-12
        np.testing.assert_allclose(u.conj().T @ u, np.eye(4), atol=1e-12)
        np.testing.assert_allclose(v @ v.conj().T, np.eye(4), atol=1e-12)
        assert rep.kept == 4 and rep.discarded_weight == 0.0

    def test_cutoff_relative_to_largest(self):
        m = np.diag([1.0, 1e-3, 1e-8])
        _, s, _, rep = svd_truncate(m, 3, cutoff=1e-6)
        assert rep.kept == 2
        assert rep.discarded_weight == pytest.approx(1e-16 / (1 + 1e-6 + 1e-16), rel=1e-6)
        np.testing.assert_allclose(rep.singular_values, [1.0, 1e-3, 1e-8])

    def test_zero_matrix_keeps_one(self):
        u, s, v, rep = svd_truncate(np.zeros((3, 2)), 2)
        assert rep.kept == 1 and s[0] == 0 and rep.discarded_weight == 0.0

    def test_errors(self):
        with pytest.raises(TensorError):
            svd_truncate(np.ones((2, 2, 2)), 1)
        with pytest.raises(TensorError):
            svd_truncate(np.ones((2, 2)), 0)
        with pytest.raises(TensorError, match="non-finite"):
            svd_truncate(np.array([[np.nan, 1.0], [0.0, 1.0]]), 1)

    def test_real_input_stays_real(self):
        u, s, v, _ = svd_truncate(np.eye(3), 3)
        assert u.dtype == np.float64 and v.dtype == np.float64

    @settings(max_examples=30, deadline=None)
    @given(st.integers(1, 7), st.integers(1, 7), st.integers(1, 8), st.integers(0, 2**31 - 1))
    def test_spectrum_properties(self, rows, cols, keep, seed):
        rng = np.random.default_rng(seed)
        m = crandn(rng, rows, cols)
        u, s, v, rep = svd_truncate(m, keep)
        sv = rep.singular_values
        assert np.all(np.diff(sv) <= 0) and np.all(sv >= 0)
        assert np.sum(sv**2) == pytest.approx(np.linalg.norm(m) ** 2, rel=1e-10)
        assert rep.kept == min(keep, rows, cols)
        assert 0.0 <= rep.discarded_weight <= 1.0
        err = np.linalg.norm(u @ np.diag(s) @ v - m) ** 2 / np.linalg.norm(m) ** 2
        assert err == pytest.approx(rep.discarded_weight, abs=1e-10)
        if keep >= min(rows, cols):
            assert np.max(np.abs(u @ np.diag(s) @ v - m)) <= 1e-12 * max(1.0, np.max(np.abs(m)))


class TestQr:
    def test_orthonormal_input(self):
        rng = np.random.default_rng(3)
        q0, _ = np.linalg.qr(crandn(rng, 5, 3))
        q, r = qr_orthonormalize(q0, "left")
        assert np.allclose(np.abs(np.diag(r)), 1.0)
        assert np.allclose(r, np.diag(np.diag(r)), atol=1e-12)
        np.testing.assert_allclose(np.abs(q), np.abs(q0), atol=1e-12)

    def test_zero_column(self):
        m = np.array([[1.0, 0.0], [1.0, 0.0], [0.0, 0.0]])
        q, r = qr_orthonormalize(m, "left")
        np.testing.assert_allclose(r[1], 0.0, atol=1e-15)
        np.testing.assert_allclose(q @ r, m, atol=1e-14)

    def test_subnormal_diagonal(self):
        m = np.array([[1e-320 + 1e-320j, 1.0], [0.0, 2.0j]])
        q, r = qr_orthonormalize(m, "left")
        assert np.all(np.isfinite(q)) and np.all(np.isfinite(r))
        np.testing.assert_allclose(q @ r, m, atol=1e-14)

    @pytest.mark.parametrize("side", ["left", "right"])
    def test_random(self, side):
        rng = np.random.default_rng(4)
        m = crandn(rng, 5, 3) if side == "left" else crandn(rng, 3, 5)
        q, r = qr_orthonormalize(m, side)
        if side == "left":
            np.testing.assert_allclose(q.conj().T @ q, np.eye(3), atol=1e-12)
            np.testing.assert_allclose(q @ r, m, atol=1e-12)
            d = np.diag(r)
        else:
            np.testing.assert_allclose(q @ q.conj().T, np.eye(3), atol=1e-12)
            np.testing.assert_allclose(r @ q, m, atol=1e-12)
            d = np.diag(r)
        assert np.all(np.abs(d.imag) < 1e-12) and np.all(d.real >= 0)

    def test_errors(self):
        with pytest.raises(TensorError):
            qr_orthonormalize(np.array([[np.inf]]))
        with pytest.raises(TensorError):
            qr_orthonormalize(np.ones((2, 2)), "up")
