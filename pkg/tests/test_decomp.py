import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from slidewin.decomp import (
    DecompositionError,
    aligned_pair,
    cs_shrink,
    ldl_factor,
    product_svd,
    qr_factor,
)


def spectral(M):
    # independent oracle: full SVD of the dense matrix
    if M.size == 0:
        return 0.0
    return float(np.linalg.svd(M, compute_uv=False)[0])


class TestQrFactor:
    def test_identity(self):
        Q, R = qr_factor(np.eye(2))
        assert np.allclose(np.abs(Q), np.eye(2))
        assert np.allclose(Q @ R, np.eye(2))

    def test_zero(self):
        Q, R = qr_factor(np.zeros((3, 2)))
        assert np.allclose(R, 0)
        assert np.allclose(Q.T @ Q, np.eye(2), atol=1e-12)

    def test_random_reconstruction(self):
        rng = np.random.default_rng(1)
        A = rng.standard_normal((8, 3))
        Q, R = qr_factor(A)
        assert np.abs(Q @ R - A).max() <= 1e-8
        assert np.abs(Q.T @ Q - np.eye(3)).max() <= 1e-8
        assert np.allclose(np.tril(R, -1), 0)

    def test_wide_rejected(self):
        with pytest.raises(DecompositionError):
            qr_factor(np.ones((2, 4)))


class TestLdlFactor:
    def test_identity(self):
        L, D = ldl_factor(np.eye(2))
        assert np.allclose(L, np.eye(2))
        assert np.allclose(D, [1.0, 1.0])

    def test_rank_one_hand_elimination(self):
        # [[4,2],[2,1]]: d1=4, l21=0.5, d2 = 1 - 0.25*4 = 0
        K = np.array([[4.0, 2.0], [2.0, 1.0]])
        L, D = ldl_factor(K)
        assert np.allclose(L, [[1.0, 0.0], [0.5, 1.0]])
        assert np.allclose(D, [4.0, 0.0])
        assert np.abs(L @ np.diag(D) @ L.T - K).max() <= 1e-8 * (1 + np.abs(K).max())

    def test_gram_reconstruction(self):
        rng = np.random.default_rng(2)
        A = rng.standard_normal((6, 4))
        K = A.T @ A
        L, D = ldl_factor(K)
        assert np.all(D >= 0)
        assert np.allclose(np.diag(L), 1.0)
        assert np.abs(L @ np.diag(D) @ L.T - K).max() <= 1e-8 * (1 + np.abs(K).max())

    def test_asymmetric_rejected(self):
        with pytest.raises(DecompositionError):
            ldl_factor(np.array([[1.0, 0.5], [0.2, 1.0]]))

    def test_indefinite_rejected(self):
        with pytest.raises(DecompositionError):
            ldl_factor(np.array([[1.0, 0.0], [0.0, -1.0]]))

    def test_near_singular_clamped(self):
        v = np.array([[1.0], [2.0], [3.0]])
        K = v @ v.T  # rank 1, two pivots collapse
        L, D = ldl_factor(K)
        assert np.count_nonzero(D) == 1
        assert np.abs(L @ np.diag(D) @ L.T - K).max() <= 1e-8 * (1 + np.abs(K).max())


class TestProductSvd:
    def test_identity(self):
        U, s, V = product_svd(np.eye(2), np.eye(2))
        assert np.allclose(s, [1.0, 1.0])

    def test_diagonal_hand_case(self):
        D = np.diag([2.0, 1.0])
        U, s, V = product_svd(D, D)
        assert np.allclose(s, [4.0, 1.0])
        assert np.allclose(U, np.eye(2))
        assert np.allclose(V, np.eye(2))

    def test_against_dense_svd(self):
        rng = np.random.default_rng(3)
        Rx = rng.standard_normal((4, 4))
        Ry = rng.standard_normal((4, 4))
        U, s, V = product_svd(Rx, Ry)
        expect = np.linalg.svd(Rx @ Ry.T, compute_uv=False)
        assert np.allclose(s, expect)
        assert np.abs(U @ np.diag(s) @ V.T - Rx @ Ry.T).max() <= 1e-8 * (1 + s[0])

    def test_mismatch_rejected(self):
        with pytest.raises(DecompositionError):
            product_svd(np.eye(3), np.eye(2))


class TestCsShrink:
    def test_zero_case(self):
        A2, B2 = cs_shrink(np.zeros((2, 2)), np.zeros((2, 2)), 1)
        assert A2.shape == (2, 1) and B2.shape == (2, 1)
        assert np.allclose(A2, 0) and np.allclose(B2, 0)

    def test_diagonal_hand_case(self):
        # sigma = (4, 1), delta = 1, shrunk spectrum (3, 0)
        M = np.array([[2.0, 0.0], [0.0, 1.0]])
        A2, B2 = cs_shrink(M, M, 2)
        assert np.allclose(A2 @ B2.T, np.diag([3.0, 0.0]), atol=1e-10)
        assert abs(spectral(M @ M.T - A2 @ B2.T) - 1.0) <= 1e-7

    def test_random_error_equals_sigma_ell(self):
        rng = np.random.default_rng(4)
        A = rng.standard_normal((8, 6))
        B = rng.standard_normal((5, 6))
        A2, B2 = cs_shrink(A, B, 3)
        assert A2.shape == (8, 3) and B2.shape == (5, 3)
        nz = [j for j in range(3) if np.linalg.norm(A2[:, j]) > 0]
        assert len(nz) <= 2
        sig = np.linalg.svd(A @ B.T, compute_uv=False)
        err = spectral(A @ B.T - A2 @ B2.T)
        assert abs(err - sig[2]) <= 1e-7 * (1 + sig[0])

    def test_ell_too_large_rejected(self):
        with pytest.raises(DecompositionError):
            cs_shrink(np.ones((4, 2)), np.ones((4, 2)), 3)
        with pytest.raises(DecompositionError):
            # ell exceeds min(m_x, m_y)
            cs_shrink(np.ones((2, 4)), np.ones((5, 4)), 3)


class TestAlignedPair:
    def test_identity(self):
        C, D = aligned_pair(np.eye(2), np.eye(2))
        assert np.allclose(C @ D.T, np.eye(2))
        for j in range(2):
            assert abs(np.linalg.norm(C[:, j]) * np.linalg.norm(D[:, j]) - 1.0) <= 1e-9

    def test_diagonal_hand_case(self):
        M = np.array([[2.0, 0.0], [0.0, 1.0]])
        C, D = aligned_pair(M, M)
        w = np.linalg.norm(C[:, 0]) * np.linalg.norm(D[:, 0])
        assert abs(w - 4.0) <= 1e-9

    def test_random_product_preserved(self):
        rng = np.random.default_rng(5)
        A = rng.standard_normal((6, 4))
        B = rng.standard_normal((6, 4))
        C, D = aligned_pair(A, B)
        P = A @ B.T
        assert spectral(P - C @ D.T) <= 1e-8 * (1 + spectral(P))
        sig = np.linalg.svd(P, compute_uv=False)
        prods = [np.linalg.norm(C[:, j]) * np.linalg.norm(D[:, j]) for j in range(C.shape[1])]
        assert np.allclose(prods, sig[: len(prods)], rtol=1e-8, atol=1e-10)


@settings(max_examples=40, deadline=None)
@given(
    seed=st.integers(0, 10_000),
    mx=st.integers(3, 16),
    my=st.integers(3, 16),
    width=st.integers(3, 12),
)
def test_shrink_exactness_property(seed, mx, my, width):
    rng = np.random.default_rng(seed)
    ell = int(rng.integers(1, min(mx, my, width) + 1))
    A = rng.standard_normal((mx, width))
    B = rng.standard_normal((my, width))
    A2, B2 = cs_shrink(A, B, ell)
    sig = np.linalg.svd(A @ B.T, compute_uv=False)
    sig_ell = sig[ell - 1] if ell - 1 < len(sig) else 0.0
    err = spectral(A @ B.T - A2 @ B2.T)
    assert abs(err - sig_ell) <= 1e-7 * (1 + sig[0])
