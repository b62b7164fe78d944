"""Dense factorization primitives behind every sketch operation.

Columns are the streaming unit throughout: an (m, k) array holds k column
vectors of dimension m.  The routines here are thin, validated wrappers
around LAPACK plus the shrinkage step that truncates a paired product to a
fixed number of columns.  Tolerances are module-level configuration.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

RECON_TOL = 1e-8        # factor reconstruction, max-norm, relative
SYM_TOL = 1e-9          # required symmetry of covariance inputs
PSD_TOL = 1e-9          # how negative a pivot may go before rejection
# Pivots below this fraction of trace are zeroed.  The band must sit well
# above elimination roundoff (~n*eps*trace): dividing by a noise-dominated
# pivot of a rank-deficient Gram matrix poisons every later pivot.
PIVOT_CLAMP_REL = 1e-10
SHRINK_REL_TOL = 1e-7   # shrinkage exactness, relative


class DecompositionError(ValueError):
    """Input violates a factorization precondition (shape, symmetry, PSD)."""


class QrFactors(NamedTuple):
    Q: np.ndarray
    R: np.ndarray


class LdlFactors(NamedTuple):
    L: np.ndarray
    D: np.ndarray  # diagonal stored as a vector, entries >= 0


class SvdFactors(NamedTuple):
    U: np.ndarray
    sigma: np.ndarray
    V: np.ndarray


def _as_matrix(X, name: str = "matrix") -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise DecompositionError(f"{name} must be 2-d, got shape {X.shape}")
    if X.size and not np.all(np.isfinite(X)):
        raise DecompositionError(f"{name} contains non-finite entries")
    return X


def qr_factor(A) -> QrFactors:
    """Thin QR of a tall matrix: A = Q @ R with orthonormal Q columns."""
    A = _as_matrix(A, "A")
    if A.shape[1] > A.shape[0]:
        raise DecompositionError(
            f"qr_factor needs cols <= rows, got {A.shape[1]}x{A.shape[0]}"
        )
    Q, R = np.linalg.qr(A, mode="reduced")
    return QrFactors(Q, R)


def ldl_factor(K) -> LdlFactors:
    """Unit-lower-triangular LDL^T of a symmetric PSD matrix.

    Pivots that fall below ``PIVOT_CLAMP_REL * trace(K)`` are clamped to
    zero and their L column is zeroed; this absorbs the roundoff that
    repeated rank-1 covariance updates accumulate.  Clearly negative
    pivots (beyond ``PSD_TOL``) are rejected.
    """
    K = _as_matrix(K, "K")
    n = K.shape[0]
    if K.shape[1] != n:
        raise DecompositionError(f"K must be square, got {K.shape}")
    if n == 0:
        return LdlFactors(np.zeros((0, 0)), np.zeros(0))
    scale = np.abs(K).max() if K.size else 0.0
    if np.abs(K - K.T).max() > SYM_TOL * (1.0 + scale):
        raise DecompositionError("K is not symmetric within tolerance")
    K = 0.5 * (K + K.T)
    trace = float(np.trace(K))
    clamp = PIVOT_CLAMP_REL * max(trace, 0.0)
    reject_at = -PSD_TOL * (1.0 + abs(trace))
    L = np.eye(n)
    d = np.zeros(n)
    for j in range(n):
        dj = K[j, j] - (L[j, :j] ** 2) @ d[:j]
        if dj < reject_at:
            raise DecompositionError(
                f"pivot {j} is {dj:.3e}; input not PSD within tolerance"
            )
        if dj <= clamp:
            continue  # d[j] stays 0, L column stays e_j
        d[j] = dj
        L[j + 1 :, j] = (K[j + 1 :, j] - L[j + 1 :, :j] @ (L[j, :j] * d[:j])) / dj
    return LdlFactors(L, d)


def product_svd(Rx, Ry) -> SvdFactors:
    """SVD of the small core product Rx @ Ry.T, sigma descending."""
    Rx = _as_matrix(Rx, "Rx")
    Ry = _as_matrix(Ry, "Ry")
    if Rx.shape[1] != Ry.shape[1]:
        raise DecompositionError(
            f"inner dimensions differ: {Rx.shape[1]} vs {Ry.shape[1]}"
        )
    U, s, Vt = np.linalg.svd(Rx @ Ry.T, full_matrices=False)
    return SvdFactors(U, s, Vt.T)


def _paired_svd(A: np.ndarray, B: np.ndarray):
    Qx, Rx = np.linalg.qr(A, mode="reduced")
    Qy, Ry = np.linalg.qr(B, mode="reduced")
    U, s, Vt = np.linalg.svd(Rx @ Ry.T, full_matrices=False)
    return Qx, Qy, U, s, Vt


def cs_shrink(A, B, ell: int):
    """Shrink a paired buffer to ``ell`` columns.

    Factors A and B, subtracts the ell-th singular value of the core
    product from the spectrum, clamps at zero, and rebuilds exactly
    ``ell`` columns per side (trailing ones may be zero).  The spectral
    error introduced equals that ell-th singular value.
    """
    A = _as_matrix(A, "A")
    B = _as_matrix(B, "B")
    if A.shape[1] != B.shape[1]:
        raise DecompositionError("A and B must have the same column count")
    width = A.shape[1]
    ell = int(ell)
    if ell < 1:
        raise DecompositionError("ell must be >= 1")
    if ell > width:
        raise DecompositionError(f"ell={ell} exceeds buffer width {width}")
    if ell > min(A.shape[0], B.shape[0]):
        raise DecompositionError(
            f"ell={ell} exceeds min(m_x, m_y)={min(A.shape[0], B.shape[0])}"
        )
    Qx, Qy, U, s, Vt = _paired_svd(A, B)
    delta = s[ell - 1]
    root = np.sqrt(np.maximum(s[:ell] - delta, 0.0))
    return Qx @ (U[:, :ell] * root), Qy @ (Vt[:ell].T * root)


def aligned_pair(A, B):
    """Rewrite (A, B) as (C, D) with C @ D.T == A @ B.T and columns
    ordered so that ||c_j|| * ||d_j|| is the j-th singular value of the
    product."""
    A = _as_matrix(A, "A")
    B = _as_matrix(B, "B")
    if A.shape[1] != B.shape[1]:
        raise DecompositionError("A and B must have the same column count")
    Qx, Qy, U, s, Vt = _paired_svd(A, B)
    root = np.sqrt(s)
    return Qx @ (U * root), Qy @ (Vt.T * root)
