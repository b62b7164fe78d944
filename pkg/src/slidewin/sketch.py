"""Threshold-dump correlation sketch state machine.

A sketch buffers incoming column pairs (at most 2*ell at a time), tracks
an upper bound ``psi`` on the top singular value of the buffered product,
and exports any direction whose weight reaches the dump threshold
``theta`` as a timestamped snapshot.  Covariance matrices of the buffers
are maintained incrementally so that the threshold test runs off a cheap
LDL factorization instead of a fresh QR.

States are single-writer: update calls mutate in place and must be
serialized externally; reads of a quiescent state are safe anywhere.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .decomp import DecompositionError, cs_shrink, ldl_factor, product_svd
from .streams import ColumnPair

SIGMA_FLOOR_REL = 1e-10   # never extract/remove below this fraction of theta
COV_REFRESH_EVERY = 64    # dense covariance recompute cadence (quick checks)
PSI_RTOL = 1e-6
PSI_ATOL = 1e-9


@dataclass
class Snapshot:
    a: np.ndarray
    b: np.ndarray
    t: int
    weight: float
    theta: float  # threshold in force when dumped


@dataclass
class DsCodState:
    ell: int
    theta: float
    A: np.ndarray
    B: np.ndarray
    K_A: np.ndarray
    K_B: np.ndarray
    S: deque = field(default_factory=deque)
    psi: float = 0.0
    last_ts: int = 0
    debug: bool = False
    quick_checks: int = 0

    @property
    def cols(self) -> int:
        return self.A.shape[1]

    def space_cols(self) -> int:
        """Live columns held: buffers plus one (a, b) pair per snapshot."""
        return self.A.shape[1] + self.B.shape[1] + 2 * len(self.S)


def ds_init(ell: int, theta: float, m_x: int = 0, m_y: int = 0, debug: bool = False) -> DsCodState:
    if int(ell) < 1:
        raise ValueError(f"ell must be >= 1, got {ell}")
    if not theta > 0:
        raise ValueError(f"theta must be positive, got {theta}")
    return DsCodState(
        ell=int(ell),
        theta=float(theta),
        A=np.zeros((m_x, 0)),
        B=np.zeros((m_y, 0)),
        K_A=np.zeros((0, 0)),
        K_B=np.zeros((0, 0)),
        debug=debug,
    )


def _check_column(state: DsCodState, x: np.ndarray, y: np.ndarray) -> None:
    if x.ndim != 1 or y.ndim != 1:
        raise ValueError("columns must be 1-d vectors")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError("columns must be finite")
    if state.A.shape[0] and x.shape[0] != state.A.shape[0]:
        raise ValueError(f"x has {x.shape[0]} rows, state has {state.A.shape[0]}")
    if state.B.shape[0] and y.shape[0] != state.B.shape[0]:
        raise ValueError(f"y has {y.shape[0]} rows, state has {state.B.shape[0]}")


def _append(state: DsCodState, x: np.ndarray, y: np.ndarray) -> None:
    if state.A.shape[0] == 0:
        state.A = np.zeros((x.shape[0], 0))
    if state.B.shape[0] == 0:
        state.B = np.zeros((y.shape[0], 0))
    k = state.cols
    for M, K_name, v in ((state.A, "K_A", x), (state.B, "K_B", y)):
        K = getattr(state, K_name)
        border = M.T @ v
        K_new = np.empty((k + 1, k + 1))
        K_new[:k, :k] = K
        K_new[:k, k] = border
        K_new[k, :k] = border
        K_new[k, k] = v @ v
        setattr(state, K_name, K_new)
    state.A = np.column_stack([state.A, x])
    state.B = np.column_stack([state.B, y])


def _norm_prod(A: np.ndarray, B: np.ndarray, j: int) -> float:
    return float(np.linalg.norm(A[:, j]) * np.linalg.norm(B[:, j]))


def _case_full(state: DsCodState, x, y, now: int) -> int:
    """Buffer is full: shrink to ell columns, then dump leading aligned
    columns that reach the threshold.  Returns the number of dumps."""
    A2, B2 = cs_shrink(
        np.column_stack([state.A, x]), np.column_stack([state.B, y]), state.ell
    )
    d = 0
    while d < state.ell:
        w = _norm_prod(A2, B2, d)
        if w < state.theta:
            break
        state.S.append(Snapshot(A2[:, d].copy(), B2[:, d].copy(), now, w, state.theta))
        d += 1
    state.A = A2[:, d:].copy()
    state.B = B2[:, d:].copy()
    state.K_A = state.A.T @ state.A
    state.K_B = state.B.T @ state.B
    state.psi = _norm_prod(state.A, state.B, 0) if state.cols else 0.0
    return d


def extract_snapshot(A, B, R_x, R_y, U, sigma, V, j: int):
    """Column j of the aligned pair without materializing it:
    a = A @ R_y^T v_j / sqrt(sigma_j), b = B @ R_x^T u_j / sqrt(sigma_j)."""
    s = float(sigma[j])
    if s <= 0:
        raise ValueError(f"sigma[{j}]={s} must be positive")
    root = np.sqrt(s)
    a = (A @ (R_y.T @ V[:, j])) / root
    b = (B @ (R_x.T @ U[:, j])) / root
    return a, b


def remove_component(state: DsCodState, R_x, R_y, U, sigma, V, j: int) -> DsCodState:
    """Subtract the rank-1 component sigma_j (Q_x u_j)(Q_y v_j)^T from the
    buffered product, updating the covariances in O(k^2) via the factored
    form instead of recomputing A^T A."""
    s = float(sigma[j])
    if s <= SIGMA_FLOOR_REL * state.theta:
        raise ValueError(f"sigma[{j}]={s} below removal floor")
    ry_v = R_y.T @ V[:, j]
    rx_u = R_x.T @ U[:, j]
    state.A = state.A - np.outer(state.A @ ry_v, rx_u) / s
    state.B = state.B - np.outer(state.B @ rx_u, ry_v) / s
    # K_A <- (I - P_A^T) K_A (I - P_A) with P_A = ry_v rx_u^T / s,
    # evaluated as M - P_A^T M where M = K_A - (K_A ry_v) rx_u^T / s
    M = state.K_A - np.outer(state.K_A @ ry_v, rx_u) / s
    K_A = M - np.outer(rx_u, ry_v @ M) / s
    state.K_A = 0.5 * (K_A + K_A.T)
    M = state.K_B - np.outer(state.K_B @ rx_u, ry_v) / s
    K_B = M - np.outer(ry_v, rx_u @ M) / s
    state.K_B = 0.5 * (K_B + K_B.T)
    return state


def _refresh_covariances(state: DsCodState) -> None:
    state.K_A = state.A.T @ state.A
    state.K_B = state.B.T @ state.B


def quick_check(state: DsCodState, now: int) -> int:
    """Threshold test without a QR pass.

    Rebuilds triangular factors from the LDL of the covariances, inspects
    the singular values of the small core product in descending order, and
    dumps every leading component at or above theta.  ``psi`` is reset to
    the first value left behind.  Returns the number of dumps.
    """
    if state.cols == 0:
        state.psi = 0.0
        return 0
    state.quick_checks += 1
    if state.quick_checks % COV_REFRESH_EVERY == 0:
        _refresh_covariances(state)
    try:
        L_A, D_A = ldl_factor(state.K_A)
        L_B, D_B = ldl_factor(state.K_B)
    except DecompositionError:
        # covariance drifted off PSD; rebuild densely and retry once
        _refresh_covariances(state)
        try:
            L_A, D_A = ldl_factor(state.K_A)
            L_B, D_B = ldl_factor(state.K_B)
        except DecompositionError as exc:
            raise RuntimeError(
                f"covariance factorization failed even after dense rebuild "
                f"(cols={state.cols}, theta={state.theta}): {exc}"
            ) from exc
    R_x = np.sqrt(D_A)[:, None] * L_A.T
    R_y = np.sqrt(D_B)[:, None] * L_B.T
    U, sigma, V = product_svd(R_x, R_y)
    floor = SIGMA_FLOOR_REL * state.theta
    limit = min(state.ell, len(sigma))
    j = 0
    while j < limit:
        s = float(sigma[j])
        if s < state.theta or s <= floor:
            break
        a, b = extract_snapshot(state.A, state.B, R_x, R_y, U, sigma, V, j)
        weight = float(np.linalg.norm(a) * np.linalg.norm(b))
        state.S.append(Snapshot(a, b, now, weight, state.theta))
        remove_component(state, R_x, R_y, U, sigma, V, j)
        j += 1
    if j < limit:
        state.psi = float(sigma[j])
    elif limit > 0:
        state.psi = float(sigma[limit - 1])
    else:
        state.psi = 0.0
    return j


def ds_update(state: DsCodState, col: ColumnPair) -> DsCodState:
    """Feed one column pair.

    Zero pairs (time-gap fillers) only advance the clock.  Otherwise the
    pair is buffered; a full buffer triggers a shrink pass, and whenever
    psi reaches theta a quick check runs and dumps what qualifies.
    """
    x = np.asarray(col.x, dtype=float)
    y = np.asarray(col.y, dtype=float)
    _check_column(state, x, y)
    if col.t <= state.last_ts:
        raise ValueError(f"timestamp {col.t} not greater than {state.last_ts}")
    state.last_ts = col.t
    w = float(np.linalg.norm(x) * np.linalg.norm(y))
    if w == 0.0:
        return state
    state.psi += w
    if state.cols + 1 >= 2 * state.ell:
        dumped = _case_full(state, x, y, col.t)
    else:
        _append(state, x, y)
        dumped = quick_check(state, col.t) if state.psi >= state.theta else 0
    if state.debug:
        _debug_checks(state, dumped)
    return state


def queue_expire(state: DsCodState, now: int, N: int, max_len: int | None = None) -> DsCodState:
    """Drop snapshots that left the window (head.t + N <= now) and, if a
    cap is given, oldest ones beyond it."""
    S = state.S
    while S and S[0].t + N <= now:
        S.popleft()
    if max_len is not None:
        while len(S) > max_len:
            S.popleft()
    return state


def residual_top_sv(state: DsCodState) -> float:
    """sigma_1 of the buffered product, computed densely (test/debug aid)."""
    if state.cols == 0:
        return 0.0
    sig = np.linalg.svd(state.A @ state.B.T, compute_uv=False)
    return float(sig[0]) if len(sig) else 0.0


def _debug_checks(state: DsCodState, dumped: int) -> None:
    top = residual_top_sv(state)
    if top > state.psi * (1.0 + PSI_RTOL) + PSI_ATOL:
        raise AssertionError(
            f"psi bound violated: sigma_1={top} > psi={state.psi} at t={state.last_ts}"
        )
    if dumped and top >= state.theta * (1.0 + PSI_RTOL):
        raise AssertionError(
            f"dump incomplete: sigma_1={top} >= theta={state.theta} at t={state.last_ts}"
        )
