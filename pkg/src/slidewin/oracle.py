"""Exact sliding-window ground truth and error metrics.

The oracle keeps the raw column pairs of the current window and always
recomputes the window product from scratch, so reported errors never
inherit incremental drift from the thing being measured.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .streams import ColumnPair

POWER_MAX_ITERS = 1000
POWER_RTOL = 1e-9
_POWER_SEED = 0x5EED


@dataclass(frozen=True)
class ErrorReport:
    corr_err: float
    spectral_err: float
    fro_x: float
    fro_y: float
    window_id: int


def spectral_norm(D, max_iters: int = POWER_MAX_ITERS, rtol: float = POWER_RTOL) -> float:
    """Top singular value of a dense matrix by power iteration on D^T D.

    Deterministic: the start vector comes from a fixed seed.
    """
    D = np.asarray(D, dtype=float)
    if D.size == 0 or not D.any():
        return 0.0
    rng = np.random.default_rng(_POWER_SEED)
    v = rng.standard_normal(D.shape[1])
    v /= np.linalg.norm(v)
    sigma = 0.0
    for _ in range(max_iters):
        w = D @ v
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        prev, sigma = sigma, nw
        if abs(sigma - prev) <= rtol * sigma:
            break
        v = D.T @ w
        v /= np.linalg.norm(v)
    return float(sigma)


class WindowOracle:
    """Ring buffer of the last N column pairs with exact window products."""

    def __init__(self, m_x: int, m_y: int, N: int):
        self.m_x = m_x
        self.m_y = m_y
        self.N = N
        self.buf: deque[ColumnPair] = deque()
        self._sq_x = 0.0
        self._sq_y = 0.0
        self.last_ts = 0

    def push(self, col: ColumnPair) -> None:
        if col.t <= self.last_ts:
            raise ValueError(f"timestamp {col.t} not greater than {self.last_ts}")
        self.last_ts = col.t
        while self.buf and self.buf[0].t + self.N <= col.t:
            old = self.buf.popleft()
            self._sq_x -= float(old.x @ old.x)
            self._sq_y -= float(old.y @ old.y)
        self.buf.append(col)
        self._sq_x += float(col.x @ col.x)
        self._sq_y += float(col.y @ col.y)

    @property
    def fro_x(self) -> float:
        return float(np.sqrt(max(self._sq_x, 0.0)))

    @property
    def fro_y(self) -> float:
        return float(np.sqrt(max(self._sq_y, 0.0)))

    def window_matrices(self):
        if not self.buf:
            return np.zeros((self.m_x, 0)), np.zeros((self.m_y, 0))
        X = np.column_stack([p.x for p in self.buf])
        Y = np.column_stack([p.y for p in self.buf])
        return X, Y

    def exact_product(self) -> np.ndarray:
        X, Y = self.window_matrices()
        return X @ Y.T

    def corr_err(self, A, B) -> ErrorReport:
        A = np.asarray(A, dtype=float)
        B = np.asarray(B, dtype=float)
        if A.shape[0] != self.m_x or B.shape[0] != self.m_y or A.shape[1] != B.shape[1]:
            raise ValueError(
                f"sketch shape {A.shape}/{B.shape} does not match window "
                f"{self.m_x}x{self.m_y}"
            )
        P = self.exact_product()
        err = spectral_norm(P - A @ B.T)
        den = self.fro_x * self.fro_y
        if den > 0.0:
            ce = err / den
        else:
            ce = 0.0 if err == 0.0 else float("inf")
        return ErrorReport(
            corr_err=float(ce),
            spectral_err=float(err),
            fro_x=self.fro_x,
            fro_y=self.fro_y,
            window_id=self.last_ts,
        )
