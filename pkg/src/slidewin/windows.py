"""Sliding-window sketch drivers.

Two window algorithms share the dump-snapshot sketch: ``hds`` keeps a
fixed hierarchy of thresholds (one sketch pair per power-of-two level)
and answers queries from the highest level with enough live snapshots;
``ads`` keeps a single pair and retunes its threshold from the observed
snapshot rate.  Both expire residual buffers coarsely by swapping in an
auxiliary sketch every N steps.  A full-stream shrink-loop baseline and
an exact-window rerun of it live here too.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .decomp import cs_shrink
from .sketch import DsCodState, ds_init, ds_update, queue_expire
from .streams import ColumnPair

# A level qualifies once it holds >= factor * ell live snapshots.  The
# factor must stay below 1: per-level queues are capped at ceil(1/eps)
# columns, so a queue at exactly ell may already have dropped in-window
# snapshots, and answering from it loses their mass.
QUERY_LEVEL_FACTOR = 0.5


@dataclass
class CorrelationSketch:
    A: np.ndarray
    B: np.ndarray
    level_used: int
    window_id: int

    @property
    def cols(self) -> int:
        return self.A.shape[1]


@dataclass
class Level:
    main: DsCodState
    aux: DsCodState


@dataclass
class LevelSet:
    levels: list[Level]
    thresholds: list[float]
    N: int
    ell: int
    eps: float
    R: float
    mode: str
    m_x: int
    m_y: int
    cap: int
    debug: bool = False


def _validate_common(m_x, m_y, N, ell, eps):
    if N < 1:
        raise ValueError(f"window size N must be >= 1, got {N}")
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    if ell < 1 or ell > min(m_x, m_y):
        raise ValueError(f"ell must lie in [1, min(m_x, m_y)], got {ell}")


def hds_init(m_x, m_y, N, ell, eps, R, mode="sequence", debug=False) -> LevelSet:
    """Build the threshold hierarchy: eps*N*2^j per level in sequence
    mode, plain powers of two up to eps*N*R in time mode."""
    _validate_common(m_x, m_y, N, ell, eps)
    if mode not in ("sequence", "time"):
        raise ValueError(f"unknown mode {mode!r}")
    if R is None:
        raise ValueError("sequence-mode hierarchies need the norm bound R up front")
    if R < 1.0:
        raise ValueError(f"R must be >= 1, got {R}")
    if mode == "sequence":
        top = math.ceil(math.log2(R)) if R > 1 else 0
        thresholds = [eps * N * 2.0**j for j in range(top + 1)]
    else:
        top = max(0, math.ceil(math.log2(eps * N * R)))
        thresholds = [2.0**i for i in range(top + 1)]
    levels = [
        Level(
            main=ds_init(ell, th, m_x, m_y, debug=debug),
            aux=ds_init(ell, th, m_x, m_y, debug=debug),
        )
        for th in thresholds
    ]
    return LevelSet(
        levels=levels,
        thresholds=thresholds,
        N=N,
        ell=ell,
        eps=eps,
        R=R,
        mode=mode,
        m_x=m_x,
        m_y=m_y,
        cap=math.ceil(1.0 / eps),
        debug=debug,
    )


def hds_update(ls: LevelSet, col: ColumnPair) -> LevelSet:
    for level, th in zip(ls.levels, ls.thresholds):
        queue_expire(level.main, col.t, ls.N, max_len=ls.cap)
        queue_expire(level.aux, col.t, ls.N, max_len=ls.cap)
        ds_update(level.main, col)
        ds_update(level.aux, col)
        if col.t % ls.N == 1:
            level.main = level.aux
            level.aux = ds_init(ls.ell, th, ls.m_x, ls.m_y, debug=ls.debug)
        # keep the per-level cap a step-boundary invariant, not just a
        # pre-update cleanup
        queue_expire(level.main, col.t, ls.N, max_len=ls.cap)
        queue_expire(level.aux, col.t, ls.N, max_len=ls.cap)
    return ls


def _live_snapshots(state: DsCodState, now: int, N: int):
    return [s for s in state.S if s.t + N > now]


def _assemble(state: DsCodState, snaps, ell, m_x, m_y, level, now) -> CorrelationSketch:
    blocks_a = [state.A] + [s.a[:, None] for s in snaps]
    blocks_b = [state.B] + [s.b[:, None] for s in snaps]
    A = np.column_stack(blocks_a) if state.A.size or snaps else np.zeros((m_x, 0))
    B = np.column_stack(blocks_b) if state.B.size or snaps else np.zeros((m_y, 0))
    if A.shape[1] > ell:
        A, B = cs_shrink(A, B, ell)
    return CorrelationSketch(A=A, B=B, level_used=level, window_id=now)


def hds_query(ls: LevelSet, now: int) -> CorrelationSketch:
    """Answer from the highest level holding enough live snapshots; if
    none qualifies, fall back to the fullest level (lowest on ties)."""
    counts = [len(_live_snapshots(lv.main, now, ls.N)) for lv in ls.levels]
    need = max(1, math.ceil(QUERY_LEVEL_FACTOR * ls.ell))
    pick = -1
    for j, c in enumerate(counts):
        if c >= need:
            pick = j
    if pick < 0:
        pick = int(np.argmax(counts))
    level = ls.levels[pick]
    snaps = _live_snapshots(level.main, now, ls.N)
    return _assemble(level.main, snaps, ls.ell, ls.m_x, ls.m_y, pick, now)


def hds_space_cols(ls: LevelSet) -> int:
    return sum(lv.main.space_cols() + lv.aux.space_cols() for lv in ls.levels)


@dataclass
class AdaptiveState:
    ds: DsCodState
    ds_aux: DsCodState
    L: int
    N: int
    ell: int
    eps: float
    mode: str
    m_x: int
    m_y: int
    theta_floor: float
    debug: bool = False


def ads_init(m_x, m_y, N, ell, eps, mode="sequence", debug=False) -> AdaptiveState:
    _validate_common(m_x, m_y, N, ell, eps)
    if mode not in ("sequence", "time"):
        raise ValueError(f"unknown mode {mode!r}")
    theta0 = eps * N if mode == "sequence" else 1.0
    return AdaptiveState(
        ds=ds_init(ell, theta0, m_x, m_y, debug=debug),
        ds_aux=ds_init(ell, theta0, m_x, m_y, debug=debug),
        L=1,
        N=N,
        ell=ell,
        eps=eps,
        mode=mode,
        m_x=m_x,
        m_y=m_y,
        theta_floor=theta0,
        debug=debug,
    )


def ads_update(st: AdaptiveState, col: ColumnPair) -> AdaptiveState:
    """Expire, swap on the window boundary (before updating, unlike the
    hierarchy), feed both sketches, then retune the threshold: double it
    when the queue outgrows L/eps, halve when it falls to (L-1)/eps."""
    queue_expire(st.ds, col.t, st.N)
    queue_expire(st.ds_aux, col.t, st.N)
    if col.t % st.N == 1:
        st.ds = st.ds_aux
        st.ds_aux = ds_init(st.ell, st.ds.theta, st.m_x, st.m_y, debug=st.debug)
    ds_update(st.ds, col)
    ds_update(st.ds_aux, col)
    n_snap = len(st.ds.S)
    if n_snap >= st.L / st.eps:
        st.L += 1
        st.ds.theta *= 2.0
        st.ds_aux.theta *= 2.0
    elif n_snap <= (st.L - 1) / st.eps:
        st.L = max(1, st.L - 1)
        st.ds.theta = max(st.ds.theta / 2.0, st.theta_floor)
        st.ds_aux.theta = max(st.ds_aux.theta / 2.0, st.theta_floor)
    return st


def ads_query(st: AdaptiveState, now: int) -> CorrelationSketch:
    snaps = _live_snapshots(st.ds, now, st.N)
    return _assemble(st.ds, snaps, st.ell, st.m_x, st.m_y, st.L, now)


def ads_space_cols(st: AdaptiveState) -> int:
    return st.ds.space_cols() + st.ds_aux.space_cols()


class CodSketch:
    """Full-stream shrink-loop baseline: buffer up to ell columns, shrink
    to ell/2 whenever the buffer fills."""

    def __init__(self, ell: int, m_x: int = 0, m_y: int = 0):
        if ell < 1:
            raise ValueError(f"ell must be >= 1, got {ell}")
        self.ell = int(ell)
        self.half = max(1, self.ell // 2)
        self.A = np.zeros((m_x, 0))
        self.B = np.zeros((m_y, 0))

    def update(self, x, y) -> None:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if np.linalg.norm(x) * np.linalg.norm(y) == 0.0:
            return
        if self.A.shape[0] == 0:
            self.A = np.zeros((x.shape[0], 0))
            self.B = np.zeros((y.shape[0], 0))
        self.A = np.column_stack([self.A, x])
        self.B = np.column_stack([self.B, y])
        if self.A.shape[1] >= self.ell:
            self.A, self.B = cs_shrink(self.A, self.B, self.half)

    def sketch(self):
        return self.A, self.B

    def space_cols(self) -> int:
        return self.A.shape[1] + self.B.shape[1]


def cod_stream(pairs: Iterable[ColumnPair], ell: int, m_x: int = 0, m_y: int = 0):
    """Run the shrink-loop baseline over a whole stream; returns (A, B)."""
    c = CodSketch(ell, m_x, m_y)
    for p in pairs:
        c.update(p.x, p.y)
    return c.sketch()


def naive_window_cod(window: Sequence[ColumnPair], ell: int, m_x: int = 0, m_y: int = 0):
    """Rerun the shrink loop on the exact window contents (reference
    baseline, needs the oracle buffer)."""
    return cod_stream(window, ell, m_x, m_y)
