"""Benchmark runner: drives a sketching algorithm over a stream against
the exact-window oracle and records error/space/time rows.

CSV schema is fixed: step,algorithm,level_used,sketch_cols,
total_space_cols,corr_err,update_time_us.  Each run appends two summary
rows (step values ``mean`` and ``max``) aggregating the sampled rows;
those are what the plotting frontend consumes.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .oracle import WindowOracle
from .streams import StreamConfig, gen_synthetic, load_stream
from .windows import (
    CodSketch,
    CorrelationSketch,
    ads_init,
    ads_query,
    ads_space_cols,
    ads_update,
    cod_stream,
    hds_init,
    hds_query,
    hds_space_cols,
    hds_update,
)

CSV_COLUMNS = (
    "step",
    "algorithm",
    "level_used",
    "sketch_cols",
    "total_space_cols",
    "corr_err",
    "update_time_us",
)
CSV_HEADER = ",".join(CSV_COLUMNS)

ALGORITHMS = ("hds", "ads", "cod", "naive")


class ConfigError(ValueError):
    """Invalid or conflicting run configuration."""


@dataclass(frozen=True)
class RunConfig:
    algorithm: str
    stream: StreamConfig | None = None
    stream_path: str | None = None
    ell: int | None = None
    eps: float | None = None
    N: int | None = None
    R: float | None = None
    mode: str = "sequence"
    query_every: int | None = None
    seed: int | None = None
    out: str | None = None
    timing: bool = True
    label: str | None = None


@dataclass(frozen=True)
class MetricsRow:
    step: int | str
    algorithm: str
    level_used: float
    sketch_cols: float
    total_space_cols: float
    corr_err: float
    update_time_us: float


def resolve(cfg: RunConfig) -> RunConfig:
    """Fill derived fields and validate the configuration."""
    if cfg.algorithm not in ALGORITHMS:
        raise ConfigError(f"unknown algorithm {cfg.algorithm!r}; pick from {ALGORITHMS}")
    if (cfg.stream is None) == (cfg.stream_path is None):
        raise ConfigError("exactly one of stream/stream_path must be given")
    if (cfg.ell is None) == (cfg.eps is None):
        raise ConfigError("exactly one of ell/eps must be given")
    if cfg.eps is not None:
        if not 0.0 < cfg.eps < 1.0:
            raise ConfigError(f"eps must lie in (0, 1), got {cfg.eps}")
        ell = int(np.ceil(1.0 / cfg.eps))
        eps = cfg.eps
    else:
        if cfg.ell < 1:
            raise ConfigError(f"ell must be >= 1, got {cfg.ell}")
        ell = cfg.ell
        eps = 1.0 / cfg.ell
    stream = cfg.stream
    if stream is not None and cfg.seed is not None and cfg.seed != stream.seed:
        stream = replace(stream, seed=cfg.seed)
    N = cfg.N if cfg.N is not None else (stream.N if stream else None)
    if N is None:
        raise ConfigError("window size N is required for file streams")
    R = cfg.R if cfg.R is not None else (stream.R if stream else None)
    if cfg.algorithm == "hds" and R is None:
        raise ConfigError("hds needs the norm bound R (from the stream config or --R)")
    if cfg.mode not in ("sequence", "time"):
        raise ConfigError(f"unknown mode {cfg.mode!r}")
    return replace(cfg, stream=stream, ell=ell, eps=eps, N=N, R=R)


def _stream_meta(cfg: RunConfig):
    if cfg.stream is not None:
        s = cfg.stream
        return gen_synthetic(s), s.m_x, s.m_y, s.n
    pairs = load_stream(cfg.stream_path)
    if not pairs:
        raise ConfigError(f"stream file {cfg.stream_path} is empty")
    return pairs, len(pairs[0].x), len(pairs[0].y), len(pairs)


def _nonzero_cols(sk: CorrelationSketch) -> int:
    count = 0
    for j in range(sk.cols):
        if np.linalg.norm(sk.A[:, j]) * np.linalg.norm(sk.B[:, j]) > 0.0:
            count += 1
    return count


class _Driver:
    def update(self, col):
        raise NotImplementedError

    def query(self, now) -> CorrelationSketch:
        raise NotImplementedError

    def space_cols(self) -> int:
        raise NotImplementedError


class _HdsDriver(_Driver):
    def __init__(self, m_x, m_y, cfg: RunConfig):
        self.ls = hds_init(m_x, m_y, cfg.N, cfg.ell, cfg.eps, cfg.R, mode=cfg.mode)

    def update(self, col):
        hds_update(self.ls, col)

    def query(self, now):
        return hds_query(self.ls, now)

    def space_cols(self):
        return hds_space_cols(self.ls)


class _AdsDriver(_Driver):
    def __init__(self, m_x, m_y, cfg: RunConfig):
        self.st = ads_init(m_x, m_y, cfg.N, cfg.ell, cfg.eps, mode=cfg.mode)

    def update(self, col):
        ads_update(self.st, col)

    def query(self, now):
        return ads_query(self.st, now)

    def space_cols(self):
        return ads_space_cols(self.st)


class _CodDriver(_Driver):
    def __init__(self, m_x, m_y, cfg: RunConfig):
        self.c = CodSketch(cfg.ell, m_x, m_y)

    def update(self, col):
        self.c.update(col.x, col.y)

    def query(self, now):
        A, B = self.c.sketch()
        return CorrelationSketch(A=A, B=B, level_used=-1, window_id=now)

    def space_cols(self):
        return self.c.space_cols()


class _NaiveDriver(_Driver):
    """Reruns the shrink loop on the oracle's exact window at query time."""

    def __init__(self, m_x, m_y, cfg: RunConfig, oracle: WindowOracle):
        self.ell = cfg.ell
        self.oracle = oracle
        self._last_sketch_cols = 0

    def update(self, col):
        pass  # all work happens at query time

    def query(self, now):
        A, B = cod_stream(self.oracle.buf, self.ell, self.oracle.m_x, self.oracle.m_y)
        self._last_sketch_cols = A.shape[1]
        return CorrelationSketch(A=A, B=B, level_used=-1, window_id=now)

    def space_cols(self):
        return 2 * len(self.oracle.buf) + 2 * self._last_sketch_cols


def _make_driver(cfg, m_x, m_y, oracle) -> _Driver:
    if cfg.algorithm == "hds":
        return _HdsDriver(m_x, m_y, cfg)
    if cfg.algorithm == "ads":
        return _AdsDriver(m_x, m_y, cfg)
    if cfg.algorithm == "cod":
        return _CodDriver(m_x, m_y, cfg)
    return _NaiveDriver(m_x, m_y, cfg, oracle)


def default_query_every(n: int) -> int:
    return 1000 if n >= 5000 else 200


def run(cfg: RunConfig) -> list[MetricsRow]:
    """Execute one benchmark run; returns sampled rows plus the two
    summary rows, writing them as CSV when an output path is set."""
    cfg = resolve(cfg)
    pairs, m_x, m_y, n = _stream_meta(cfg)
    qe = cfg.query_every or default_query_every(n)
    label = cfg.label or cfg.algorithm
    # cod is a whole-stream baseline, so its oracle never expires
    oracle = WindowOracle(m_x, m_y, n + 1 if cfg.algorithm == "cod" else cfg.N)
    driver = _make_driver(cfg, m_x, m_y, oracle)
    rows: list[MetricsRow] = []
    spent = 0.0
    steps = 0
    for col in pairs:
        t0 = time.perf_counter()
        driver.update(col)
        spent += time.perf_counter() - t0
        steps += 1
        oracle.push(col)
        if col.t % qe == 0:
            sk = driver.query(col.t)
            rep = oracle.corr_err(sk.A, sk.B)
            rows.append(
                MetricsRow(
                    step=col.t,
                    algorithm=label,
                    level_used=sk.level_used,
                    sketch_cols=_nonzero_cols(sk),
                    total_space_cols=driver.space_cols(),
                    corr_err=rep.corr_err,
                    update_time_us=(spent / steps * 1e6) if cfg.timing else 0.0,
                )
            )
            spent = 0.0
            steps = 0
    rows.extend(summarize(rows, label))
    if cfg.out:
        write_csv(cfg.out, rows)
    return rows


def summarize(rows: Sequence[MetricsRow], label: str) -> list[MetricsRow]:
    if not rows:
        return []
    fields = ("level_used", "sketch_cols", "total_space_cols", "corr_err", "update_time_us")
    agg = {}
    for reducer, name in ((np.mean, "mean"), (np.max, "max")):
        vals = {f: float(reducer([getattr(r, f) for r in rows])) for f in fields}
        agg[name] = MetricsRow(step=name, algorithm=label, **vals)
    return [agg["mean"], agg["max"]]


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def rows_to_csv(rows: Sequence[MetricsRow]) -> str:
    lines = [CSV_HEADER]
    for r in rows:
        lines.append(",".join(_fmt(getattr(r, c)) for c in CSV_COLUMNS))
    return "\n".join(lines) + "\n"


def write_csv(path, rows: Sequence[MetricsRow]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(rows_to_csv(rows))


def compare(cfgs: Sequence[RunConfig]) -> list[MetricsRow]:
    """Run several configurations over the same stream and merge rows,
    grouped by algorithm label and ordered by step within each group."""
    if not cfgs:
        raise ConfigError("compare needs at least one configuration")
    first = cfgs[0]
    for c in cfgs[1:]:
        if c.stream != first.stream or c.stream_path != first.stream_path:
            raise ConfigError("compare requires identical stream configs across runs")
        if c.seed != first.seed:
            raise ConfigError("compare requires a shared seed")
    resolved = [resolve(c) for c in cfgs]
    labels = []
    seen: dict[str, int] = {}
    for c in resolved:
        base = c.label or c.algorithm
        if sum(1 for r in resolved if (r.label or r.algorithm) == base) > 1:
            base = f"{base}_l{c.ell}"
        if base in seen:
            seen[base] += 1
            base = f"{base}#{seen[base]}"
        else:
            seen[base] = 0
        labels.append(base)
    merged: list[tuple[str, list[MetricsRow]]] = []
    for orig, label in zip(cfgs, labels):
        merged.append((label, run(replace(orig, label=label, out=None))))
    merged.sort(key=lambda kv: kv[0])
    return [row for _, rows in merged for row in rows]
