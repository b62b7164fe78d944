"""Synthetic column-pair streams, stream files, and the portable PRNG.

The generator is counter-based splitmix64 so that a (seed, draw-index)
pair always maps to the same output, independent of platform, numpy
version, or how the stream is chunked.  Mixing constants are the
standard ones:

    out(i) = mix(seed + (i + 1) * 0x9E3779B97F4A7C15)
    mix(z): z ^= z >> 30; z *= 0xBF58476D1CE4E5B9;
            z ^= z >> 27; z *= 0x94D049BB133111EB; z ^= z >> 31

Uniform doubles take the top 53 bits: u = (out >> 11) * 2**-53.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator, NamedTuple

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_U64_MASK = (1 << 64) - 1


class ColumnPair(NamedTuple):
    x: np.ndarray
    y: np.ndarray
    t: int


class StreamFormatError(ValueError):
    """A stream file violates the cpsv1 format."""


class SplitMix64:
    """Counter-based splitmix64 stream."""

    def __init__(self, seed: int):
        self.seed = np.uint64(seed & _U64_MASK)
        self.pos = 0

    def next_u64(self, n: int) -> np.ndarray:
        idx = np.arange(self.pos + 1, self.pos + n + 1, dtype=np.uint64)
        self.pos += n
        with np.errstate(over="ignore"):
            z = self.seed + idx * _GOLDEN
            z = (z ^ (z >> np.uint64(30))) * _MIX1
            z = (z ^ (z >> np.uint64(27))) * _MIX2
            return z ^ (z >> np.uint64(31))

    def uniforms(self, n: int) -> np.ndarray:
        return (self.next_u64(n) >> np.uint64(11)) * 2.0**-53

    def poisson(self, lam: float) -> int:
        # Knuth's product-of-uniforms method; fine for small lam
        limit = math.exp(-lam)
        k = 0
        p = 1.0
        while True:
            p *= float(self.uniforms(1)[0])
            if p <= limit:
                return k
            k += 1


@dataclass(frozen=True)
class StreamConfig:
    m_x: int
    m_y: int
    n: int
    N: int
    R: float
    seed: int
    regime_schedule: tuple[tuple[int, float], ...] | None = None
    arrival: str = "unit"  # "unit" | "poisson"
    lam: float = 2.0

    def validate(self) -> None:
        if min(self.m_x, self.m_y, self.n, self.N) < 1:
            raise ValueError("m_x, m_y, n, N must all be positive")
        if self.R < 1.0:
            raise ValueError(f"R must be >= 1, got {self.R}")
        if self.arrival not in ("unit", "poisson"):
            raise ValueError(f"unknown arrival model {self.arrival!r}")
        if self.regime_schedule:
            starts = [s for s, _ in self.regime_schedule]
            if starts != sorted(starts):
                raise ValueError("regime_schedule must be sorted by start step")
            if any(scale <= 0 for _, scale in self.regime_schedule):
                raise ValueError("regime scales must be positive")


def _scale_at(schedule: tuple[tuple[int, float], ...], t: int) -> float:
    scale = 1.0
    for start, s in schedule:
        if t >= start:
            scale = s
        else:
            break
    return scale


def gen_synthetic(cfg: StreamConfig) -> Iterator[ColumnPair]:
    """Yield a deterministic stream of column pairs for ``cfg``.

    Raw entries are uniform(0, 1); each pair is then rescaled so its norm
    product lands in [1, scale_t * R], where scale_t follows the regime
    schedule (default: a single regime at full scale).  Poisson arrivals
    materialize the gaps as explicit zero pairs, one timestamp each.
    """
    cfg.validate()
    rng = SplitMix64(cfg.seed)
    schedule = cfg.regime_schedule or ((1, 1.0),)
    next_arrival = 1
    for t in range(1, cfg.n + 1):
        if cfg.arrival == "poisson" and t < next_arrival:
            yield ColumnPair(np.zeros(cfg.m_x), np.zeros(cfg.m_y), t)
            continue
        if cfg.arrival == "poisson":
            next_arrival = t + 1 + rng.poisson(cfg.lam)
        x = rng.uniforms(cfg.m_x)
        y = rng.uniforms(cfg.m_y)
        u = float(rng.uniforms(1)[0])
        cap = max(1.0, _scale_at(schedule, t) * cfg.R)
        target = 1.0 + (cap - 1.0) * u
        raw = float(np.linalg.norm(x) * np.linalg.norm(y))
        c = math.sqrt(target / raw)
        yield ColumnPair(x * c, y * c, t)


def save_stream(path, pairs: Iterable[ColumnPair], m_x: int, m_y: int, n: int) -> None:
    """Write pairs in the cpsv1 text format (shortest round-trip floats)."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"cpsv1 m_x={m_x} m_y={m_y} n={n}\n")
        for p in pairs:
            xs = ",".join(repr(float(v)) for v in p.x)
            ys = ",".join(repr(float(v)) for v in p.y)
            fh.write(f"t={p.t}|{xs}|{ys}\n")


def load_stream(path) -> list[ColumnPair]:
    """Parse a cpsv1 file, validating the header, dimensions, and that
    timestamps strictly increase."""
    pairs: list[ColumnPair] = []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        parts = header.split()
        if len(parts) != 4 or parts[0] != "cpsv1":
            raise StreamFormatError(f"line 1: bad header {header!r}")
        try:
            m_x = int(parts[1].removeprefix("m_x="))
            m_y = int(parts[2].removeprefix("m_y="))
            n = int(parts[3].removeprefix("n="))
        except ValueError as exc:
            raise StreamFormatError(f"line 1: bad header {header!r}") from exc
        last_t = 0
        for lineno, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            fields = line.split("|")
            if len(fields) != 3 or not fields[0].startswith("t="):
                raise StreamFormatError(f"line {lineno}: malformed row")
            try:
                t = int(fields[0][2:])
                x = np.array([float(v) for v in fields[1].split(",")])
                y = np.array([float(v) for v in fields[2].split(",")])
            except ValueError as exc:
                raise StreamFormatError(f"line {lineno}: malformed row") from exc
            if x.shape != (m_x,) or y.shape != (m_y,):
                raise StreamFormatError(
                    f"line {lineno}: expected {m_x}/{m_y} entries, "
                    f"got {len(x)}/{len(y)}"
                )
            if t <= last_t:
                raise StreamFormatError(
                    f"line {lineno}: timestamp {t} not greater than {last_t}"
                )
            last_t = t
            pairs.append(ColumnPair(x, y, t))
    if len(pairs) != n:
        raise StreamFormatError(f"header declares n={n} but file has {len(pairs)} rows")
    return pairs
