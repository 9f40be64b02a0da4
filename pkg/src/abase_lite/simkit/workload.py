"""Synthetic workload profiles and their arrival, key and size generators.

Constant and step-burst arrivals are deterministic grids; diurnal arrivals
are an inhomogeneous Poisson process drawn by thinning. Randomness comes
from numpy's PCG64 generator seeded per profile.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtri

from ..hashing import unit_interval
from .engine import US


@dataclass
class Constant:
    rate: float


@dataclass
class Burst:
    """``base_rate`` outside ``[t_start, t_end)``, ``rate`` inside."""

    base_rate: float
    rate: float
    t_start: float
    t_end: float | None = None


@dataclass
class Diurnal:
    base: float
    amplitude: float
    period: float = 86400.0


@dataclass
class UniformKeys:
    count: int


@dataclass
class ZipfKeys:
    s: float
    count: int


@dataclass
class HotKeys:
    """``fraction`` of requests go to ``count`` hot keys, the rest spread uniformly."""

    fraction: float
    count: int = 1
    keyspace: int = 10_000


@dataclass
class FixedSize:
    size: int


@dataclass
class LognormalSize:
    mu: float
    sigma: float


@dataclass
class WorkloadProfile:
    tenant_id: str
    arrival: Constant | Burst | Diurnal
    keys: UniformKeys | ZipfKeys | HotKeys = field(default_factory=lambda: UniformKeys(10_000))
    read_ratio: float = 1.0
    value_size: FixedSize | LognormalSize = field(default_factory=lambda: FixedSize(1024))
    ttl: float | None = None
    timeout: float | None = None
    target_partition: str | None = None
    key_offset: int = 0

    def __post_init__(self):
        if not 0.0 <= self.read_ratio <= 1.0:
            raise ValueError("read_ratio must lie in [0, 1]")
        if isinstance(self.keys, HotKeys) and not 0.0 <= self.keys.fraction <= 1.0:
            raise ValueError("hot-key fraction must lie in [0, 1]")
        for r in _rates(self.arrival):
            if r < 0:
                raise ValueError("arrival rates must be non-negative")


def _rates(a) -> list[float]:
    if isinstance(a, Constant):
        return [a.rate]
    if isinstance(a, Burst):
        return [a.base_rate, a.rate]
    return [a.base - abs(a.amplitude)]


def _grid(t0: float, t1: float, rate: float) -> np.ndarray:
    """Evenly spaced arrivals in [t0, t1) starting at t0, in microseconds."""
    if rate <= 0 or t1 <= t0:
        return np.zeros(0, dtype=np.int64)
    n = math.ceil((t1 - t0) * rate - 1e-9)
    i = np.arange(n, dtype=np.int64)
    start = int(round(t0 * US))
    return start + np.floor(i * (US / rate) + 1e-6).astype(np.int64)


def gen_arrivals(profile: WorkloadProfile, duration: float, seed=0) -> np.ndarray:
    """Sorted arrival times (integer microseconds) in ``[0, duration)``."""
    a = profile.arrival
    if isinstance(a, Constant):
        return _grid(0.0, duration, a.rate)
    if isinstance(a, Burst):
        t_end = duration if a.t_end is None else min(a.t_end, duration)
        t_start = min(max(a.t_start, 0.0), duration)
        parts = [_grid(0.0, t_start, a.base_rate), _grid(t_start, t_end, a.rate),
                 _grid(t_end, duration, a.base_rate)]
        return np.concatenate(parts)
    if isinstance(a, Diurnal):
        rng = _rng(seed)
        peak = a.base + abs(a.amplitude)
        if peak <= 0:
            return np.zeros(0, dtype=np.int64)
        n = rng.poisson(peak * duration)
        t = np.sort(rng.uniform(0.0, duration, n))
        rate = a.base + a.amplitude * np.sin(2 * np.pi * t / a.period)
        keep = rng.uniform(0.0, peak, n) < rate
        return np.floor(t[keep] * US).astype(np.int64)
    raise TypeError(f"unknown arrival process {type(a).__name__}")


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.PCG64(seed))


def zipf_pmf(s: float, count: int) -> np.ndarray:
    w = 1.0 / np.arange(1, count + 1, dtype=float) ** s
    return w / w.sum()


def sample_keys(keys, n: int, seed=0) -> np.ndarray:
    """Key ids in ``[0, count)``; id 0 is the most popular for Zipf and hot-key profiles."""
    rng = _rng(seed)
    if isinstance(keys, UniformKeys):
        return rng.integers(0, keys.count, size=n, dtype=np.int64)
    if isinstance(keys, ZipfKeys):
        cdf = np.cumsum(zipf_pmf(keys.s, keys.count))
        cdf[-1] = 1.0
        return np.searchsorted(cdf, rng.random(n), side="right").astype(np.int64)
    if isinstance(keys, HotKeys):
        hot = rng.random(n) < keys.fraction
        out = keys.count + rng.integers(0, max(1, keys.keyspace - keys.count), size=n, dtype=np.int64)
        out[hot] = rng.integers(0, keys.count, size=int(hot.sum()), dtype=np.int64)
        return out
    raise TypeError(f"unknown key distribution {type(keys).__name__}")


def sample_ops(read_ratio: float, n: int, seed=0) -> np.ndarray:
    """Boolean read flags."""
    if read_ratio >= 1.0:
        return np.ones(n, dtype=bool)
    if read_ratio <= 0.0:
        return np.zeros(n, dtype=bool)
    return _rng(seed).random(n) < read_ratio


def value_size(dist, key: int, seed: int = 0) -> int:
    """Deterministic size of ``key``'s value, so repeated reads agree."""
    if isinstance(dist, FixedSize):
        return int(dist.size)
    if isinstance(dist, LognormalSize):
        u = min(max(unit_interval(key, seed ^ 0x51E), 1e-12), 1 - 1e-12)
        return max(1, int(round(math.exp(dist.mu + dist.sigma * float(ndtri(u))))))
    raise TypeError(f"unknown size distribution {type(dist).__name__}")
