"""Request Unit accounting.

Billing is integral (rounded up per operation, floor 1); estimates used by
admission stay fractional.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

COLD_START_RU = 1.0
HLEN_RU = 1.0

SERVED_FROM = ("proxy_cache", "node_cache", "disk")


@dataclass(frozen=True)
class RuConfig:
    unit_size: int = 2048
    replica_count: int = 3
    window_k: int = 100

    def __post_init__(self):
        if self.unit_size <= 0:
            raise ValueError("unit_size must be positive")
        if self.window_k < 1:
            raise ValueError("window_k must be >= 1")
        if self.replica_count < 1:
            raise ValueError("replica_count must be >= 1")


@dataclass
class ReadStats:
    """Moving averages over the last ``k`` reads of one tenant.

    Running sums are kept alongside the ring buffers so every update is
    O(1); sizes and hit flags are integers, so the sums stay exact.
    """

    k: int = 100
    reads: deque = field(default_factory=deque)
    hash_lengths: deque = field(default_factory=deque)
    field_sizes: deque = field(default_factory=deque)
    _size_sum: int = 0
    _hit_sum: int = 0

    @property
    def empty(self) -> bool:
        return not self.reads

    @property
    def mean_size(self) -> float:
        return self._size_sum / len(self.reads) if self.reads else 0.0

    @property
    def hit_ratio(self) -> float:
        return self._hit_sum / len(self.reads) if self.reads else 0.0

    @property
    def mean_hash_length(self) -> float | None:
        return sum(self.hash_lengths) / len(self.hash_lengths) if self.hash_lengths else None

    @property
    def mean_field_size(self) -> float:
        return sum(self.field_sizes) / len(self.field_sizes) if self.field_sizes else 0.0


def new_read_stats(cfg: RuConfig) -> ReadStats:
    return ReadStats(k=cfg.window_k)


def units(size: float, cfg: RuConfig) -> int:
    """Rounded-up unit count with the floor of one."""
    return max(1, math.ceil(size / cfg.unit_size))


def ru_write(value_size: int, cfg: RuConfig) -> int:
    if value_size < 0:
        raise ValueError("value_size must be >= 0")
    return cfg.replica_count * units(value_size, cfg)


def estimate_read_ru(stats: ReadStats, cfg: RuConfig) -> float:
    if stats.empty:
        return COLD_START_RU
    return stats.mean_size * (1.0 - stats.hit_ratio) / cfg.unit_size


def settle_read(actual_size: int, served_from: str, cfg: RuConfig) -> int:
    if actual_size < 0:
        raise ValueError("actual_size must be >= 0")
    if served_from not in SERVED_FROM:
        raise ValueError(f"unknown source {served_from!r}")
    if served_from == "proxy_cache":
        return 0
    return units(actual_size, cfg)


def update_read_stats(stats: ReadStats, observed_size: int, hit_flag: bool) -> ReadStats:
    hit = 1 if hit_flag else 0
    if len(stats.reads) == stats.k:
        old_size, old_hit = stats.reads.popleft()
        stats._size_sum -= old_size
        stats._hit_sum -= old_hit
    stats.reads.append((observed_size, hit))
    stats._size_sum += observed_size
    stats._hit_sum += hit
    return stats


def update_hash_stats(stats: ReadStats, length: int, field_size: float | None = None) -> ReadStats:
    """Record an observed hash length (and mean field size) after a scan."""
    stats.hash_lengths.append(length)
    if len(stats.hash_lengths) > stats.k:
        stats.hash_lengths.popleft()
    if field_size is not None:
        stats.field_sizes.append(field_size)
        if len(stats.field_sizes) > stats.k:
            stats.field_sizes.popleft()
    return stats


def ru_complex(kind: str, stats: ReadStats, cfg: RuConfig,
               est_len: float | None = None, field_size: float | None = None) -> float:
    """Estimate for HLen / HGetAll.

    HGetAll is HLen followed by a scan of ``est_len`` fields. ``est_len``
    and ``field_size`` default to the tenant's history.
    """
    if kind == "HLen":
        return HLEN_RU
    if kind != "HGetAll":
        raise ValueError(f"not a complex read: {kind!r}")
    if est_len is None:
        est_len = stats.mean_hash_length
        if est_len is None:
            return COLD_START_RU
    if field_size is None:
        field_size = stats.mean_field_size
    return HLEN_RU + est_len * field_size / cfg.unit_size


def settle_complex(kind: str, scanned_bytes: int, cfg: RuConfig) -> int:
    """Billed RU once the scan size is known; an empty hash bills only HLen."""
    if kind == "HLen" or scanned_bytes <= 0:
        return int(HLEN_RU)
    return int(HLEN_RU) + math.ceil(scanned_bytes / cfg.unit_size)
