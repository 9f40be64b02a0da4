"""Node-side size-aware LRU, proxy-side active-update LRU, and fan-out routing."""

from __future__ import annotations

import bisect
import math
from collections import OrderedDict
from dataclasses import dataclass, field

import numpy as np

from .hashing import hash64, hash64_array

SIZE_CLASS_BOUNDS = (256, 4096, 65536)
HIT_HALF_LIFE = 60.0
MIN_CLASS_SHARE = 0.05


def size_class_index(size: int) -> int:
    return bisect.bisect_left(SIZE_CLASS_BOUNDS, size)


class LruCache:
    """Plain byte-capacity LRU; the baseline the size-aware cache is compared with."""

    def __init__(self, capacity: int):
        self.capacity = capacity
        self.entries: OrderedDict = OrderedDict()
        self.used = 0
        self.hits = self.misses = self.evictions = 0

    def __contains__(self, key):
        return key in self.entries

    def __len__(self):
        return len(self.entries)

    def get(self, key, now: float = 0.0):
        size = self.entries.get(key)
        if size is None:
            self.misses += 1
            return None
        self.entries.move_to_end(key)
        self.hits += 1
        return size

    def put(self, key, size: int, now: float = 0.0) -> list:
        if size > self.capacity:
            return []
        if key in self.entries:
            self.used -= self.entries.pop(key)
        evicted = []
        while self.used + size > self.capacity:
            k, s = self.entries.popitem(last=False)
            self.used -= s
            evicted.append(k)
        self.entries[key] = size
        self.used += size
        self.evictions += len(evicted)
        return evicted

    def invalidate(self, key) -> None:
        size = self.entries.pop(key, None)
        if size is not None:
            self.used -= size


@dataclass
class _SizeClass:
    entries: OrderedDict = field(default_factory=OrderedDict)
    used: int = 0
    hit_score: float = 0.0
    stamp: float = 0.0


class SaLruCache:
    """Size-class segmented LRU with hit-driven byte budgets.

    Each size class (<=256 B, <=4 KB, <=64 KB, larger) keeps its own LRU
    list. A class's byte budget is proportional to its share of recent hits
    (exponentially decayed, floored at ``MIN_CLASS_SHARE``), so a class whose
    bytes earn few hits shrinks. Eviction drains over-budget classes first,
    largest class first; only when none is over budget does the incoming
    class give up its own tail.
    """

    def __init__(self, capacity: int, half_life: float = HIT_HALF_LIFE):
        self.capacity = capacity
        self.half_life = half_life
        self.classes = [_SizeClass() for _ in range(len(SIZE_CLASS_BOUNDS) + 1)]
        self.index: dict = {}
        self.used = 0
        self.hits = self.misses = self.evictions = 0

    def __contains__(self, key):
        return key in self.index

    def __len__(self):
        return len(self.index)

    def _decay(self, c: _SizeClass, now: float) -> None:
        if self.half_life and now > c.stamp:
            c.hit_score *= 0.5 ** ((now - c.stamp) / self.half_life)
            c.stamp = now

    def budgets(self, now: float = 0.0) -> list[float]:
        for c in self.classes:
            self._decay(c, now)
        total = sum(c.hit_score for c in self.classes)
        n = len(self.classes)
        if total <= 0:
            shares = [1.0 / n] * n
        else:
            raw = [max(MIN_CLASS_SHARE, c.hit_score / total) for c in self.classes]
            s = sum(raw)
            shares = [r / s for r in raw]
        return [self.capacity * sh for sh in shares]

    def get(self, key, now: float = 0.0):
        ci = self.index.get(key)
        if ci is None:
            self.misses += 1
            return None
        c = self.classes[ci]
        c.entries.move_to_end(key)
        self._decay(c, now)
        c.hit_score += 1.0
        self.hits += 1
        return c.entries[key]

    def _victim_class(self, incoming: int, now: float) -> int:
        budgets = self.budgets(now)
        for ci in range(len(self.classes) - 1, -1, -1):
            c = self.classes[ci]
            if c.entries and c.used > budgets[ci]:
                return ci
        if self.classes[incoming].entries:
            return incoming
        # fall back to the class earning the fewest hits per resident byte
        best, best_density = None, math.inf
        for ci, c in enumerate(self.classes):
            if c.entries:
                density = c.hit_score / c.used
                if density < best_density:
                    best, best_density = ci, density
        return best

    def put(self, key, size: int, now: float = 0.0) -> list | None:
        """Insert ``key``; returns evicted keys, or None if ``size`` exceeds capacity."""
        if size > self.capacity:
            return None
        self.invalidate(key)
        ci = size_class_index(size)
        evicted = []
        while self.used + size > self.capacity:
            vi = self._victim_class(ci, now)
            victim = self.classes[vi]
            k, s = victim.entries.popitem(last=False)
            victim.used -= s
            self.used -= s
            del self.index[k]
            evicted.append(k)
        c = self.classes[ci]
        c.entries[key] = size
        c.used += size
        self.used += size
        self.index[key] = ci
        self.evictions += len(evicted)
        return evicted

    def invalidate(self, key) -> None:
        ci = self.index.pop(key, None)
        if ci is not None:
            c = self.classes[ci]
            s = c.entries.pop(key)
            c.used -= s
            self.used -= s


def salru_get(cache: SaLruCache, key, now: float = 0.0):
    return cache.get(key, now)


def salru_put(cache: SaLruCache, key, size: int, now: float = 0.0):
    return cache.put(key, size, now)


class AuEntry:
    __slots__ = ("size", "expire_at", "hit_count", "refreshing")

    def __init__(self, size, expire_at):
        self.size = size
        self.expire_at = expire_at
        self.hit_count = 0
        self.refreshing = False


@dataclass
class AuResult:
    hit: bool
    size: int = 0
    refresh: bool = False


class AuLruCache:
    """Proxy cache that re-fetches hot entries shortly before they expire.

    A hit within ``refresh_window`` seconds of expiry on an entry with at
    least ``hot_threshold`` hits since its last fill asks the caller to start
    a refresh; the caller completes it with :meth:`complete_refresh`.
    """

    def __init__(self, capacity: int, refresh_window: float = 5.0, hot_threshold: int = 3,
                 active_update: bool = True):
        self.capacity = capacity
        self.refresh_window = refresh_window
        self.hot_threshold = hot_threshold
        self.active_update = active_update
        self.entries: OrderedDict = OrderedDict()
        self.used = 0
        self.hits = self.misses = self.evictions = self.refreshes = 0

    def __contains__(self, key):
        return key in self.entries

    def get(self, key, now: float) -> AuResult:
        e = self.entries.get(key)
        if e is None:
            self.misses += 1
            return AuResult(False)
        if e.expire_at <= now:
            self._remove(key)
            self.misses += 1
            return AuResult(False)
        self.entries.move_to_end(key)
        e.hit_count += 1
        self.hits += 1
        refresh = (self.active_update and not e.refreshing
                   and e.expire_at - now <= self.refresh_window
                   and e.hit_count >= self.hot_threshold)
        if refresh:
            e.refreshing = True
            self.refreshes += 1
        return AuResult(True, e.size, refresh)

    def put(self, key, size: int, expire_at: float) -> list:
        if size > self.capacity:
            return []
        self._remove(key)
        evicted = []
        while self.used + size > self.capacity:
            k, old = self.entries.popitem(last=False)
            self.used -= old.size
            evicted.append(k)
        self.entries[key] = AuEntry(size, expire_at)
        self.used += size
        self.evictions += len(evicted)
        return evicted

    def complete_refresh(self, key, size: int, expire_at: float) -> bool:
        """Install refreshed data; False if the entry was evicted meanwhile."""
        e = self.entries.get(key)
        if e is None:
            return False
        self.used += size - e.size
        e.size = size
        e.expire_at = expire_at
        e.hit_count = 0
        e.refreshing = False
        return True

    def invalidate(self, key) -> None:
        self._remove(key)

    def _remove(self, key) -> None:
        e = self.entries.pop(key, None)
        if e is not None:
            self.used -= e.size


def aulru_get(cache: AuLruCache, key, now: float) -> AuResult:
    return cache.get(key, now)


class FanoutRouter:
    """Limited fan-out hash routing over a tenant's proxies.

    Keys hash to one of ``n`` groups of ``N/n`` consecutive proxies; each
    request then picks a member of its group uniformly at random.
    """

    def __init__(self, proxies: int, groups: int, seed: int = 0x5EED):
        if groups < 1 or proxies < 1 or proxies % groups:
            raise ValueError(f"{groups} groups do not evenly divide {proxies} proxies")
        self.proxies = proxies
        self.groups = groups
        self.group_size = proxies // groups
        self.seed = seed

    def group_of(self, key) -> int:
        return hash64(key, self.seed) % self.groups

    def route(self, key, rng: np.random.Generator) -> int:
        g = self.group_of(key)
        if self.group_size == 1:
            return g
        return g * self.group_size + int(rng.integers(self.group_size))

    def route_many(self, keys: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        """Vectorised :meth:`route` for integer key arrays."""
        groups = (hash64_array(keys, self.seed) % np.uint64(self.groups)).astype(np.int64)
        if self.group_size == 1:
            return groups
        return groups * self.group_size + rng.integers(self.group_size, size=len(keys))


def fanout_route(router: FanoutRouter, key, rng: np.random.Generator) -> int:
    return router.route(key, rng)
