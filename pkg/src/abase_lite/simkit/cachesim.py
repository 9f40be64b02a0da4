"""Trace-driven cache experiments that need no queueing model.

Proxy-side fan-out studies and node-cache policy comparisons only depend on
the order of requests, so they replay a sampled key trace directly instead
of running the full event simulation.
"""

from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass

import numpy as np

from ..cache import FanoutRouter, LruCache, SaLruCache
from .workload import LognormalSize, ZipfKeys, sample_keys, value_size


@dataclass
class FanoutResult:
    groups: int
    requests: int
    hits: int
    hot_key_requests: int
    hot_per_proxy: np.ndarray  # hot-key requests landing on each proxy

    @property
    def hit_ratio(self) -> float:
        return self.hits / self.requests if self.requests else 0.0

    @property
    def hot_peak(self) -> int:
        return int(self.hot_per_proxy.max(initial=0))


def _lru_hits(keys: np.ndarray, proxies: np.ndarray, n_proxies: int, capacity: int) -> int:
    """Hits when every proxy runs an LRU of ``capacity`` unit-size objects."""
    caches = [OrderedDict() for _ in range(n_proxies)]
    hits = 0
    for k, p in zip(keys.tolist(), proxies.tolist()):
        c = caches[p]
        if k in c:
            c.move_to_end(k)
            hits += 1
        else:
            c[k] = None
            if len(c) > capacity:
                c.popitem(last=False)
    return hits


def fanout_experiment(requests: int = 1_000_000, proxies: int = 75, groups: int = 1,
                      capacity: int = 100, key_count: int = 100_000, s: float = 1.0,
                      seed: int = 0, keys: np.ndarray | None = None) -> FanoutResult:
    """Aggregate proxy hit ratio and hot-key spread for one group count.

    The same key trace (``seed``) can be replayed for several group counts;
    routing randomness is drawn from a separate stream. Key 0 is the hottest.
    """
    if keys is None:
        keys = sample_keys(ZipfKeys(s, key_count), requests, seed)
    router = FanoutRouter(proxies, groups)
    route_rng = np.random.default_rng([seed, groups])
    dest = router.route_many(keys, route_rng)
    hits = _lru_hits(keys, dest, proxies, capacity)
    hot = keys == 0
    per_proxy = np.bincount(dest[hot], minlength=proxies)
    return FanoutResult(groups, len(keys), hits, int(hot.sum()), per_proxy)


def size_aware_comparison(requests: int = 200_000, capacity: int = 4 << 20, key_count: int = 20_000,
                          s: float = 1.0, mu: float = 7.0, sigma: float = 2.0, seed: int = 0):
    """Object hit ratios of the size-aware cache and plain LRU on one trace.

    Keys follow Zipf(``s``); each key has a fixed lognormal size. Misses
    insert the object, as a read-through node cache would. Returns
    ``(sa_hit_ratio, lru_hit_ratio)``.
    """
    keys = sample_keys(ZipfKeys(s, key_count), requests, seed)
    dist = LognormalSize(mu, sigma)
    sizes = {int(k): value_size(dist, int(k), seed) for k in np.unique(keys)}
    results = []
    for cache in (SaLruCache(capacity), LruCache(capacity)):
        for i, k in enumerate(keys.tolist()):
            now = i * 1e-3
            if cache.get(k, now) is None:
                cache.put(k, sizes[k], now)
        results.append(cache.hits / requests)
    return tuple(results)
