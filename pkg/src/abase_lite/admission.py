"""Hierarchical request restriction.

Proxies enforce a per-proxy share of the tenant quota with token buckets and
may run at twice that share until the meta monitor sees the tenant's total
exceed its quota. Data nodes cap each partition at three times its partition
quota at the request-queue entry.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

BURST_FACTOR = 2.0
PARTITION_CAP_MULTIPLIER = 3.0
BUCKET_WINDOW = 1.0

PROXY_QUOTA_EXCEEDED = "proxy_quota_exceeded"
PARTITION_QUOTA_EXCEEDED = "partition_quota_exceeded"


class Verdict(NamedTuple):
    admitted: bool
    reason: str | None = None


ADMIT = Verdict(True)


@dataclass
class TokenBucket:
    rate: float
    capacity: float
    tokens: float
    last: float = 0.0

    @classmethod
    def full(cls, rate: float, window: float = BUCKET_WINDOW, now: float = 0.0) -> "TokenBucket":
        return cls(rate, rate * window, rate * window, now)

    def refill(self, now: float) -> None:
        if now > self.last:
            self.tokens = min(self.capacity, self.tokens + (now - self.last) * self.rate)
            self.last = now

    def take(self, amount: float, now: float) -> bool:
        self.refill(now)
        if amount <= 0:
            return True
        if self.tokens >= amount:
            self.tokens -= amount
            return True
        return False

    def reconfigure(self, rate: float, capacity: float, now: float) -> None:
        self.refill(now)
        self.rate = rate
        self.capacity = capacity
        self.tokens = min(self.tokens, capacity)


@dataclass
class ProxyState:
    proxy_id: str
    tenant_id: str
    proxy_quota: float
    burst_mode: bool = True
    window: float = BUCKET_WINDOW
    bucket: TokenBucket = field(init=False)

    def __post_init__(self):
        ceiling = self.ceiling
        self.bucket = TokenBucket(ceiling, ceiling * self.window, ceiling * self.window)

    @property
    def ceiling(self) -> float:
        return self.proxy_quota * (BURST_FACTOR if self.burst_mode else 1.0)

    def _sync(self, now: float) -> None:
        c = self.ceiling
        self.bucket.reconfigure(c, c * self.window, now)

    def set_burst(self, enabled: bool, now: float) -> bool:
        """Switch burst mode; returns True if the state changed."""
        if self.burst_mode == enabled:
            return False
        self.burst_mode = enabled
        self._sync(now)
        return True

    def set_quota(self, proxy_quota: float, now: float) -> None:
        self.proxy_quota = proxy_quota
        self._sync(now)


@dataclass
class PartitionGate:
    partition_id: str
    partition_quota: float
    cap_multiplier: float = PARTITION_CAP_MULTIPLIER
    window: float = BUCKET_WINDOW
    bucket: TokenBucket = field(init=False)
    rejected: int = 0

    def __post_init__(self):
        rate = self.rate
        self.bucket = TokenBucket(rate, rate * self.window, rate * self.window)

    @property
    def rate(self) -> float:
        return self.cap_multiplier * self.partition_quota

    def set_quota(self, partition_quota: float, now: float) -> None:
        self.partition_quota = partition_quota
        self.bucket.reconfigure(self.rate, self.rate * self.window, now)


def proxy_admit(state: ProxyState, request_ru: float, now: float) -> Verdict:
    """Admit iff the proxy's bucket holds ``request_ru`` tokens.

    Proxy-cache hits must never reach this call.
    """
    if state.bucket.take(request_ru, now):
        return ADMIT
    return Verdict(False, PROXY_QUOTA_EXCEEDED)


def partition_admit(gate: PartitionGate, request_ru: float, now: float) -> Verdict:
    if gate.partition_quota <= 0:
        gate.rejected += 1
        return Verdict(False, PARTITION_QUOTA_EXCEEDED)
    if gate.bucket.take(request_ru, now):
        return ADMIT
    gate.rejected += 1
    return Verdict(False, PARTITION_QUOTA_EXCEEDED)


class Directive(NamedTuple):
    tenant_id: str
    proxy_id: str
    action: str  # "revert" | "restore"


@dataclass
class MetaMonitor:
    """Offered proxy traffic per tenant over the current poll period.

    Traffic is what clients offer to each proxy (before the proxy's own
    admission), so a tenant pinned at its standard quota is not mistaken for
    a compliant one.
    """

    poll_period: float = 5.0
    directive_delay: float = 1.0
    period_start: float = 0.0
    offered: dict = field(default_factory=lambda: defaultdict(float))

    def record(self, proxy: ProxyState, ru: float) -> None:
        self.offered[proxy.proxy_id] += ru


def meta_tick(monitor: MetaMonitor, proxies: Iterable[ProxyState], now: float) -> list[Directive]:
    elapsed = now - monitor.period_start
    by_tenant: dict[str, list[ProxyState]] = defaultdict(list)
    for p in proxies:
        by_tenant[p.tenant_id].append(p)
    directives = []
    if elapsed > 0:
        for tenant_id in sorted(by_tenant):
            group = by_tenant[tenant_id]
            quota = sum(p.proxy_quota for p in group)
            rate = sum(monitor.offered.get(p.proxy_id, 0.0) for p in group) / elapsed
            if rate > quota:
                directives.extend(Directive(tenant_id, p.proxy_id, "revert") for p in group if p.burst_mode)
            else:
                directives.extend(Directive(tenant_id, p.proxy_id, "restore") for p in group if not p.burst_mode)
    monitor.offered.clear()
    monitor.period_start = now
    return directives


def apply_directive(proxy: ProxyState, directive: Directive, now: float) -> bool:
    """Apply one directive; repeated application is a no-op."""
    if directive.proxy_id != proxy.proxy_id:
        raise ValueError("directive addressed to a different proxy")
    return proxy.set_burst(directive.action == "restore", now)
