"""Dual-layer weighted fair queueing inside a data node.

Requests are split into four classes (read/write x small/large). Each class
has a CPU-layer queue costed in RU and an I/O-layer queue costed in IOPS.
Within a class, a tenant's virtual finish time accumulates:

    vft = preVFT[tenant] + cost * sum(Q_p on node) / Q_i

and the scheduler serves the smallest vft among eligible tenants.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

from .domain import LARGE_REQUEST_THRESHOLD, READ_KINDS

QUEUE_CLASSES = ("read-small", "read-large", "write-small", "write-large")
REBASE_LIMIT = float(2 ** 53)
IO_BLOCK = 4096


class WfqConfigError(ValueError):
    pass


def classify(kind: str, payload: float, threshold: int = LARGE_REQUEST_THRESHOLD) -> str:
    """Queue class from request kind and (estimated) payload in bytes."""
    op = "read" if kind in READ_KINDS else "write"
    return f"{op}-{'large' if payload >= threshold else 'small'}"


class VftEntry:
    __slots__ = ("vft", "seq", "tenant_id", "cost", "request", "qclass")

    def __init__(self, vft, seq, tenant_id, cost, request, qclass):
        self.vft = vft
        self.seq = seq
        self.tenant_id = tenant_id
        self.cost = cost
        self.request = request
        self.qclass = qclass

    def key(self):
        return (self.vft, self.seq)

    def __repr__(self):
        return f"VftEntry(tenant={self.tenant_id!r}, vft={self.vft:g}, seq={self.seq})"


@dataclass
class WfqQueue:
    """One class queue.

    Entries are held in per-tenant FIFOs; a tenant's vft never decreases,
    so each FIFO is already sorted and the queue minimum is the smallest
    tenant head. Ties go to the earlier enqueue.
    """

    qclass: str
    pre_vft: dict = field(default_factory=dict)
    fifos: dict = field(default_factory=dict)
    size: int = 0

    def __len__(self):
        return self.size

    def push(self, entry: VftEntry) -> None:
        fifo = self.fifos.get(entry.tenant_id)
        if fifo is None:
            fifo = self.fifos[entry.tenant_id] = deque()
        fifo.append(entry)
        self.size += 1

    def heads(self):
        for fifo in self.fifos.values():
            if fifo:
                yield fifo[0]

    def peek(self) -> VftEntry | None:
        best = None
        for e in self.heads():
            if best is None or (e.vft, e.seq) < (best.vft, best.seq):
                best = e
        return best

    def pop_tenant(self, tenant_id: str) -> VftEntry:
        self.size -= 1
        return self.fifos[tenant_id].popleft()

    def pop(self) -> VftEntry | None:
        e = self.peek()
        if e is not None:
            self.pop_tenant(e.tenant_id)
        return e

    def depth(self, tenant_id: str) -> int:
        fifo = self.fifos.get(tenant_id)
        return len(fifo) if fifo else 0

    def rebase(self) -> None:
        floor = min(self.pre_vft.values())
        for t in self.pre_vft:
            self.pre_vft[t] -= floor
        for fifo in self.fifos.values():
            for e in fifo:
                e.vft -= floor


def weighted_cost(cost: float, partition_quota: float, node_quota_sum: float) -> float:
    if partition_quota <= 0:
        raise WfqConfigError("partition quota must be positive for WFQ weighting")
    if node_quota_sum < partition_quota:
        raise WfqConfigError("node quota sum is smaller than the partition quota")
    return cost * node_quota_sum / partition_quota


def wfq_enqueue(queue: WfqQueue, request, cost: float, partition_quota: float,
                node_quota_sum: float, tenant_id: str, seq: int) -> VftEntry:
    vft = queue.pre_vft.get(tenant_id, 0.0) + weighted_cost(cost, partition_quota, node_quota_sum)
    queue.pre_vft[tenant_id] = vft
    entry = VftEntry(vft, seq, tenant_id, cost, request, queue.qclass)
    queue.push(entry)
    if vft > REBASE_LIMIT:
        queue.rebase()
    return entry


@dataclass
class CpuLimits:
    """Rule 2 and Rule 3 parameters for one node's CPU layer."""

    slots: int = 8
    max_reads: int = 64
    max_writes: int = 32
    write_ru_ceiling: float = 256.0
    tenant_share: float = 0.9
    concurrency_limits: bool = True
    tenant_cap: bool = True

    @property
    def tenant_slot_cap(self) -> int:
        return max(1, math.floor(self.tenant_share * self.slots + 1e-9))


class CpuWfq:
    """CPU-layer scheduler: four class queues plus the node's in-flight state.

    In-flight (Rule 2) counts requests dispatched from this layer and not yet
    finished anywhere in the node; slot occupancy (Rule 3) counts requests
    currently holding a CPU thread.
    """

    def __init__(self, limits: CpuLimits | None = None, fifo: bool = False):
        self.limits = limits or CpuLimits()
        self.fifo = fifo
        self.queues = {c: WfqQueue(c) for c in QUEUE_CLASSES}
        self.busy = 0
        self.busy_by_tenant: dict[str, int] = {}
        self.inflight_reads = 0
        self.inflight_writes = 0
        self.inflight_write_ru = 0.0
        self._seq = 0
        self.max_depth = {c: 0 for c in QUEUE_CLASSES}

    def __len__(self):
        return sum(len(q) for q in self.queues.values())

    def enqueue(self, request, qclass: str, cost: float, partition_quota: float,
                node_quota_sum: float, tenant_id: str) -> VftEntry:
        self._seq += 1
        if self.fifo:
            q = self.queues[QUEUE_CLASSES[0]]
            entry = VftEntry(float(self._seq), self._seq, tenant_id, cost, request, qclass)
            q.push(entry)
        else:
            q = self.queues[qclass]
            entry = wfq_enqueue(q, request, cost, partition_quota, node_quota_sum, tenant_id, self._seq)
            entry.qclass = qclass
        if len(q) > self.max_depth[q.qclass]:
            self.max_depth[q.qclass] = len(q)
        return entry

    def _eligible(self, entry: VftEntry) -> bool:
        lim = self.limits
        is_write = entry.qclass.startswith("write")
        if lim.concurrency_limits and not self.fifo:
            if is_write:
                if self.inflight_writes >= lim.max_writes:
                    return False
                if self.inflight_write_ru > 0 and self.inflight_write_ru + entry.cost > lim.write_ru_ceiling:
                    return False
            elif self.inflight_reads >= lim.max_reads:
                return False
        if lim.tenant_cap and not self.fifo:
            if self.busy_by_tenant.get(entry.tenant_id, 0) + 1 > lim.tenant_slot_cap:
                return False
        return True

    def dequeue(self) -> VftEntry | None:
        """Smallest-vft eligible entry, or None if nothing can start now."""
        if self.busy >= self.limits.slots:
            return None
        best = None
        best_q = None
        for q in self.queues.values():
            if not q.size:
                continue
            for e in q.heads():
                if best is not None and (e.vft, e.seq) >= (best.vft, best.seq):
                    continue
                if self._eligible(e):
                    best, best_q = e, q
        if best is None:
            return None
        best_q.pop_tenant(best.tenant_id)
        self.busy += 1
        self.busy_by_tenant[best.tenant_id] = self.busy_by_tenant.get(best.tenant_id, 0) + 1
        if best.qclass.startswith("write"):
            self.inflight_writes += 1
            self.inflight_write_ru += best.cost
        else:
            self.inflight_reads += 1
        return best

    def drop_expired(self, expired) -> list[VftEntry]:
        """Remove queued entries for which ``expired(entry)`` is true."""
        dropped = []
        for q in self.queues.values():
            for t, fifo in q.fifos.items():
                while fifo and expired(fifo[0]):
                    dropped.append(fifo.popleft())
                    q.size -= 1
        return dropped

    def release_slot(self, entry: VftEntry) -> None:
        self.busy -= 1
        self.busy_by_tenant[entry.tenant_id] -= 1

    def finish(self, entry: VftEntry) -> None:
        """The request left the node (cache hit, I/O done, or dropped)."""
        if entry.qclass.startswith("write"):
            self.inflight_writes -= 1
            self.inflight_write_ru -= entry.cost
            if self.inflight_writes == 0:
                self.inflight_write_ru = 0.0
        else:
            self.inflight_reads -= 1


def cpu_dequeue(sched: CpuWfq) -> VftEntry | None:
    return sched.dequeue()


def iops_estimate(size: int, block: int = IO_BLOCK) -> int:
    """I/O cost of a request: one IOPS per started block."""
    return max(1, math.ceil(size / block))


def post_cpu_route(is_read: bool, key, size: int, node_cache, now: float = 0.0) -> tuple[str, int]:
    """Where a request goes after the CPU layer.

    Reads look up the node cache exactly once: a hit returns ``("done",
    cached_size)``. Misses and every write continue to the I/O layer as
    ``("io", iops)``. ``node_cache`` may be None when the cache is disabled.
    """
    if is_read and node_cache is not None:
        cached = node_cache.get(key, now)
        if cached is not None:
            return "done", cached
    return "io", iops_estimate(size)


@dataclass
class IoThreadPool:
    basic_threads: int = 4
    extra_threads: int = 1
    basic: list = field(default_factory=list)
    extra: list = field(default_factory=list)
    extra_activations: int = 0

    def __post_init__(self):
        self.basic = [None] * self.basic_threads
        self.extra = [None] * self.extra_threads

    @classmethod
    def with_default_extra(cls, basic_threads: int) -> "IoThreadPool":
        return cls(basic_threads, max(1, basic_threads // 4))

    def monopolist(self) -> str | None:
        """Tenant holding every basic thread, if any."""
        if not self.basic or any(t is None for t in self.basic):
            return None
        first = self.basic[0]
        return first if all(t == first for t in self.basic) else None

    def release(self, thread: tuple[str, int]) -> None:
        kind, idx = thread
        getattr(self, kind)[idx] = None


class IoWfq:
    """I/O-layer class queues; costs are IOPS counts."""

    def __init__(self, fifo: bool = False):
        self.fifo = fifo
        self.queues = {c: WfqQueue(c) for c in QUEUE_CLASSES}
        self._seq = 0

    def __len__(self):
        return sum(len(q) for q in self.queues.values())

    def enqueue(self, request, qclass: str, iops: float, partition_quota: float,
                node_quota_sum: float, tenant_id: str) -> VftEntry:
        self._seq += 1
        if self.fifo:
            e = VftEntry(float(self._seq), self._seq, tenant_id, iops, request, qclass)
            self.queues[QUEUE_CLASSES[0]].push(e)
            return e
        e = wfq_enqueue(self.queues[qclass], request, iops, partition_quota, node_quota_sum,
                        tenant_id, self._seq)
        return e

    def pop_min(self, exclude: str | None = None) -> VftEntry | None:
        best, best_q = None, None
        for q in self.queues.values():
            if not q.size:
                continue
            for e in q.heads():
                if e.tenant_id == exclude:
                    continue
                if best is None or (e.vft, e.seq) < (best.vft, best.seq):
                    best, best_q = e, q
        if best is not None:
            best_q.pop_tenant(best.tenant_id)
        return best

    def drop_expired(self, expired) -> list[VftEntry]:
        dropped = []
        for q in self.queues.values():
            for fifo in q.fifos.values():
                while fifo and expired(fifo[0]):
                    dropped.append(fifo.popleft())
                    q.size -= 1
        return dropped


def io_dispatch(pool: IoThreadPool, io_queue: IoWfq, extra_enabled: bool = True):
    """Assign waiting entries to idle threads.

    Basic threads take the smallest vft. When every basic thread serves one
    tenant, idle extra threads take the smallest-vft entries of other
    tenants. Returns ``[(entry, ("basic"|"extra", index)), ...]``.
    """
    out = []
    for i, t in enumerate(pool.basic):
        if t is None and len(io_queue):
            e = io_queue.pop_min()
            pool.basic[i] = e.tenant_id
            out.append((e, ("basic", i)))
    if not extra_enabled:
        return out
    mono = pool.monopolist()
    if mono is None:
        return out
    for i, t in enumerate(pool.extra):
        if t is None:
            e = io_queue.pop_min(exclude=mono)
            if e is None:
                break
            pool.extra[i] = e.tenant_id
            pool.extra_activations += 1
            out.append((e, ("extra", i)))
    return out
