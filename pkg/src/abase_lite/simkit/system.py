"""Whole-system discrete-event simulation.

Request path: client -> fan-out routed proxy (AU-LRU cache, proxy quota) ->
leader node of the key's partition: request queue (entry stage), partition
quota gate, CPU-WFQ, node SA-LRU cache, I/O-WFQ. Background events run the
meta monitor, autoscaler, rescheduler, cache refreshes and migrations.
"""

from __future__ import annotations

import logging
import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .. import autoscale as asc
from ..admission import (MetaMonitor, PartitionGate, ProxyState, apply_directive, meta_tick,
                         partition_admit, proxy_admit)
from ..cache import AuLruCache, FanoutRouter, SaLruCache
from ..forecast import ForecastConfig, forecast
from ..reschedule import DEFAULT_THETA, Pool, intra_pool_reschedule
from ..ru import RuConfig, estimate_read_ru, new_read_stats, ru_write, settle_read, update_read_stats
from ..wfq import CpuLimits, CpuWfq, IoThreadPool, IoWfq, classify, io_dispatch, post_cpu_route
from .engine import US, EventQueue, SimulationError, to_us
from .metrics import ERRORS, OUTCOMES, MetricsSink, percentile_ms
from .service import ServiceParams, iops_for, service_model
from .workload import WorkloadProfile, gen_arrivals, sample_keys, sample_ops, value_size

log = logging.getLogger(__name__)

NO_DEADLINE = 1 << 62
TENANT_TOGGLES = ("proxy_quota", "partition_quota", "proxy_cache", "autoscaler")
NODE_TOGGLES = ("wfq", "node_cache", "rescheduler")


@dataclass
class Toggles:
    proxy_quota: bool = True
    partition_quota: bool = True
    wfq: bool = True
    proxy_cache: bool = True
    node_cache: bool = True
    autoscaler: bool = True
    rescheduler: bool = True


@dataclass
class ToggleEvent:
    at_s: float
    toggle: str
    value: bool
    tenant: str | None = None


@dataclass
class SimParams:
    ru: RuConfig = field(default_factory=RuConfig)
    service: ServiceParams = field(default_factory=ServiceParams)
    cpu: CpuLimits = field(default_factory=CpuLimits)
    io_basic_threads: int = 4
    io_extra_threads: int | None = None
    proxy_cache_bytes: int = 1 << 30
    node_cache_bytes: int = 256 << 20
    refresh_window: float = 5.0
    hot_threshold: int = 3
    proxy_refresh: bool = True
    default_ttl: float = 60.0
    meta_poll: float = 5.0
    meta_delay: float = 1.0
    fanout_seed: int = 0x5EED
    autoscale_period: float = 3600.0
    autoscale_up: float = asc.DEFAULT_UP
    autoscale_lower: float = asc.DEFAULT_LOWER
    forecast: ForecastConfig = field(default_factory=ForecastConfig)
    reschedule_period: float = 600.0
    theta: float = DEFAULT_THETA
    migration_bandwidth: float = 100e6


@dataclass
class TenantHistory:
    """Hourly usage (and optional quota / storage) history preceding the run."""

    usage: np.ndarray
    quota: np.ndarray | None = None
    storage: np.ndarray | None = None


class _Req:
    __slots__ = ("id", "tenant", "proxy", "read", "key", "size", "arrival", "deadline", "est",
                 "partition", "node", "cpu_enq", "payload")

    def __init__(self, rid, tenant, proxy, read, key, size, arrival, deadline):
        self.id = rid
        self.tenant = tenant
        self.proxy = proxy
        self.read = read
        self.key = key
        self.size = size
        self.arrival = arrival
        self.deadline = deadline
        self.est = 0.0
        self.partition = None
        self.node = None
        self.cpu_enq = 0
        self.payload = 0.0


class _Proxy:
    __slots__ = ("state", "cache", "stats")

    def __init__(self, state, cache, stats):
        self.state = state
        self.cache = cache
        self.stats = stats


class _Node:
    def __init__(self, node_id: str, params: SimParams, wfq_on: bool):
        self.id = node_id
        self.entry_queue: deque = deque()
        self.entry_busy = 0
        self.cpu = CpuWfq(params.cpu, fifo=not wfq_on)
        self.io = IoWfq(fifo=not wfq_on)
        extra = params.io_extra_threads
        if extra is None:
            extra = max(1, params.io_basic_threads // 4)
        self.pool = IoThreadPool(params.io_basic_threads, extra)
        self.cache = SaLruCache(params.node_cache_bytes)


@dataclass
class _Stream:
    profile: WorkloadProfile
    times: np.ndarray
    keys: np.ndarray
    reads: np.ndarray
    proxies: np.ndarray
    cursor: int = 0


@dataclass
class RunResult:
    metrics: MetricsSink
    summary: dict
    decisions: list
    migrations: list
    cpu_wait_max_us: dict
    cache_stats: dict


class Simulator:
    def __init__(self, world, profiles, duration: float, seed: int = 0, toggles: Toggles | None = None,
                 params: SimParams | None = None, timeline=(), histories=None, tenant_toggles=None):
        if duration <= 0:
            raise ValueError("duration must be positive")
        self.world = world
        self.profiles = list(profiles)
        self.duration = float(duration)
        self.horizon = to_us(duration)
        self.seed = int(seed)
        self.toggles = toggles or Toggles()
        self.p = params or SimParams()
        self.timeline = sorted(timeline, key=lambda e: e.at_s)
        self.histories = dict(histories or {})
        self.q = EventQueue()
        self.now = 0
        self.metrics = MetricsSink(world.tenants, duration)
        self.tenant_on = {t: {k: getattr(self.toggles, k) for k in TENANT_TOGGLES} for t in world.tenants}
        for t, over in (tenant_toggles or {}).items():
            self.tenant_on[t].update(over)
        self.nodes = {n: _Node(n, self.p, self.toggles.wfq) for n in world.nodes}
        self.gates: dict[str, PartitionGate] = {}
        for pid, part in world.partitions.items():
            self.gates[pid] = PartitionGate(pid, part.quota)
        self.monitor = MetaMonitor(self.p.meta_poll, self.p.meta_delay)
        self.proxies: dict[str, list[_Proxy]] = {}
        self.routers: dict[str, FanoutRouter] = {}
        for tid, tenant in world.tenants.items():
            self.routers[tid] = FanoutRouter(tenant.proxy_count, tenant.proxy_group_count, self.p.fanout_seed)
            self.proxies[tid] = [
                _Proxy(ProxyState(f"{tid}/px{i}", tid, tenant.proxy_quota),
                       AuLruCache(self.p.proxy_cache_bytes, self.p.refresh_window, self.p.hot_threshold,
                                  active_update=self.p.proxy_refresh),
                       new_read_stats(self.p.ru))
                for i in range(tenant.proxy_count)]
        self._quota_sum: dict[str, float] = {}
        self.in_system = 0
        self.area_us = 0  # integral of in-system count over time
        self.arrivals = 0
        self.terminated = 0
        self.cpu_wait_max = {t: 0 for t in world.tenants}
        self.decisions: list[dict] = []
        self.migrations: list[dict] = []
        self.scaling = {t: asc.ScalingState(t, ten.ru_quota, ten.partition_count, ten.partition_quota,
                                            self.p.autoscale_up, self.p.autoscale_lower)
                        for t, ten in world.tenants.items()}
        self.storage_scaling = {t: asc.ScalingState(t, ten.storage_quota, 1, None, math.inf, 0.0)
                                for t, ten in world.tenants.items()}
        self.hourly_ru = {t: [] for t in world.tenants}
        self._hour_ru = {t: 0.0 for t in world.tenants}
        self.refreshes = 0
        self.reschedule_stats: list[dict] = []
        self._rid = 0
        self._streams: list[_Stream] = []
        self._build_streams()

    # ---- setup ----------------------------------------------------------
    def _build_streams(self) -> None:
        ss = np.random.SeedSequence(self.seed)
        children = ss.spawn(len(self.profiles))
        for prof, child in zip(self.profiles, children):
            if prof.tenant_id not in self.world.tenants:
                raise ValueError(f"profile references unknown tenant {prof.tenant_id!r}")
            a, k, o, r = child.spawn(4)
            times = gen_arrivals(prof, self.duration, np.random.Generator(np.random.PCG64(a)))
            n = len(times)
            keys = sample_keys(prof.keys, n, np.random.Generator(np.random.PCG64(k))) + prof.key_offset
            reads = sample_ops(prof.read_ratio, n, np.random.Generator(np.random.PCG64(o)))
            router = self.routers[prof.tenant_id]
            proxies = router.route_many(keys, np.random.Generator(np.random.PCG64(r)))
            stream = _Stream(prof, times, keys, reads, proxies)
            self._streams.append(stream)
            if n:
                self.q.push(int(times[0]), "arrival", len(self._streams) - 1)

    def _schedule_background(self) -> None:
        poll = to_us(self.p.meta_poll)
        if poll < self.horizon:
            self.q.push(poll, "meta_tick")
        if self.histories:
            self.q.push(0, "autoscale_tick")
        first = to_us(self.p.reschedule_period)
        if self.toggles.rescheduler and self._has_load_vectors() and first < self.horizon:
            self.q.push(first, "rescheduler_tick")
        for ev in self.timeline:
            self.q.push(to_us(ev.at_s), "toggle", ev)

    def _has_load_vectors(self) -> bool:
        return any(np.any(r.ru_load_vector) or np.any(r.storage_load_vector)
                   for r in self.world.replicas.values())

    # ---- helpers --------------------------------------------------------
    def quota_sum(self, node_id: str) -> float:
        q = self._quota_sum.get(node_id)
        if q is None:
            q = self._quota_sum[node_id] = self.world.node_quota_sum(node_id)
        return q

    def _terminate(self, req: _Req, outcome: str, ru: float = 0) -> None:
        if outcome not in ERRORS and req.deadline < self.now:
            outcome, ru = "timeout", 0
        self.metrics.outcome(req.tenant, req.arrival, self.now, outcome, ru)
        if ru:
            self._hour_ru[req.tenant] += ru
        self.in_system -= 1
        self.terminated += 1

    def _expired(self, req: _Req) -> bool:
        return req.deadline < self.now

    # ---- main loop ------------------------------------------------------
    def run(self) -> RunResult:
        self._schedule_background()
        handlers = {
            "arrival": self._on_arrival, "entry_done": self._on_entry_done,
            "cpu_service_done": self._on_cpu_done, "io_service_done": self._on_io_done,
            "meta_tick": self._on_meta_tick, "meta_directive": self._on_directive,
            "autoscale_tick": self._on_autoscale, "rescheduler_tick": self._on_reschedule,
            "cache_refresh": self._on_refresh, "migration_done": self._on_migration_done,
            "toggle": self._on_toggle,
        }
        q = self.q
        while len(q):
            t, _, kind, payload = q.pop()
            if t < self.now:
                raise SimulationError("event scheduled in the past")
            self.area_us += self.in_system * (t - self.now)
            self.now = t
            handlers[kind](payload)
        if self.in_system:
            raise SimulationError(f"event queue empty with {self.in_system} requests still pending")
        return self._result()

    # ---- request path ---------------------------------------------------
    def _on_arrival(self, si: int) -> None:
        st = self._streams[si]
        i = st.cursor
        st.cursor += 1
        if st.cursor < len(st.times):
            self.q.push(int(st.times[st.cursor]), "arrival", si)
        prof = st.profile
        tid = prof.tenant_id
        key = int(st.keys[i])
        self._rid += 1
        deadline = NO_DEADLINE if prof.timeout is None else self.now + to_us(prof.timeout)
        req = _Req(self._rid, tid, int(st.proxies[i]), bool(st.reads[i]), key,
                   value_size(prof.value_size, key, self.world.hash_seed), self.now, deadline)
        self.arrivals += 1
        self.in_system += 1
        self.metrics.offered(tid, self.now)
        on = self.tenant_on[tid]
        px = self.proxies[tid][req.proxy]
        now_s = self.now / US
        if req.read:
            if on["proxy_cache"]:
                res = px.cache.get(key, now_s)
                if res.hit:
                    update_read_stats(px.stats, res.size, True)
                    if res.refresh:
                        self.refreshes += 1
                        delay = service_model(1, "cpu", self.p.service) + service_model(
                            iops_for(res.size), "io", self.p.service)
                        self.q.push(self.now + delay, "cache_refresh", (tid, req.proxy, key))
                    self._terminate(req, "served_from_proxy_cache", 0)
                    return
            req.est = estimate_read_ru(px.stats, self.p.ru)
            req.payload = px.stats.mean_size if not px.stats.empty else req.size
        else:
            req.est = float(ru_write(req.size, self.p.ru))
            req.payload = req.size
        self.monitor.record(px.state, req.est)
        if on["proxy_quota"] and not proxy_admit(px.state, req.est, now_s).admitted:
            self._terminate(req, "proxy_reject")
            return
        part_id = prof.target_partition or self.world.partition_of(tid, key).id
        req.partition = part_id
        node = self.nodes[self.world.leader_node(part_id)]
        req.node = node.id
        if node.entry_busy < self.p.service.entry_threads:
            self._start_entry(node, req)
        else:
            node.entry_queue.append(req)

    def _start_entry(self, node: _Node, req: _Req) -> None:
        node.entry_busy += 1
        self.q.push(self.now + service_model(0, "entry", self.p.service), "entry_done", (node, req))

    def _on_entry_done(self, payload) -> None:
        node, req = payload
        node.entry_busy -= 1
        while node.entry_queue:
            nxt = node.entry_queue.popleft()
            if self._expired(nxt):
                self._terminate(nxt, "timeout")
                continue
            self._start_entry(node, nxt)
            break
        if self._expired(req):
            self._terminate(req, "timeout")
            return
        tid = req.tenant
        gate = self.gates.get(req.partition)
        if gate is None:  # partition was split while the request queued
            req.partition = self.world.partition_of(tid, req.key).id
            gate = self.gates[req.partition]
        if self.tenant_on[tid]["partition_quota"] and not partition_admit(gate, req.est, self.now / US).admitted:
            self._terminate(req, "partition_reject")
            return
        part = self.world.partitions[req.partition]
        qclass = classify("Get" if req.read else "Put", req.payload)
        req.cpu_enq = self.now
        node.cpu.enqueue(req, qclass, req.est, part.quota, max(self.quota_sum(node.id), part.quota), tid)
        self._dispatch_cpu(node)

    def _dispatch_cpu(self, node: _Node) -> None:
        cpu = node.cpu
        if not len(cpu):
            return
        for e in cpu.drop_expired(lambda e: e.request.deadline < self.now):
            self._terminate(e.request, "timeout")
        while True:
            e = cpu.dequeue()
            if e is None:
                break
            req = e.request
            wait = self.now - req.cpu_enq
            if wait > self.cpu_wait_max[req.tenant]:
                self.cpu_wait_max[req.tenant] = wait
            self.q.push(self.now + service_model(req.est, "cpu", self.p.service), "cpu_service_done", (node, e))

    def _on_cpu_done(self, payload) -> None:
        node, e = payload
        node.cpu.release_slot(e)
        req = e.request
        cache = node.cache if self.toggles.node_cache else None
        route, cost = post_cpu_route(req.read, (req.tenant, req.key), req.size, cache, self.now / US)
        if route == "done":
            node.cpu.finish(e)
            self._read_done(req, "node_cache")
        else:
            part = self.world.partitions.get(req.partition)
            quota = part.quota if part else self.world.tenants[req.tenant].partition_quota
            node.io.enqueue(e, e.qclass, cost, quota, max(self.quota_sum(node.id), quota), req.tenant)
            self._dispatch_io(node)
        self._dispatch_cpu(node)

    def _dispatch_io(self, node: _Node) -> None:
        if not len(node.io):
            return
        for e in node.io.drop_expired(lambda e: e.request.request.deadline < self.now):
            node.cpu.finish(e.request)
            self._terminate(e.request.request, "timeout")
        for e, thread in io_dispatch(node.pool, node.io, self.toggles.wfq):
            self.q.push(self.now + service_model(e.cost, "io", self.p.service), "io_service_done",
                        (node, e, thread))

    def _on_io_done(self, payload) -> None:
        node, e, thread = payload
        node.pool.release(thread)
        cpu_entry = e.request
        node.cpu.finish(cpu_entry)
        req = cpu_entry.request
        now_s = self.now / US
        if self.toggles.node_cache:
            node.cache.put((req.tenant, req.key), req.size, now_s)
        if req.read:
            self._read_done(req, "disk")
        else:
            px = self.proxies[req.tenant][req.proxy]
            px.cache.invalidate(req.key)
            self._terminate(req, "served_from_disk", ru_write(req.size, self.p.ru))
        self._dispatch_io(node)
        self._dispatch_cpu(node)

    def _read_done(self, req: _Req, source: str) -> None:
        px = self.proxies[req.tenant][req.proxy]
        update_read_stats(px.stats, req.size, False)
        if self.tenant_on[req.tenant]["proxy_cache"]:
            ttl = self._ttl(req.tenant)
            px.cache.put(req.key, req.size, self.now / US + ttl)
        self._terminate(req, "served_from_node_cache" if source == "node_cache" else "served_from_disk",
                        settle_read(req.size, source, self.p.ru))

    def _ttl(self, tenant: str) -> float:
        for prof in self.profiles:
            if prof.tenant_id == tenant and prof.ttl is not None:
                return prof.ttl
        return self.p.default_ttl

    def _on_refresh(self, payload) -> None:
        tid, pi, key = payload
        px = self.proxies[tid][pi]
        size = value_size(self._profile_of(tid).value_size, key, self.world.hash_seed)
        px.cache.complete_refresh(key, size, self.now / US + self._ttl(tid))

    def _profile_of(self, tenant: str) -> WorkloadProfile:
        for prof in self.profiles:
            if prof.tenant_id == tenant:
                return prof
        raise KeyError(tenant)

    # ---- control plane --------------------------------------------------
    def _on_meta_tick(self, _payload) -> None:
        now_s = self.now / US
        proxies = [p.state for tid, group in self.proxies.items() if self.tenant_on[tid]["proxy_quota"]
                   for p in group]
        directives = meta_tick(self.monitor, proxies, now_s)
        if directives:
            self.q.push(self.now + to_us(self.p.meta_delay), "meta_directive", directives)
        nxt = self.now + to_us(self.p.meta_poll)
        if nxt < self.horizon:
            self.q.push(nxt, "meta_tick")

    def _on_directive(self, directives) -> None:
        index = {p.state.proxy_id: p.state for group in self.proxies.values() for p in group}
        for d in directives:
            if apply_directive(index[d.proxy_id], d, self.now / US):
                self.decisions.append({"time": self.now / US, "kind": "meta", "tenant": d.tenant_id,
                                       "proxy": d.proxy_id, "action": d.action})

    def _on_toggle(self, ev: ToggleEvent) -> None:
        targets = [ev.tenant] if ev.tenant else list(self.tenant_on)
        for t in targets:
            self.tenant_on[t][ev.toggle] = ev.value
        if ev.toggle == "proxy_quota" and ev.value:
            # a proxy whose enforcement starts now starts a fresh poll period
            for t in targets:
                for p in self.proxies[t]:
                    self.monitor.offered.pop(p.state.proxy_id, None)
        self.decisions.append({"time": ev.at_s, "kind": "toggle", "tenant": ev.tenant,
                               "toggle": ev.toggle, "value": ev.value})

    def _on_autoscale(self, _payload) -> None:
        hour = self.now // (3600 * US)
        for t in sorted(self.world.tenants):
            if self.now:
                self.hourly_ru[t].append(self._hour_ru[t] / 3600.0)
                self._hour_ru[t] = 0.0
            hist = self.histories.get(t)
            if hist is None or not self.tenant_on[t]["autoscaler"]:
                continue
            usage = np.concatenate([np.asarray(hist.usage, dtype=float), self.hourly_ru[t]])
            res = forecast(usage, None, cfg=self.p.forecast)
            state = self.scaling[t]
            dec = asc.decide(state, res.u_max, self.now / US)
            rec = dec.as_record(self.now / US, t, state)
            rec.update(kind="autoscale", u_max=res.u_max, detected_period=res.detected_period,
                       burst_guard=res.burst_guard_applied)
            self.decisions.append(rec)
            if dec.action != "none":
                created = asc.apply(self.world, t, dec, self.now / US)
                self.scaling[t] = asc.advance(state, dec, self.now / US)
                self._refresh_tenant(t, created)
            if hist.storage is not None:
                s_res = forecast(np.asarray(hist.storage, dtype=float), None, cfg=self.p.forecast)
                s_state = self.storage_scaling[t]
                s_dec = asc.decide(s_state, s_res.u_max, self.now / US)
                s_rec = s_dec.as_record(self.now / US, t, s_state, "storage")
                s_rec.update(kind="autoscale", u_max=s_res.u_max)
                self.decisions.append(s_rec)
                if s_dec.action != "none":
                    asc.apply_storage(self.world, t, s_dec)
                    self.storage_scaling[t] = asc.advance(s_state, s_dec, self.now / US)
        nxt = (hour + 1) * 3600 * US
        if nxt < self.horizon:
            self.q.push(nxt, "autoscale_tick")

    def _refresh_tenant(self, tid: str, created) -> None:
        now_s = self.now / US
        tenant = self.world.tenants[tid]
        for p in self.proxies[tid]:
            p.state.set_quota(tenant.proxy_quota, now_s)
        for parent, _child in created:
            self.gates.pop(parent, None)
        for part in self.world.tenant_partitions(tid):
            gate = self.gates.get(part.id)
            if gate is None:
                self.gates[part.id] = PartitionGate(part.id, part.quota)
            else:
                gate.set_quota(part.quota, now_s)
        self._quota_sum.clear()

    def _on_reschedule(self, _payload) -> None:
        for pool_id in sorted(self.world.pools):
            pool = Pool.from_world(self.world, pool_id)
            if not pool.replica_ids:
                continue
            before = (pool.std("ru"), pool.var("storage"))
            plan = intra_pool_reschedule(pool, self.p.theta)
            self.reschedule_stats.append({"time": self.now / US, "pool": pool_id, "moves": len(plan),
                                          "ru_std": before[0], "storage_var": before[1]})
            for m in plan:
                rep = self.world.replicas[m.replica]
                self.world.nodes[m.src].is_migrating = True
                self.world.nodes[m.dst].is_migrating = True
                seconds = rep.storage_bytes / self.p.migration_bandwidth
                rec = m.as_record()
                rec.update(time=self.now / US, pool=pool_id, duration_s=seconds)
                self.migrations.append(rec)
                self.q.push(self.now + max(1, to_us(seconds)), "migration_done", m)
        nxt = self.now + to_us(self.p.reschedule_period)
        if nxt < self.horizon:
            self.q.push(nxt, "rescheduler_tick")

    def _on_migration_done(self, m) -> None:
        self.world.move_replica(m.replica, m.dst)
        self.world.nodes[m.src].is_migrating = False
        self.world.nodes[m.dst].is_migrating = False
        self._quota_sum.clear()

    # ---- results --------------------------------------------------------
    def _result(self) -> RunResult:
        problems = self.metrics.audit()
        if self.terminated != self.arrivals:
            problems.append(f"{self.arrivals} arrivals but {self.terminated} terminal outcomes")
        tenants = {}
        all_lat = []
        for t in sorted(self.world.tenants):
            tot = self.metrics.totals(t)
            lat = self.metrics.all_latency[t]
            all_lat.extend(lat)
            succ = [x for s in range(self.metrics.seconds) for x in self.metrics.latency.get((s, t), ())]
            tenants[t] = {
                **tot,
                "p50_ms": percentile_ms(succ, 50), "p99_ms": percentile_ms(succ, 99),
                "final_ru_quota": self.world.tenants[t].ru_quota,
                "final_partition_count": self.world.tenants[t].partition_count,
                "cpu_wait_max_ms": self.cpu_wait_max[t] / 1000.0,
            }
        span = max(self.now, 1)
        mean_latency = float(np.mean(all_lat)) if all_lat else 0.0
        concurrency = self.area_us / span
        rate = self.arrivals / span
        cache = self._cache_stats()
        summary = {
            "duration_s": self.duration,
            "seed": self.seed,
            "arrivals": self.arrivals,
            "tenants": tenants,
            "conservation": {"ok": not problems, "problems": problems[:20], "categories": list(OUTCOMES)},
            "littles_law": {"mean_concurrency": concurrency, "arrival_rate_per_us": rate,
                            "mean_latency_us": mean_latency,
                            "rate_times_latency": rate * mean_latency},
            "caches": cache,
            "autoscale_decisions": sum(1 for d in self.decisions if d.get("kind") == "autoscale"),
            "migrations": len(self.migrations),
            "reschedule_rounds": self.reschedule_stats,
            "end_time_s": self.now / US,
        }
        return RunResult(self.metrics, summary, self.decisions, self.migrations,
                         dict(self.cpu_wait_max), cache)

    def _cache_stats(self) -> dict:
        out = {}
        for tid, group in sorted(self.proxies.items()):
            out[f"proxy/{tid}"] = {
                "hits": sum(p.cache.hits for p in group), "misses": sum(p.cache.misses for p in group),
                "evictions": sum(p.cache.evictions for p in group),
                "refreshes": sum(p.cache.refreshes for p in group)}
        for nid, node in sorted(self.nodes.items()):
            c = node.cache
            out[f"node/{nid}"] = {"hits": c.hits, "misses": c.misses, "evictions": c.evictions,
                                  "io_extra_activations": node.pool.extra_activations}
        return out


def run(world, profiles, duration: float, seed: int = 0, **kwargs) -> RunResult:
    """Simulate ``duration`` seconds; deterministic for a given seed."""
    return Simulator(world, profiles, duration, seed, **kwargs).run()
