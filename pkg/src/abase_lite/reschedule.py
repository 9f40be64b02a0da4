"""Multi-resource replica rescheduling within and across resource pools.

Loads are 24-slot hour-of-day vectors; a node's (or pool's) load is the
peak over slots of the summed replica vectors. Balancing targets the pool's
own utilization pair (R, S) and scores a node by its L2 distance from it.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

from .domain import HOURS

log = logging.getLogger(__name__)

DIMENSIONS = ("ru", "storage")
DEFAULT_THETA = 0.05
DEFAULT_WRITE_WEIGHT = 1.5
INTER_POOL_TRIGGER = 0.15


class SnapshotError(ValueError):
    pass


def replica_load(samples, start_hour: int = 0) -> np.ndarray:
    """Hour-of-day load vector: per slot, the max hourly average over up to 7 days.

    ``samples`` are consecutive hourly averages, the first one falling in
    hour-of-day ``start_hour``. NaN marks a missing sample and counts as 0.
    """
    x = np.nan_to_num(np.asarray(samples, dtype=float)[-7 * HOURS:], nan=0.0)
    out = np.zeros(HOURS)
    if len(x):
        slots = (start_hour + np.arange(len(x))) % HOURS
        np.maximum.at(out, slots, x)
    return out


def ru_load_from_traffic(read_ru, write_ru, hit_ratio, write_weight: float = DEFAULT_WRITE_WEIGHT):
    """RU load series from read RU, write RU and the cache hit ratio."""
    read_ru = np.asarray(read_ru, dtype=float)
    return read_ru * (1.0 - np.asarray(hit_ratio, dtype=float)) + write_weight * np.asarray(write_ru, dtype=float)


def peak_load(vectors: np.ndarray) -> float:
    """max over slots of the summed vectors (rows are replicas)."""
    v = np.asarray(vectors, dtype=float)
    if v.ndim == 1:
        return float(v.max(initial=0.0))
    return float(v.sum(axis=0).max(initial=0.0)) if len(v) else 0.0


@dataclass(frozen=True)
class OptimalLoad:
    r: float
    s: float


def loss(ru_util: float, sto_util: float, target: OptimalLoad) -> float:
    return math.hypot(ru_util - target.r, sto_util - target.s)


@dataclass
class NodeLoad:
    node_id: str
    ru: float
    storage: float
    ru_capacity: float
    storage_capacity: float

    @property
    def ru_util(self) -> float:
        return self.ru / self.ru_capacity

    @property
    def storage_util(self) -> float:
        return self.storage / self.storage_capacity


def node_loss(node: NodeLoad, target: OptimalLoad) -> float:
    if node.ru_capacity <= 0 or node.storage_capacity <= 0:
        raise ValueError("node capacities must be positive")
    return loss(node.ru_util, node.storage_util, target)


@dataclass
class Migration:
    replica: str
    src: str
    dst: str
    gain: float
    dimension: str = "ru"

    def as_record(self) -> dict:
        return {"replica": self.replica, "src": self.src, "dst": self.dst,
                "gain": self.gain, "dimension": self.dimension}


@dataclass
class MigrationPlan:
    moves: list = field(default_factory=list)

    def __len__(self):
        return len(self.moves)

    def __iter__(self):
        return iter(self.moves)


class Pool:
    """Array-backed snapshot of one resource pool used by the planners."""

    def __init__(self, pool_id, node_ids, ru_cap, sto_cap, replica_ids, tenants, partitions,
                 replica_node, ru_vec, sto_vec, migrating=None):
        self.pool_id = pool_id
        self.node_ids = list(node_ids)
        self.node_index = {n: i for i, n in enumerate(self.node_ids)}
        self.ru_cap = np.asarray(ru_cap, dtype=float)
        self.sto_cap = np.asarray(sto_cap, dtype=float)
        self.replica_ids = list(replica_ids)
        self.tenants = list(tenants)
        self.partitions = list(partitions)
        self.replica_node = np.asarray(replica_node, dtype=np.int64)
        self.ru_vec = np.asarray(ru_vec, dtype=float).reshape(len(self.replica_ids), HOURS)
        self.sto_vec = np.asarray(sto_vec, dtype=float).reshape(len(self.replica_ids), HOURS)
        n = len(self.node_ids)
        self.migrating = np.zeros(n, dtype=bool) if migrating is None else np.asarray(migrating, dtype=bool)
        if np.any(self.ru_cap <= 0) or np.any(self.sto_cap <= 0):
            raise SnapshotError("node capacities must be positive")
        self._rebuild()

    def _rebuild(self) -> None:
        n = len(self.node_ids)
        self.node_ru = np.zeros((n, HOURS))
        self.node_sto = np.zeros((n, HOURS))
        np.add.at(self.node_ru, self.replica_node, self.ru_vec)
        np.add.at(self.node_sto, self.replica_node, self.sto_vec)
        self.tenant_counts: dict[str, np.ndarray] = {}
        self.partition_nodes: dict[str, set] = {}
        self.node_replicas: list[list[int]] = [[] for _ in range(n)]
        for r, (t, p, node) in enumerate(zip(self.tenants, self.partitions, self.replica_node)):
            self.tenant_counts.setdefault(t, np.zeros(n, dtype=np.int64))[node] += 1
            self.partition_nodes.setdefault(p, set()).add(int(node))
            self.node_replicas[node].append(r)

    # ---- snapshot IO --------------------------------------------------
    @classmethod
    def from_snapshot(cls, snap: dict) -> "Pool":
        try:
            nodes = snap["nodes"]
            reps = snap["replicas"]
            ids = [n["id"] for n in nodes]
            index = {n: i for i, n in enumerate(ids)}
            if len(index) != len(ids):
                raise SnapshotError("duplicate node ids")
            rn = []
            for r in reps:
                if r["node"] not in index:
                    raise SnapshotError(f"replica {r['id']} on unknown node {r['node']}")
                if len(r["ru"]) != HOURS or len(r["storage"]) != HOURS:
                    raise SnapshotError(f"replica {r['id']} vectors must have {HOURS} slots")
                rn.append(index[r["node"]])
            return cls(
                snap.get("pool_id", "pool"), ids,
                [n["ru_capacity"] for n in nodes], [n["storage_capacity"] for n in nodes],
                [r["id"] for r in reps], [r["tenant"] for r in reps],
                [r.get("partition", r["id"]) for r in reps], rn,
                np.array([r["ru"] for r in reps], dtype=float).reshape(-1, HOURS),
                np.array([r["storage"] for r in reps], dtype=float).reshape(-1, HOURS),
                [bool(n.get("migrating", False)) for n in nodes],
            )
        except KeyError as exc:
            raise SnapshotError(f"missing field {exc.args[0]!r}") from None

    def to_snapshot(self) -> dict:
        return {
            "pool_id": self.pool_id,
            "nodes": [{"id": n, "ru_capacity": float(self.ru_cap[i]),
                       "storage_capacity": float(self.sto_cap[i])}
                      for i, n in enumerate(self.node_ids)],
            "replicas": [{"id": rid, "tenant": self.tenants[r], "partition": self.partitions[r],
                          "node": self.node_ids[self.replica_node[r]],
                          "ru": self.ru_vec[r].tolist(), "storage": self.sto_vec[r].tolist()}
                         for r, rid in enumerate(self.replica_ids)],
        }

    @classmethod
    def from_world(cls, world, pool_id: str) -> "Pool":
        node_ids = list(world.pools[pool_id].node_ids)
        index = {n: i for i, n in enumerate(node_ids)}
        reps = [r for r in world.replicas.values() if r.node_id in index]
        reps.sort(key=lambda r: r.id)
        return cls(
            pool_id, node_ids,
            [world.nodes[n].ru_capacity for n in node_ids],
            [world.nodes[n].storage_capacity for n in node_ids],
            [r.id for r in reps], [r.tenant_id for r in reps], [r.partition_id for r in reps],
            [index[r.node_id] for r in reps],
            np.array([r.ru_load_vector for r in reps]).reshape(-1, HOURS),
            np.array([r.storage_load_vector for r in reps]).reshape(-1, HOURS),
            [world.nodes[n].is_migrating for n in node_ids],
        )

    def copy(self) -> "Pool":
        return Pool(self.pool_id, self.node_ids, self.ru_cap, self.sto_cap, self.replica_ids,
                    self.tenants, self.partitions, self.replica_node.copy(), self.ru_vec,
                    self.sto_vec, self.migrating.copy())

    # ---- loads --------------------------------------------------------
    def ru_util(self) -> np.ndarray:
        return self.node_ru.max(axis=1) / self.ru_cap

    def sto_util(self) -> np.ndarray:
        return self.node_sto.max(axis=1) / self.sto_cap

    def utils(self, dimension: str) -> np.ndarray:
        return self.ru_util() if dimension == "ru" else self.sto_util()

    def target(self) -> OptimalLoad:
        if not self.node_ids:
            return OptimalLoad(0.0, 0.0)
        return OptimalLoad(float(self.node_ru.sum(axis=0).max()) / float(self.ru_cap.sum()),
                           float(self.node_sto.sum(axis=0).max()) / float(self.sto_cap.sum()))

    def node_load(self, i: int) -> NodeLoad:
        return NodeLoad(self.node_ids[i], float(self.node_ru[i].max()), float(self.node_sto[i].max()),
                        float(self.ru_cap[i]), float(self.sto_cap[i]))

    def losses(self, target: OptimalLoad | None = None) -> np.ndarray:
        t = target or self.target()
        return np.hypot(self.ru_util() - t.r, self.sto_util() - t.s)

    def replica_index(self, replica_id: str) -> int:
        return self.replica_ids.index(replica_id)

    # ---- mutation -----------------------------------------------------
    def move(self, r: int, dst: int) -> None:
        src = int(self.replica_node[r])
        if src == dst:
            return
        self.node_ru[src] -= self.ru_vec[r]
        self.node_sto[src] -= self.sto_vec[r]
        self.node_ru[dst] += self.ru_vec[r]
        self.node_sto[dst] += self.sto_vec[r]
        counts = self.tenant_counts[self.tenants[r]]
        counts[src] -= 1
        counts[dst] += 1
        nodes = self.partition_nodes[self.partitions[r]]
        nodes.discard(src)
        nodes.add(dst)
        self.node_replicas[src].remove(r)
        self.node_replicas[dst].append(r)
        self.replica_node[r] = dst

    def std(self, dimension: str) -> float:
        return float(np.std(self.utils(dimension)))

    def var(self, dimension: str) -> float:
        return float(np.var(self.utils(dimension)))


def migration_gain(pool: Pool, r: int, dst: int, target: OptimalLoad | None = None) -> float:
    """Reduction of max(L(src), L(dst)) when replica ``r`` moves to ``dst``."""
    t = target or pool.target()
    src = int(pool.replica_node[r])
    if src == dst:
        raise ValueError("destination equals source")

    def l(ru, sto, i):
        return loss(ru.max() / pool.ru_cap[i], sto.max() / pool.sto_cap[i], t)

    before = max(l(pool.node_ru[src], pool.node_sto[src], src), l(pool.node_ru[dst], pool.node_sto[dst], dst))
    after = max(l(pool.node_ru[src] - pool.ru_vec[r], pool.node_sto[src] - pool.sto_vec[r], src),
                l(pool.node_ru[dst] + pool.ru_vec[r], pool.node_sto[dst] + pool.sto_vec[r], dst))
    return float(before - after)


def divide_nodes(utils, r_target: float, theta: float = DEFAULT_THETA):
    """Split node indices into low / medium / high load sets."""
    if not 0 < theta < 1:
        raise ValueError("theta must lie in (0, 1)")
    low, mid, high = [], [], []
    for i, u in enumerate(utils):
        if u <= r_target - theta:
            low.append(i)
        elif u <= r_target:
            mid.append(i)
        else:
            high.append(i)
    return low, mid, high


def _balance_ok(counts: np.ndarray, src: int, dsts: np.ndarray) -> np.ndarray:
    """Whether moving one of the tenant's replicas src->dst keeps its count spread."""
    before = int(counts.max() - counts.min())
    c = counts.copy()
    c[src] -= 1
    cmax = c.max()
    cmin = c.min()
    n_min = int((c == cmin).sum())
    after_max = np.maximum(cmax, c[dsts] + 1)
    only_min = (c[dsts] == cmin) & (n_min == 1)
    if len(c) > 1:
        second = np.partition(c, 1)[1]
    else:
        second = cmin + 1
    after_min = np.where(only_min, np.minimum(cmin + 1, second), cmin)
    return (after_max - after_min) <= max(1, before)


def candidate_mask(pool: Pool, r: int, dsts: np.ndarray, dimension: str, target: OptimalLoad) -> np.ndarray:
    """CanPlace for every destination in ``dsts``.

    A destination must not already hold a replica of the same partition,
    must keep its storage peak within capacity, must stay at or below the
    pool target in ``dimension`` (i.e. out of the high-load set), and the
    move must not widen the tenant's replica-count spread beyond one.
    """
    src = int(pool.replica_node[r])
    ok = dsts != src
    taken = pool.partition_nodes[pool.partitions[r]]
    if taken:
        ok &= ~np.isin(dsts, list(taken))
    sto_after = (pool.node_sto[dsts] + pool.sto_vec[r]).max(axis=1)
    ok &= sto_after <= pool.sto_cap[dsts] + 1e-9
    if dimension == "ru":
        util_after = (pool.node_ru[dsts] + pool.ru_vec[r]).max(axis=1) / pool.ru_cap[dsts]
        ok &= util_after <= target.r
    else:
        ok &= sto_after / pool.sto_cap[dsts] <= target.s
    ok &= _balance_ok(pool.tenant_counts[pool.tenants[r]], src, dsts)
    return ok


def _gains(pool: Pool, r: int, dsts: np.ndarray, t: OptimalLoad) -> np.ndarray:
    src = int(pool.replica_node[r])
    rv, sv = pool.ru_vec[r], pool.sto_vec[r]

    def l(ru_peak, sto_peak, ru_cap, sto_cap):
        return np.hypot(ru_peak / ru_cap - t.r, sto_peak / sto_cap - t.s)

    l_src = l(pool.node_ru[src].max(), pool.node_sto[src].max(), pool.ru_cap[src], pool.sto_cap[src])
    l_src_after = l((pool.node_ru[src] - rv).max(), (pool.node_sto[src] - sv).max(),
                    pool.ru_cap[src], pool.sto_cap[src])
    l_dst = l(pool.node_ru[dsts].max(axis=1), pool.node_sto[dsts].max(axis=1),
              pool.ru_cap[dsts], pool.sto_cap[dsts])
    l_dst_after = l((pool.node_ru[dsts] + rv).max(axis=1), (pool.node_sto[dsts] + sv).max(axis=1),
                    pool.ru_cap[dsts], pool.sto_cap[dsts])
    return np.maximum(l_src, l_dst) - np.maximum(l_src_after, l_dst_after)


def intra_pool_reschedule(pool: Pool, theta: float = DEFAULT_THETA,
                          dimensions: Iterable[str] = DIMENSIONS, apply: bool = False) -> MigrationPlan:
    """One planning round over each dimension (RU first).

    For every non-migrating high-load node, pick the (replica, low-load
    destination) pair with the largest positive gain, then mark both nodes
    as migrating. Planning works on a copy unless ``apply`` is set, in which
    case ``pool`` ends up with the moves executed and flags raised.
    """
    work = pool if apply else pool.copy()
    target = work.target()
    plan = MigrationPlan()
    for dim in dimensions:
        utils = work.utils(dim)
        level = target.r if dim == "ru" else target.s
        low, _, high = divide_nodes(utils, level, theta)
        low = np.asarray(low, dtype=np.int64)
        for src in high:
            if work.migrating[src]:
                continue
            dsts = low[~work.migrating[low]] if len(low) else low
            if not len(dsts):
                break
            best = None  # (gain, dst_util, dst, r)
            cur = work.utils(dim)
            for r in list(work.node_replicas[src]):
                mask = candidate_mask(work, r, dsts, dim, target)
                if not mask.any():
                    continue
                cand = dsts[mask]
                g = _gains(work, r, cand, target)
                order = np.lexsort((cand, cur[cand], -g))
                j = order[0]
                key = (float(g[j]), float(cur[cand[j]]), int(cand[j]))
                if best is None or key[0] > best[0] or (
                        key[0] == best[0] and (key[1], key[2]) < (best[1], best[2])):
                    best = (*key, r)
            if best is not None and best[0] > 0:
                gain, _, dst, r = best
                plan.moves.append(Migration(work.replica_ids[r], work.node_ids[src],
                                            work.node_ids[dst], gain, dim))
                work.move(r, dst)
                work.migrating[src] = True
                work.migrating[dst] = True
    return plan


def apply_plan(pool: Pool, plan: MigrationPlan) -> None:
    for m in plan:
        pool.move(pool.replica_index(m.replica), pool.node_index[m.dst])


def phase1_replica_balance(pool: Pool, apply: bool = False) -> MigrationPlan:
    """Even out each tenant's replica count across nodes (spread <= 1)."""
    work = pool if apply else pool.copy()
    plan = MigrationPlan()
    target = work.target()
    n = len(work.node_ids)
    if n < 2:
        return plan
    for tenant in sorted(work.tenant_counts):
        counts = work.tenant_counts[tenant]
        guard = 0
        while counts.max() - counts.min() > 1 and guard < 10 * len(work.replica_ids):
            guard += 1
            src = int(np.argmax(counts))
            order = np.argsort(counts, kind="stable")
            moved = False
            for dst in order:
                dst = int(dst)
                if counts[dst] + 1 >= counts[src]:
                    break
                reps = [r for r in work.node_replicas[src] if work.tenants[r] == tenant
                        and dst not in work.partition_nodes[work.partitions[r]]
                        and (work.node_sto[dst] + work.sto_vec[r]).max() <= work.sto_cap[dst] + 1e-9]
                if not reps:
                    continue
                gains = [migration_gain(work, r, dst, target) for r in reps]
                r = reps[int(np.argmax(gains))]
                plan.moves.append(Migration(work.replica_ids[r], work.node_ids[src], work.node_ids[dst],
                                            float(max(gains)), "replica_count"))
                work.move(r, dst)
                moved = True
                break
            if not moved:
                log.warning("tenant %s: replica counts cannot be balanced further", tenant)
                break
    return plan


@dataclass
class RoundStats:
    iteration: int
    moves: int
    max_loss: float
    ru_std: float
    storage_var: float


def converge(pool: Pool, max_iterations: int = 200, theta: float = DEFAULT_THETA,
             audit: bool = True) -> tuple[MigrationPlan, list[RoundStats]]:
    """Run planning rounds, executing each round's moves, until nothing moves.

    Every round completes its migrations before the next starts. With
    ``audit`` set, each move's gain is re-checked against the recomputed
    losses and the pool's max loss must never increase.
    """
    target = pool.target()
    history = [RoundStats(0, 0, float(pool.losses(target).max(initial=0.0)), pool.std("ru"), pool.var("storage"))]
    total = MigrationPlan()
    for it in range(1, max_iterations + 1):
        pool.migrating[:] = False
        before = pool.copy() if audit else None
        plan = intra_pool_reschedule(pool, theta, apply=True)
        if audit:
            _audit_round(before, pool, plan, target)
        pool.migrating[:] = False
        history.append(RoundStats(it, len(plan), float(pool.losses(target).max(initial=0.0)),
                                  pool.std("ru"), pool.var("storage")))
        if audit and history[-1].max_loss > history[-2].max_loss + 1e-12:
            raise AssertionError(f"max node loss increased in round {it}")
        total.moves.extend(plan.moves)
        if not plan.moves:
            break
    return total, history


def _audit_round(before: Pool, after: Pool, plan: MigrationPlan, target: OptimalLoad) -> None:
    lb = before.losses(target)
    la = after.losses(target)
    for m in plan:
        s, d = before.node_index[m.src], before.node_index[m.dst]
        realised = max(lb[s], lb[d]) - max(la[s], la[d])
        if abs(realised - m.gain) > 1e-9:
            raise AssertionError(f"gain mismatch for {m.replica}: planned {m.gain}, realised {realised}")


# ---- inter-pool -------------------------------------------------------

@dataclass
class InterPoolResult:
    moved_nodes: list = field(default_factory=list)  # (node_id, from_pool, to_pool)
    drain_plan: MigrationPlan = field(default_factory=MigrationPlan)
    follow_up: dict = field(default_factory=dict)  # pool_id -> MigrationPlan
    skipped: list = field(default_factory=list)
    pools: dict = field(default_factory=dict)  # pool_id -> Pool after rebalancing


def _pool_r(pool: Pool) -> float:
    return pool.target().r


def _subpool(pool: Pool, keep: list[int], extra_nodes: list[tuple] = ()) -> Pool:
    """Pool restricted to node indices ``keep`` (which must hold every replica), plus new empty nodes."""
    remap = {old: new for new, old in enumerate(keep)}
    node_ids = [pool.node_ids[i] for i in keep] + [e[0] for e in extra_nodes]
    ru_cap = [pool.ru_cap[i] for i in keep] + [e[1] for e in extra_nodes]
    sto_cap = [pool.sto_cap[i] for i in keep] + [e[2] for e in extra_nodes]
    return Pool(pool.pool_id, node_ids, ru_cap, sto_cap, pool.replica_ids, pool.tenants,
                pool.partitions, [remap[int(i)] for i in pool.replica_node], pool.ru_vec, pool.sto_vec)


def inter_pool_reschedule(pools: list[Pool], trigger: float = INTER_POOL_TRIGGER,
                          theta: float = DEFAULT_THETA, rounds: int = 50) -> InterPoolResult:
    """Move nodes from the least to the most utilized pool.

    Picks the fewest low-utilization nodes of the low pool whose transfer is
    estimated to close half of the RU utilization gap, drains them inside
    the low pool, hands the emptied nodes to the high pool and rebalances
    both pools.
    """
    result = InterPoolResult(pools={p.pool_id: p for p in pools})
    if len(pools) < 2:
        return result
    ordered = sorted(pools, key=_pool_r)
    low, high = ordered[0], ordered[-1]
    gap = _pool_r(high) - _pool_r(low)
    if gap < trigger:
        return result

    low_load = float(low.node_ru.sum(axis=0).max())
    high_load = float(high.node_ru.sum(axis=0).max())
    by_util = [int(i) for i in np.argsort(low.ru_util(), kind="stable")]
    chosen, cap = [], 0.0
    for i in by_util[:-1]:
        chosen.append(i)
        cap += float(low.ru_cap[i])
        r_low = low_load / (float(low.ru_cap.sum()) - cap)
        r_high = high_load / (float(high.ru_cap.sum()) + cap)
        if r_high - r_low <= gap / 2:
            break

    work = low.copy()
    drained = []
    for i in chosen:
        keep = [j for j in range(len(work.node_ids)) if j != i and j not in drained and j not in chosen]
        trial = work.copy()
        moves = []
        feasible = True
        for r in sorted(list(trial.node_replicas[i]), key=lambda r: -trial.sto_vec[r].max()):
            k = np.asarray(keep, dtype=np.int64)
            free = ~np.isin(k, list(trial.partition_nodes[trial.partitions[r]]))
            sto_ok = (trial.node_sto[k] + trial.sto_vec[r]).max(axis=1) <= trial.sto_cap[k] + 1e-9
            ok = k[free & sto_ok]
            if not len(ok):
                feasible = False
                break
            dst = int(ok[np.argmin(trial.ru_util()[ok])])
            moves.append(Migration(trial.replica_ids[r], trial.node_ids[i], trial.node_ids[dst], 0.0, "drain"))
            trial.move(r, dst)
        if feasible:
            work = trial
            drained.append(i)
            result.drain_plan.moves.extend(moves)
        else:
            log.warning("pool %s: node %s cannot be drained; skipped", low.pool_id, low.node_ids[i])
            result.skipped.append(low.node_ids[i])
    if not drained:
        return result

    keep = [j for j in range(len(work.node_ids)) if j not in drained]
    new_low = _subpool(work, keep)
    extra = [(work.node_ids[i], float(work.ru_cap[i]), float(work.sto_cap[i])) for i in drained]
    new_high = _subpool(high.copy(), list(range(len(high.node_ids))), extra)
    result.moved_nodes = [(work.node_ids[i], low.pool_id, high.pool_id) for i in drained]
    for p in (new_low, new_high):
        plan, _ = converge(p, rounds, theta, audit=False)
        result.follow_up[p.pool_id] = plan
        result.pools[p.pool_id] = p
    return result


# ---- snapshot files ---------------------------------------------------

def load_snapshot(path) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SnapshotError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise SnapshotError(f"{path}: top level must be an object")
    return data


def generate_skewed_pool(nodes: int = 100, tenants: int = 60, seed: int = 7,
                         replicas_per_tenant: tuple[int, int] = (6, 60),
                         sigma: float = 1.0, placement_skew: float = 1.5) -> dict:
    """Synthetic pool with lognormal replica loads and a skewed initial layout.

    Tenants differ in RU and storage intensity (independent lognormal
    scales) and diurnal phase; initial placement prefers a lognormally
    weighted subset of nodes, so some nodes start far hotter than others.
    Each tenant's replicas sit on distinct nodes.
    """
    rng = np.random.default_rng(seed)
    hours = np.arange(HOURS)
    node_weight = rng.lognormal(0.0, placement_skew, nodes)
    node_weight /= node_weight.sum()
    reps = []
    for t in range(tenants):
        count = int(rng.integers(replicas_per_tenant[0], replicas_per_tenant[1] + 1))
        count = min(count, nodes)
        ru_scale = rng.lognormal(0.0, sigma)
        sto_scale = rng.lognormal(0.0, sigma)
        phase = rng.uniform(0, HOURS)
        amp = rng.uniform(0.1, 0.6)
        shape = 1.0 + amp * np.cos(2 * np.pi * (hours - phase) / HOURS)
        chosen = rng.choice(nodes, size=count, replace=False, p=node_weight)
        for j, node in enumerate(chosen):
            f = rng.lognormal(0.0, 0.3)
            reps.append({
                "id": f"t{t}/p{j}/r0", "tenant": f"t{t}", "partition": f"t{t}/p{j}",
                "node": f"dn{node:03d}",
                "ru": np.round(ru_scale * f * shape, 4).tolist(),
                "storage": np.round(np.full(HOURS, sto_scale * f), 4).tolist(),
            })
    pool_ru = np.zeros(HOURS)
    pool_sto = np.zeros(HOURS)
    for r in reps:
        pool_ru += np.asarray(r["ru"])
        pool_sto += np.asarray(r["storage"])
    # size capacities so the pool sits near 50% RU and 55% storage utilization
    ru_cap = float(np.round(pool_ru.max() / (0.5 * nodes), 4))
    sto_cap = float(np.round(pool_sto.max() / (0.55 * nodes), 4))
    return {
        "pool_id": "pool-skewed",
        "generator": {"name": "generate_skewed_pool", "nodes": nodes, "tenants": tenants, "seed": seed,
                      "replicas_per_tenant": list(replicas_per_tenant), "sigma": sigma,
                      "placement_skew": placement_skew},
        "nodes": [{"id": f"dn{i:03d}", "ru_capacity": ru_cap, "storage_capacity": sto_cap}
                  for i in range(nodes)],
        "replicas": reps,
    }
