"""Entity model: tenants, partitions, replicas, data nodes and resource pools.

``World`` owns every entity and the placement bookkeeping the other modules
read. It is mutated only from the simulation timeline (or from offline
tools), never concurrently.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping

import numpy as np

from .hashing import HASH_SPACE, hash64

HOURS = 24
DEFAULT_REPLICAS = 3
LARGE_REQUEST_THRESHOLD = 4096

READ_KINDS = frozenset({"Get", "HLen", "HGetAll"})
WRITE_KINDS = frozenset({"Put"})


class TopologyError(ValueError):
    """Raised when a topology description is internally inconsistent.

    ``problems`` lists every offending field as ``"path: reason"``.
    """

    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__("invalid topology: " + "; ".join(self.problems))


@dataclass
class Tenant:
    id: str
    pool_id: str
    ru_quota: float
    storage_quota: float
    partition_count: int
    proxy_count: int = 1
    proxy_group_count: int = 1
    replica_count: int = DEFAULT_REPLICAS
    partition_quota: float = field(default=0.0)

    def __post_init__(self):
        if not self.partition_quota:
            self.partition_quota = self.ru_quota / self.partition_count

    @property
    def proxy_quota(self) -> float:
        return self.ru_quota / self.proxy_count

    @property
    def group_size(self) -> int:
        return self.proxy_count // self.proxy_group_count

    def set_quota(self, ru_quota: float, partition_count: int | None = None,
                  partition_quota: float | None = None) -> None:
        """Change Q_T (and optionally N); Q_P follows unless given explicitly."""
        self.ru_quota = float(ru_quota)
        if partition_count is not None:
            self.partition_count = int(partition_count)
        if partition_quota is None:
            partition_quota = self.ru_quota / self.partition_count
        self.partition_quota = float(partition_quota)


@dataclass
class Partition:
    id: str
    tenant_id: str
    key_range: tuple[int, int]
    quota: float
    replica_ids: list[str] = field(default_factory=list)

    @property
    def leader(self) -> str:
        return self.replica_ids[0]


@dataclass
class Replica:
    id: str
    partition_id: str
    tenant_id: str
    node_id: str
    ru_load_vector: np.ndarray = field(default_factory=lambda: np.zeros(HOURS))
    storage_load_vector: np.ndarray = field(default_factory=lambda: np.zeros(HOURS))

    @property
    def storage_bytes(self) -> float:
        return float(np.max(self.storage_load_vector)) if len(self.storage_load_vector) else 0.0


@dataclass
class DataNode:
    id: str
    pool_id: str
    ru_capacity: float
    storage_capacity: float
    replica_ids: list[str] = field(default_factory=list)
    is_migrating: bool = False


@dataclass
class ResourcePool:
    id: str
    node_ids: list[str] = field(default_factory=list)
    ru_capacity: float = 0.0
    storage_capacity: float = 0.0


@dataclass
class Request:
    id: int
    tenant_id: str
    partition_id: str
    kind: str
    key: int
    value_size: int
    arrival_time: int
    size_class: str = "small"
    charged_ru: float = 0.0

    @property
    def is_read(self) -> bool:
        return self.kind in READ_KINDS


def size_class_of(payload: float, threshold: int = LARGE_REQUEST_THRESHOLD) -> str:
    return "large" if payload >= threshold else "small"


def split_range(key_range: tuple[int, int]) -> tuple[tuple[int, int], tuple[int, int]]:
    lo, hi = key_range
    mid = lo + (hi - lo) // 2
    return (lo, mid), (mid, hi)


class World:
    """All entities plus placement indexes."""

    def __init__(self, hash_seed: int = 0):
        self.hash_seed = hash_seed
        self.tenants: dict[str, Tenant] = {}
        self.partitions: dict[str, Partition] = {}
        self.replicas: dict[str, Replica] = {}
        self.nodes: dict[str, DataNode] = {}
        self.pools: dict[str, ResourcePool] = {}
        # per tenant: sorted range starts and matching partition ids
        self._starts: dict[str, list[int]] = {}
        self._pids: dict[str, list[str]] = {}
        self._split_seq = 0

    # ---- indexes -------------------------------------------------------
    def reindex_tenant(self, tenant_id: str) -> None:
        parts = sorted((p for p in self.partitions.values() if p.tenant_id == tenant_id),
                       key=lambda p: p.key_range[0])
        self._starts[tenant_id] = [p.key_range[0] for p in parts]
        self._pids[tenant_id] = [p.id for p in parts]

    def recompute_pool(self, pool_id: str) -> None:
        pool = self.pools[pool_id]
        pool.ru_capacity = sum(self.nodes[n].ru_capacity for n in pool.node_ids)
        pool.storage_capacity = sum(self.nodes[n].storage_capacity for n in pool.node_ids)

    # ---- queries -------------------------------------------------------
    def tenant_partitions(self, tenant_id: str) -> list[Partition]:
        return [self.partitions[pid] for pid in self._pids[tenant_id]]

    def partition_of(self, tenant_id: str, key: int | str | bytes) -> Partition:
        """Partition owning ``key``: the one whose hash-slot range contains hash(key)."""
        h = hash64(key, self.hash_seed)
        i = bisect.bisect_right(self._starts[tenant_id], h) - 1
        return self.partitions[self._pids[tenant_id][i]]

    def leader_node(self, partition_id: str) -> str:
        return self.replicas[self.partitions[partition_id].leader].node_id

    def node_replicas(self, node_id: str) -> list[Replica]:
        return [self.replicas[r] for r in self.nodes[node_id].replica_ids]

    def node_quota_sum(self, node_id: str) -> float:
        """Sum of partition quotas of the partitions led from ``node_id``."""
        total = 0.0
        for rid in self.nodes[node_id].replica_ids:
            rep = self.replicas[rid]
            part = self.partitions[rep.partition_id]
            if part.leader == rid:
                total += part.quota
        return total

    def tenant_replica_counts(self, tenant_id: str, pool_id: str) -> dict[str, int]:
        counts = {n: 0 for n in self.pools[pool_id].node_ids}
        for rep in self.replicas.values():
            if rep.tenant_id == tenant_id and rep.node_id in counts:
                counts[rep.node_id] += 1
        return counts

    # ---- mutations -----------------------------------------------------
    def move_replica(self, replica_id: str, dst_node: str) -> None:
        rep = self.replicas[replica_id]
        self.nodes[rep.node_id].replica_ids.remove(replica_id)
        self.nodes[dst_node].replica_ids.append(replica_id)
        rep.node_id = dst_node

    def reassign_node(self, node_id: str, dst_pool: str) -> None:
        node = self.nodes[node_id]
        if node.replica_ids:
            raise ValueError(f"node {node_id} still holds replicas")
        src = node.pool_id
        self.pools[src].node_ids.remove(node_id)
        self.pools[dst_pool].node_ids.append(node_id)
        node.pool_id = dst_pool
        self.recompute_pool(src)
        self.recompute_pool(dst_pool)

    def set_partition_quotas(self, tenant_id: str) -> None:
        q = self.tenants[tenant_id].partition_quota
        for p in self.tenant_partitions(tenant_id):
            p.quota = q

    def split_partition(self, partition_id: str) -> tuple[Partition, Partition]:
        """Split at the range midpoint; both halves keep the parent's nodes."""
        parent = self.partitions.pop(partition_id)
        lo_range, hi_range = split_range(parent.key_range)
        halves = []
        for key_range in (lo_range, hi_range):
            self._split_seq += 1
            pid = f"{parent.id}.s{self._split_seq}"
            part = Partition(pid, parent.tenant_id, key_range, parent.quota / 2.0)
            for j, old_rid in enumerate(parent.replica_ids):
                old = self.replicas[old_rid]
                rid = f"{pid}.r{j}"
                rep = Replica(rid, pid, parent.tenant_id, old.node_id,
                              old.ru_load_vector / 2.0, old.storage_load_vector / 2.0)
                self.replicas[rid] = rep
                self.nodes[old.node_id].replica_ids.append(rid)
                part.replica_ids.append(rid)
            self.partitions[pid] = part
            halves.append(part)
        for old_rid in parent.replica_ids:
            old = self.replicas.pop(old_rid)
            self.nodes[old.node_id].replica_ids.remove(old_rid)
        self.reindex_tenant(parent.tenant_id)
        return halves[0], halves[1]


def _validate(spec: Mapping[str, Any]) -> list[str]:
    problems = []
    pools = spec.get("pools") or []
    if not pools:
        problems.append("pools: at least one pool is required")
    pool_ids = set()
    for i, pool in enumerate(pools):
        pool_ids.add(pool.get("id"))
        nodes = pool.get("nodes") or []
        if not nodes:
            problems.append(f"pools[{i}].nodes: at least one node is required")
        for j, node in enumerate(nodes):
            for cap in ("ru_capacity", "storage_capacity"):
                if not node.get(cap, 0) > 0:
                    problems.append(f"pools[{i}].nodes[{j}].{cap}: must be positive")
    for i, t in enumerate(spec.get("tenants") or []):
        where = f"tenants[{i}]"
        if t.get("pool") not in pool_ids:
            problems.append(f"{where}.pool: unknown pool {t.get('pool')!r}")
        if not t.get("ru_quota", 0) > 0:
            problems.append(f"{where}.ru_quota: must be positive")
        if t.get("storage_quota", 1) <= 0:
            problems.append(f"{where}.storage_quota: must be positive")
        n = t.get("partition_count", 1)
        if not isinstance(n, int) or n < 1:
            problems.append(f"{where}.partition_count: must be an integer >= 1")
        proxies = t.get("proxy_count", 1)
        groups = t.get("proxy_group_count", 1)
        if not isinstance(proxies, int) or proxies < 1:
            problems.append(f"{where}.proxy_count: must be an integer >= 1")
        elif not isinstance(groups, int) or groups < 1:
            problems.append(f"{where}.proxy_group_count: must be an integer >= 1")
        elif proxies % groups:
            problems.append(f"{where}.proxy_group_count: {groups} does not divide proxy_count {proxies}")
        if t.get("replica_count", DEFAULT_REPLICAS) < 1:
            problems.append(f"{where}.replica_count: must be >= 1")
    return problems


def build_topology(spec: Mapping[str, Any], hash_seed: int = 0) -> World:
    """Build a World from a plain description.

    ``spec`` has ``pools`` (each with ``id`` and ``nodes``: id, ru_capacity,
    storage_capacity) and ``tenants`` (id, pool, ru_quota, storage_quota,
    partition_count, proxy_count, proxy_group_count, replica_count).
    Replicas are placed round-robin over the pool's nodes with one cursor
    per pool, so each tenant's replica counts differ by at most one; the
    leader (first replica) rotates with the partition index.
    """
    problems = _validate(spec)
    if problems:
        raise TopologyError(problems)
    world = World(hash_seed)
    for pool_spec in spec["pools"]:
        pool = ResourcePool(pool_spec["id"])
        world.pools[pool.id] = pool
        for nd in pool_spec["nodes"]:
            node = DataNode(nd["id"], pool.id, float(nd["ru_capacity"]), float(nd["storage_capacity"]))
            world.nodes[node.id] = node
            pool.node_ids.append(node.id)
        world.recompute_pool(pool.id)

    cursor = {pid: 0 for pid in world.pools}
    for t in spec.get("tenants") or []:
        tenant = Tenant(
            id=t["id"], pool_id=t["pool"], ru_quota=float(t["ru_quota"]),
            storage_quota=float(t.get("storage_quota", 1 << 40)),
            partition_count=int(t.get("partition_count", 1)),
            proxy_count=int(t.get("proxy_count", 1)),
            proxy_group_count=int(t.get("proxy_group_count", 1)),
            replica_count=int(t.get("replica_count", DEFAULT_REPLICAS)),
        )
        world.tenants[tenant.id] = tenant
        node_ids = world.pools[tenant.pool_id].node_ids
        n_nodes = len(node_ids)
        n_parts = tenant.partition_count
        for i in range(n_parts):
            key_range = (i * HASH_SPACE // n_parts, (i + 1) * HASH_SPACE // n_parts)
            part = Partition(f"{tenant.id}/p{i}", tenant.id, key_range, tenant.partition_quota)
            placed = []
            for j in range(tenant.replica_count):
                node_id = node_ids[cursor[tenant.pool_id] % n_nodes]
                cursor[tenant.pool_id] += 1
                rep = Replica(f"{part.id}/r{j}", part.id, tenant.id, node_id)
                world.replicas[rep.id] = rep
                world.nodes[node_id].replica_ids.append(rep.id)
                placed.append(rep.id)
            # rotate the leader so leaders do not pile up on one node
            k = i % tenant.replica_count
            part.replica_ids = placed[k:] + placed[:k]
            world.partitions[part.id] = part
        world.reindex_tenant(tenant.id)
    return world


def replica_spread(world: World, tenant_id: str, pool_id: str) -> int:
    counts = world.tenant_replica_counts(tenant_id, pool_id).values()
    return max(counts) - min(counts) if counts else 0


def iter_tenant_ids(world: World) -> Iterable[str]:
    return sorted(world.tenants)
