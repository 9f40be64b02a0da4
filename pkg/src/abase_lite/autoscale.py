"""Threshold-triggered quota scaling with partition split and downscale cooldown."""

from __future__ import annotations

from dataclasses import dataclass

UPPER_THRESHOLD = 0.85
LOWER_THRESHOLD = 0.65
TARGET_RATIO = 0.65
COOLDOWN = 7 * 24 * 3600.0
DEFAULT_UP = 5000.0
DEFAULT_LOWER = 100.0


@dataclass
class ScalingState:
    tenant_id: str
    q_t: float
    n: int
    q_p: float | None = None
    up: float = DEFAULT_UP
    lower: float = DEFAULT_LOWER
    last_scale_time: float | None = None

    def __post_init__(self):
        if self.q_p is None:
            self.q_p = self.q_t / self.n


@dataclass(frozen=True)
class ScalingDecision:
    action: str  # "none" | "scale_up" | "scale_down"
    new_q_t: float
    new_q_p: float
    new_n: int
    split_triggered: bool = False

    def as_record(self, time: float, tenant_id: str, old: ScalingState, dimension: str = "ru") -> dict:
        return {
            "time": time, "tenant": tenant_id, "dimension": dimension, "action": self.action,
            "old_q_t": old.q_t, "new_q_t": self.new_q_t, "old_q_p": old.q_p, "new_q_p": self.new_q_p,
            "old_n": old.n, "new_n": self.new_n, "split": self.split_triggered,
        }


def decide(state: ScalingState, u_max: float, now: float) -> ScalingDecision:
    if u_max < 0:
        raise ValueError("u_max must be non-negative")
    if u_max > UPPER_THRESHOLD * state.q_t:
        q_t = u_max / TARGET_RATIO
        n = state.n
        q_p = q_t / n
        split = q_p > state.up
        if split:
            n *= 2
            q_p *= 0.5
        return ScalingDecision("scale_up", q_t, q_p, n, split)
    cooled = state.last_scale_time is None or now - state.last_scale_time >= COOLDOWN
    if u_max < LOWER_THRESHOLD * state.q_t and cooled:
        q_t = u_max / TARGET_RATIO
        return ScalingDecision("scale_down", q_t, max(q_t / state.n, state.lower), state.n)
    return ScalingDecision("none", state.q_t, state.q_p, state.n)


def advance(state: ScalingState, decision: ScalingDecision, now: float) -> ScalingState:
    """State after ``decision`` takes effect (unchanged for ``none``)."""
    if decision.action == "none":
        return state
    return ScalingState(state.tenant_id, decision.new_q_t, decision.new_n, decision.new_q_p,
                        state.up, state.lower, now)


def apply(world, tenant_id: str, decision: ScalingDecision, now: float = 0.0) -> list[tuple[str, str]]:
    """Apply a decision to ``world``; returns ``[(parent, child), ...]`` for splits.

    Partition gates and proxy buckets are owned by the simulator, which
    re-reads the tenant's quotas after this call.
    """
    if decision.action == "none":
        return []
    tenant = world.tenants[tenant_id]
    created = []
    if decision.split_triggered:
        for part in list(world.tenant_partitions(tenant_id)):
            a, b = world.split_partition(part.id)
            created += [(part.id, a.id), (part.id, b.id)]
    tenant.set_quota(decision.new_q_t, decision.new_n, decision.new_q_p)
    world.set_partition_quotas(tenant_id)
    return created


def apply_storage(world, tenant_id: str, decision: ScalingDecision) -> None:
    """Storage quotas scale by the same rule but never split partitions."""
    if decision.action != "none":
        world.tenants[tenant_id].storage_quota = decision.new_q_t
