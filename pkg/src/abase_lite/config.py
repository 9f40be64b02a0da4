"""Scenario files: JSON validated into typed models, then built into simulator inputs.

Unknown keys are rejected everywhere. Validation errors carry the JSON path
of the offending value and a best-effort line number in the source text.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Annotated, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .domain import TopologyError, build_topology
from .forecast import ForecastConfig
from .ru import RuConfig
from .simkit import workload as wl
from .simkit.service import ServiceParams
from .simkit.system import NODE_TOGGLES, TENANT_TOGGLES, SimParams, TenantHistory, ToggleEvent, Toggles
from .synthetic import diurnal_growth_series, seed_replica_loads
from .wfq import CpuLimits


class ConfigError(ValueError):
    """Scenario validation failure; ``diagnostics`` holds one line per problem."""

    def __init__(self, diagnostics: list[str]):
        super().__init__("\n".join(diagnostics))
        self.diagnostics = diagnostics


class _Model(BaseModel):
    model_config = ConfigDict(extra="forbid")


# ---- topology -------------------------------------------------------------

class NodeCfg(_Model):
    id: str
    ru_capacity: float = Field(gt=0)
    storage_capacity: float = Field(gt=0)


class PoolCfg(_Model):
    id: str
    nodes: list[NodeCfg] = Field(min_length=1)


class TenantCfg(_Model):
    id: str
    pool: str
    ru_quota: float = Field(gt=0)
    storage_quota: float = Field(default=float(1 << 40), gt=0)
    partition_count: int = Field(default=1, ge=1)
    proxy_count: int = Field(default=1, ge=1)
    proxy_group_count: int = Field(default=1, ge=1)
    replica_count: int = Field(default=3, ge=1)


class TopologyCfg(_Model):
    hash_seed: int = 0
    pools: list[PoolCfg] = Field(min_length=1)
    tenants: list[TenantCfg] = Field(min_length=1)


# ---- workloads ------------------------------------------------------------

class ConstantCfg(_Model):
    kind: Literal["constant"]
    rate: float = Field(ge=0)


class BurstCfg(_Model):
    kind: Literal["burst"]
    base_rate: float = Field(ge=0)
    rate: float = Field(ge=0)
    t_start: float = Field(ge=0)
    t_end: Optional[float] = None


class DiurnalCfg(_Model):
    kind: Literal["diurnal"]
    base: float = Field(ge=0)
    amplitude: float
    period: float = Field(default=86400.0, gt=0)


class UniformKeysCfg(_Model):
    kind: Literal["uniform"]
    count: int = Field(ge=1)


class ZipfKeysCfg(_Model):
    kind: Literal["zipf"]
    s: float = Field(ge=0)
    count: int = Field(ge=1)


class HotKeysCfg(_Model):
    kind: Literal["hot_key"]
    fraction: float = Field(ge=0, le=1)
    count: int = Field(default=1, ge=1)
    keyspace: int = Field(default=10_000, ge=1)


class FixedSizeCfg(_Model):
    kind: Literal["fixed"]
    size: int = Field(ge=0)


class LognormalSizeCfg(_Model):
    kind: Literal["lognormal"]
    mu: float
    sigma: float = Field(ge=0)


Arrival = Annotated[Union[ConstantCfg, BurstCfg, DiurnalCfg], Field(discriminator="kind")]
Keys = Annotated[Union[UniformKeysCfg, ZipfKeysCfg, HotKeysCfg], Field(discriminator="kind")]
Size = Annotated[Union[FixedSizeCfg, LognormalSizeCfg], Field(discriminator="kind")]


class WorkloadCfg(_Model):
    tenant: str
    arrival: Arrival
    keys: Keys = UniformKeysCfg(kind="uniform", count=10_000)
    read_ratio: float = Field(default=1.0, ge=0, le=1)
    value_size: Size = FixedSizeCfg(kind="fixed", size=1024)
    ttl_s: Optional[float] = Field(default=None, gt=0)
    timeout_s: Optional[float] = Field(default=None, gt=0)
    target_partition: Optional[int] = Field(default=None, ge=0)
    key_offset: int = Field(default=0, ge=0)


# ---- toggles and timeline -------------------------------------------------

class TogglesCfg(_Model):
    proxy_quota: bool = True
    partition_quota: bool = True
    wfq: bool = True
    proxy_cache: bool = True
    node_cache: bool = True
    autoscaler: bool = True
    rescheduler: bool = True


class TenantTogglesCfg(_Model):
    proxy_quota: Optional[bool] = None
    partition_quota: Optional[bool] = None
    proxy_cache: Optional[bool] = None
    autoscaler: Optional[bool] = None


class TimelineEventCfg(_Model):
    at_s: float = Field(ge=0)
    toggle: Literal["proxy_quota", "partition_quota", "proxy_cache", "autoscaler"]
    value: bool
    tenant: Optional[str] = None


# ---- module overrides -----------------------------------------------------

class ServiceCfg(_Model):
    t_cpu_us: float = Field(default=20.0, ge=0)
    t_io_us: float = Field(default=200.0, ge=0)
    entry_cost_us: Optional[float] = Field(default=None, ge=0)
    entry_threads: int = Field(default=1, ge=1)


class CpuCfg(_Model):
    slots: int = Field(default=8, ge=1)
    max_reads: int = Field(default=64, ge=1)
    max_writes: int = Field(default=32, ge=1)
    write_ru_ceiling: float = Field(default=256.0, gt=0)
    tenant_share: float = Field(default=0.9, gt=0, le=1)
    concurrency_limits: bool = True
    tenant_cap: bool = True


class IoCfg(_Model):
    basic_threads: int = Field(default=4, ge=1)
    extra_threads: Optional[int] = Field(default=None, ge=0)


class RuCfg(_Model):
    unit_size: int = Field(default=2048, ge=1)
    replica_count: int = Field(default=3, ge=1)
    window_k: int = Field(default=100, ge=1)


class CacheCfg(_Model):
    proxy_cache_bytes: int = Field(default=1 << 30, ge=0)
    node_cache_bytes: int = Field(default=256 << 20, ge=0)
    refresh_window_s: float = Field(default=5.0, ge=0)
    hot_threshold: int = Field(default=3, ge=1)
    proxy_refresh: bool = True
    default_ttl_s: float = Field(default=60.0, gt=0)
    fanout_seed: int = 0x5EED


class MetaCfg(_Model):
    poll_period_s: float = Field(default=5.0, gt=0)
    directive_delay_s: float = Field(default=1.0, ge=0)


class AutoscaleCfg(_Model):
    period_s: float = Field(default=3600.0, gt=0)
    up: float = Field(default=5000.0, gt=0)
    lower: float = Field(default=100.0, ge=0)


class RescheduleCfg(_Model):
    period_s: float = Field(default=600.0, gt=0)
    theta: float = Field(default=0.05, gt=0, lt=1)
    migration_bandwidth: float = Field(default=100e6, gt=0)


class OverridesCfg(_Model):
    service: ServiceCfg = ServiceCfg()
    cpu: CpuCfg = CpuCfg()
    io: IoCfg = IoCfg()
    ru: RuCfg = RuCfg()
    cache: CacheCfg = CacheCfg()
    meta: MetaCfg = MetaCfg()
    autoscale: AutoscaleCfg = AutoscaleCfg()
    reschedule: RescheduleCfg = RescheduleCfg()


# ---- histories and replica loads -----------------------------------------

class SeriesGeneratorCfg(_Model):
    kind: Literal["diurnal_growth"]
    days: int = Field(default=30, ge=1)
    base: float = Field(ge=0)
    amplitude: float = 0.3
    growth_per_day: float = 0.0
    noise: float = Field(default=0.0, ge=0)
    seed: int = 0
    period: int = Field(default=24, ge=1)
    seasonality: Literal["additive", "multiplicative"] = "additive"


class HistoryCfg(_Model):
    usage: Union[list[float], SeriesGeneratorCfg]
    storage: Optional[Union[list[float], SeriesGeneratorCfg]] = None


class ReplicaLoadsCfg(_Model):
    kind: Literal["lognormal"]
    seed: int = 0
    sigma: float = Field(default=1.0, ge=0)
    ru_mean: float = Field(default=100.0, ge=0)
    storage_mean: float = Field(default=1e9, ge=0)


class ScenarioConfig(_Model):
    name: str
    description: str = ""
    duration_s: float = Field(gt=0)
    seed: int = 0
    topology: TopologyCfg
    workloads: list[WorkloadCfg] = []
    toggles: TogglesCfg = TogglesCfg()
    tenant_toggles: dict[str, TenantTogglesCfg] = {}
    timeline: list[TimelineEventCfg] = []
    overrides: OverridesCfg = OverridesCfg()
    histories: dict[str, HistoryCfg] = {}
    replica_loads: Optional[ReplicaLoadsCfg] = None

    @model_validator(mode="after")
    def _references(self):
        pools = {p.id for p in self.topology.pools}
        tenants = {t.id: t for t in self.topology.tenants}
        problems = []
        for i, t in enumerate(self.topology.tenants):
            if t.pool not in pools:
                problems.append(f"topology.tenants.{i}.pool: unknown pool {t.pool!r}")
        for i, w in enumerate(self.workloads):
            if w.tenant not in tenants:
                problems.append(f"workloads.{i}.tenant: unknown tenant {w.tenant!r}")
            elif w.target_partition is not None and w.target_partition >= tenants[w.tenant].partition_count:
                problems.append(f"workloads.{i}.target_partition: tenant {w.tenant!r} has "
                                f"{tenants[w.tenant].partition_count} partitions")
        for name in self.tenant_toggles:
            if name not in tenants:
                problems.append(f"tenant_toggles.{name}: unknown tenant")
        for i, ev in enumerate(self.timeline):
            if ev.tenant is not None and ev.tenant not in tenants:
                problems.append(f"timeline.{i}.tenant: unknown tenant {ev.tenant!r}")
            if ev.at_s > self.duration_s:
                problems.append(f"timeline.{i}.at_s: after the end of the run")
        for name in self.histories:
            if name not in tenants:
                problems.append(f"histories.{name}: unknown tenant")
        if problems:
            raise ValueError("; ".join(problems))
        return self


# ---- parsing --------------------------------------------------------------

def _line_of(text: str, loc) -> int | None:
    """Best-effort source line for a JSON path: follow its keys in order."""
    pos, found = 0, False
    for part in loc:
        if isinstance(part, str):
            idx = text.find(f'"{part}"', pos)
            if idx >= 0:
                pos, found = idx, True
    return text.count("\n", 0, pos) + 1 if found else None


def parse_scenario(text: str, source: str = "<scenario>") -> ScenarioConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([f"{source}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}"]) from None
    try:
        return ScenarioConfig.model_validate(data)
    except ValidationError as exc:
        out = []
        for err in exc.errors():
            loc = [p for p in err["loc"] if not (isinstance(p, str) and p in _UNION_TAGS)]
            path = ".".join(str(p) for p in loc) or "<root>"
            line = _line_of(text, loc)
            where = f"{source}:{line}" if line else source
            out.append(f"{where}: {path}: {err['msg']}")
        raise ConfigError(out) from None


_UNION_TAGS = {"constant", "burst", "diurnal", "uniform", "zipf", "hot_key", "fixed", "lognormal",
               "diurnal_growth", "list[float]", "SeriesGeneratorCfg"}


def bundled_scenarios() -> list[str]:
    root = resources.files("abase_lite") / "data" / "scenarios"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def load_scenario(path_or_name: str | Path) -> ScenarioConfig:
    """Load a scenario file, or a bundled scenario by name."""
    p = Path(path_or_name)
    if p.suffix == ".json" or p.exists():
        try:
            text = p.read_text()
        except OSError as exc:
            raise ConfigError([f"{p}: cannot read: {exc.strerror}"]) from None
        return parse_scenario(text, str(p))
    name = str(path_or_name)
    if name not in bundled_scenarios():
        raise ConfigError([f"{name}: no such file or bundled scenario "
                           f"(bundled: {', '.join(bundled_scenarios())})"])
    text = (resources.files("abase_lite") / "data" / "scenarios" / f"{name}.json").read_text()
    return parse_scenario(text, f"{name}.json")


def dump_scenario(cfg: ScenarioConfig) -> str:
    return json.dumps(cfg.model_dump(mode="json"), indent=2, sort_keys=False) + "\n"


# ---- building simulator inputs -------------------------------------------

@dataclass
class BuiltScenario:
    world: object
    profiles: list
    toggles: Toggles
    params: SimParams
    timeline: list
    histories: dict
    tenant_toggles: dict
    duration: float
    seed: int


def _series(spec) -> np.ndarray:
    if isinstance(spec, SeriesGeneratorCfg):
        return diurnal_growth_series(spec.days, spec.base, spec.amplitude, spec.growth_per_day,
                                     spec.noise, spec.seed, spec.period,
                                     seasonality=spec.seasonality)
    return np.asarray(spec, dtype=float)


def _profile(w: WorkloadCfg) -> wl.WorkloadProfile:
    a = w.arrival
    if isinstance(a, ConstantCfg):
        arrival = wl.Constant(a.rate)
    elif isinstance(a, BurstCfg):
        arrival = wl.Burst(a.base_rate, a.rate, a.t_start, a.t_end)
    else:
        arrival = wl.Diurnal(a.base, a.amplitude, a.period)
    k = w.keys
    if isinstance(k, UniformKeysCfg):
        keys = wl.UniformKeys(k.count)
    elif isinstance(k, ZipfKeysCfg):
        keys = wl.ZipfKeys(k.s, k.count)
    else:
        keys = wl.HotKeys(k.fraction, k.count, k.keyspace)
    s = w.value_size
    size = wl.FixedSize(s.size) if isinstance(s, FixedSizeCfg) else wl.LognormalSize(s.mu, s.sigma)
    target = None if w.target_partition is None else f"{w.tenant}/p{w.target_partition}"
    return wl.WorkloadProfile(w.tenant, arrival, keys, w.read_ratio, size, w.ttl_s, w.timeout_s,
                              target, w.key_offset)


def build(cfg: ScenarioConfig, seed: int | None = None) -> BuiltScenario:
    topo = cfg.topology.model_dump()
    try:
        world = build_topology(topo, hash_seed=cfg.topology.hash_seed)
    except TopologyError as exc:
        raise ConfigError([f"topology: {p}" for p in exc.problems]) from None
    if cfg.replica_loads is not None:
        r = cfg.replica_loads
        seed_replica_loads(world, r.seed, r.sigma, r.ru_mean, r.storage_mean)
    o = cfg.overrides
    params = SimParams(
        ru=RuConfig(o.ru.unit_size, o.ru.replica_count, o.ru.window_k),
        service=ServiceParams(o.service.t_cpu_us, o.service.t_io_us, o.service.entry_cost_us,
                              o.service.entry_threads),
        cpu=CpuLimits(**o.cpu.model_dump()),
        io_basic_threads=o.io.basic_threads, io_extra_threads=o.io.extra_threads,
        proxy_cache_bytes=o.cache.proxy_cache_bytes, node_cache_bytes=o.cache.node_cache_bytes,
        refresh_window=o.cache.refresh_window_s, hot_threshold=o.cache.hot_threshold,
        proxy_refresh=o.cache.proxy_refresh, default_ttl=o.cache.default_ttl_s,
        fanout_seed=o.cache.fanout_seed,
        meta_poll=o.meta.poll_period_s, meta_delay=o.meta.directive_delay_s,
        autoscale_period=o.autoscale.period_s, autoscale_up=o.autoscale.up,
        autoscale_lower=o.autoscale.lower, forecast=ForecastConfig(),
        reschedule_period=o.reschedule.period_s, theta=o.reschedule.theta,
        migration_bandwidth=o.reschedule.migration_bandwidth,
    )
    toggles = Toggles(**cfg.toggles.model_dump())
    tenant_toggles = {t: {k: v for k, v in tt.model_dump().items() if v is not None}
                      for t, tt in cfg.tenant_toggles.items()}
    timeline = [ToggleEvent(e.at_s, e.toggle, e.value, e.tenant) for e in cfg.timeline]
    histories = {t: TenantHistory(_series(h.usage), None, None if h.storage is None else _series(h.storage))
                 for t, h in cfg.histories.items()}
    return BuiltScenario(world, [_profile(w) for w in cfg.workloads], toggles, params, timeline,
                         histories, tenant_toggles, cfg.duration_s, cfg.seed if seed is None else seed)


def run_scenario(cfg: ScenarioConfig, seed: int | None = None):
    from .simkit.system import Simulator

    b = build(cfg, seed)
    sim = Simulator(b.world, b.profiles, b.duration, b.seed, toggles=b.toggles, params=b.params,
                    timeline=b.timeline, histories=b.histories, tenant_toggles=b.tenant_toggles)
    return sim.run()


__all__ = ["ConfigError", "ScenarioConfig", "parse_scenario", "load_scenario", "dump_scenario",
           "bundled_scenarios", "build", "run_scenario", "BuiltScenario", "TENANT_TOGGLES", "NODE_TOGGLES"]
