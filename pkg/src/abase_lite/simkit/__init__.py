"""Discrete-event simulation kit: engine, workloads, service model, metrics and the system model."""

from .engine import US, EventQueue, SimulationError, to_us
from .metrics import MetricsSink, OUTCOMES
from .service import ServiceParams, service_model
from .system import RunResult, SimParams, Simulator, TenantHistory, ToggleEvent, Toggles, run
from .workload import (Burst, Constant, Diurnal, FixedSize, HotKeys, LognormalSize, UniformKeys,
                       WorkloadProfile, ZipfKeys, gen_arrivals, sample_keys, value_size)

__all__ = [
    "US", "EventQueue", "SimulationError", "to_us", "MetricsSink", "OUTCOMES", "ServiceParams",
    "service_model", "RunResult", "SimParams", "Simulator", "TenantHistory", "ToggleEvent", "Toggles",
    "run", "Burst", "Constant", "Diurnal", "FixedSize", "HotKeys", "LognormalSize", "UniformKeys",
    "WorkloadProfile", "ZipfKeys", "gen_arrivals", "sample_keys", "value_size",
]
