"""Service-time model: CPU time scales with RU, I/O time with IOPS."""

from __future__ import annotations

from dataclasses import dataclass

from ..wfq import IO_BLOCK, iops_estimate


@dataclass
class ServiceParams:
    t_cpu_us: float = 20.0
    t_io_us: float = 200.0
    entry_cost_us: float | None = None
    entry_threads: int = 1

    def __post_init__(self):
        if self.t_cpu_us < 0 or self.t_io_us < 0:
            raise ValueError("service constants must be non-negative")
        if self.entry_threads < 1:
            raise ValueError("entry_threads must be >= 1")

    @property
    def entry_us(self) -> float:
        """Per-request cost of taking a request off the node's request queue.

        Defaults to a tenth of a one-RU, one-IOPS request's service time.
        """
        if self.entry_cost_us is None:
            return 0.1 * (self.t_cpu_us + self.t_io_us)
        return self.entry_cost_us


def iops_for(size: int) -> int:
    return iops_estimate(size, IO_BLOCK)


def service_model(cost: float, stage: str, params: ServiceParams | None = None) -> int:
    """Service time in whole microseconds.

    ``cost`` is the RU estimate for the ``cpu`` stage (at least one RU of
    work is done per request) and the IOPS count for the ``io`` stage.
    """
    p = params or ServiceParams()
    if stage == "cpu":
        return int(round(p.t_cpu_us * max(1.0, cost)))
    if stage == "io":
        return int(round(p.t_io_us * cost))
    if stage == "entry":
        return int(round(p.entry_us))
    raise ValueError(f"unknown stage {stage!r}")
