"""Event queue with a deterministic (time, sequence) order on an integer microsecond clock."""

from __future__ import annotations

import heapq

US = 1_000_000

EVENT_KINDS = (
    "arrival", "entry_done", "cpu_service_done", "io_service_done", "meta_tick", "meta_directive",
    "rescheduler_tick", "autoscale_tick", "cache_refresh", "migration_done", "toggle",
)


class SimulationError(RuntimeError):
    """Internal inconsistency detected while simulating."""


def to_us(seconds: float) -> int:
    return int(round(seconds * US))


class EventQueue:
    """Min-heap of ``(time_us, seq, kind, payload)``.

    The sequence number is assigned at push time, so events scheduled for
    the same microsecond fire in scheduling order.
    """

    def __init__(self):
        self._heap: list = []
        self._seq = 0

    def __len__(self):
        return len(self._heap)

    def push(self, time_us: int, kind: str, payload=None) -> None:
        if not isinstance(time_us, int):
            raise TypeError("event times are integer microseconds")
        self._seq += 1
        heapq.heappush(self._heap, (time_us, self._seq, kind, payload))

    def pop(self):
        return heapq.heappop(self._heap)

    def peek_time(self) -> int | None:
        return self._heap[0][0] if self._heap else None
