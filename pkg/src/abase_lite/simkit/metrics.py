"""Per-tenant, per-second counters and latency samples, with CSV and summary output.

Every outcome is filed under the second its request arrived, so within each
row ``offered`` equals successes plus errors. ``completed`` counts successful
completions by the second they finished.
"""

from __future__ import annotations

import csv
import io
from collections import defaultdict

import numpy as np

from .engine import US

OUTCOMES = ("proxy_reject", "partition_reject", "timeout",
            "served_from_proxy_cache", "served_from_node_cache", "served_from_disk")
SUCCESS = OUTCOMES[3:]
ERRORS = OUTCOMES[:3]

CSV_COLUMNS = ("second", "tenant", "offered", "success", "err_proxy_quota", "err_partition_quota",
               "err_timeout", "hit_proxy_cache", "hit_node_cache", "from_disk", "charged_ru",
               "completed", "p50_ms", "p99_ms")

_OFFERED, _RU, _COMPLETED = len(OUTCOMES), len(OUTCOMES) + 1, len(OUTCOMES) + 2
_WIDTH = len(OUTCOMES) + 3


class MetricsSink:
    def __init__(self, tenants, duration_s: float):
        self.tenants = sorted(tenants)
        self.seconds = int(np.ceil(duration_s))
        self.rows: dict = defaultdict(lambda: [0] * _WIDTH)
        self.latency: dict = defaultdict(list)  # (second, tenant) -> success latencies in us
        self.all_latency: dict = defaultdict(list)  # tenant -> every terminal latency
        self.completed_late = defaultdict(int)

    def offered(self, tenant: str, t_us: int) -> None:
        self.rows[(t_us // US, tenant)][_OFFERED] += 1

    def outcome(self, tenant: str, arrival_us: int, now_us: int, outcome: str, ru: float = 0) -> None:
        sec = arrival_us // US
        row = self.rows[(sec, tenant)]
        row[OUTCOMES.index(outcome)] += 1
        lat = now_us - arrival_us
        self.all_latency[tenant].append(lat)
        if outcome in SUCCESS:
            row[_RU] += ru
            self.latency[(sec, tenant)].append(lat)
            done = now_us // US
            if done < self.seconds:
                self.rows[(done, tenant)][_COMPLETED] += 1
            else:
                self.completed_late[tenant] += 1

    # ---- queries ------------------------------------------------------
    def series(self, tenant: str, column: str) -> np.ndarray:
        """Per-second values of one CSV column for ``tenant``."""
        out = np.zeros(self.seconds)
        for s in range(self.seconds):
            out[s] = self._value(s, tenant, column)
        return out

    def _value(self, s: int, tenant: str, column: str):
        row = self.rows.get((s, tenant))
        if row is None:
            row = [0] * _WIDTH
        if column == "offered":
            return row[_OFFERED]
        if column == "success":
            return sum(row[OUTCOMES.index(o)] for o in SUCCESS)
        if column == "charged_ru":
            return row[_RU]
        if column == "completed":
            return row[_COMPLETED]
        if column in OUTCOMES:
            return row[OUTCOMES.index(column)]
        raise KeyError(column)

    def totals(self, tenant: str) -> dict:
        acc = [0] * _WIDTH
        for (s, t), row in self.rows.items():
            if t == tenant:
                for i, v in enumerate(row):
                    acc[i] += v
        out = {o: acc[i] for i, o in enumerate(OUTCOMES)}
        out["offered"] = acc[_OFFERED]
        out["success"] = sum(out[o] for o in SUCCESS)
        out["charged_ru"] = acc[_RU]
        return out

    def latency_window(self, tenant: str, start_s: int, end_s: int) -> np.ndarray:
        lat = [x for s in range(start_s, end_s) for x in self.latency.get((s, tenant), ())]
        return np.asarray(lat, dtype=np.int64)

    def audit(self) -> list[str]:
        """Rows where offered differs from the sum of terminal outcomes."""
        bad = []
        for (s, t), row in sorted(self.rows.items()):
            if row[_OFFERED] != sum(row[:len(OUTCOMES)]):
                bad.append(f"second {s} tenant {t}: offered {row[_OFFERED]} != outcomes {sum(row[:len(OUTCOMES)])}")
        return bad

    # ---- output -------------------------------------------------------
    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for s in range(self.seconds):
            for t in self.tenants:
                row = self.rows.get((s, t)) or [0] * _WIDTH
                lat = self.latency.get((s, t))
                if lat:
                    p50, p99 = np.percentile(np.asarray(lat, dtype=float), [50, 99]) / 1000.0
                    p50s, p99s = f"{p50:.3f}", f"{p99:.3f}"
                else:
                    p50s = p99s = ""
                w.writerow([s, t, row[_OFFERED], sum(row[3:6]), row[0], row[1], row[2], row[3], row[4],
                            row[5], _fmt(row[_RU]), row[_COMPLETED], p50s, p99s])
        return buf.getvalue()


def _fmt(x) -> str:
    return str(int(x)) if float(x).is_integer() else f"{x:.6f}"


def percentile_ms(lat_us, q: float) -> float | None:
    if len(lat_us) == 0:
        return None
    return float(np.percentile(np.asarray(lat_us, dtype=float), q)) / 1000.0
