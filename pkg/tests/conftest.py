import json

import pytest

from abase_lite.domain import build_topology


def topology(nodes=4, tenants=(), pool="p0"):
    """Plain topology description with equal nodes in one pool."""
    return {
        "pools": [{"id": pool, "nodes": [
            {"id": f"dn{i}", "ru_capacity": 10_000, "storage_capacity": 1e12} for i in range(nodes)]}],
        "tenants": [dict({"pool": pool, "ru_quota": 1000}, **t) for t in tenants],
    }


@pytest.fixture
def world_factory():
    def make(nodes=4, tenants=({"id": "t1", "partition_count": 4, "replica_count": 1},), **kw):
        return build_topology(topology(nodes, tenants), **kw)
    return make


def scenario_dict(**overrides):
    """A small valid scenario; keyword arguments replace top-level keys."""
    base = {
        "name": "tiny",
        "duration_s": 3,
        "seed": 1,
        "topology": {
            "pools": [{"id": "p", "nodes": [{"id": "dn0", "ru_capacity": 1e5, "storage_capacity": 1e12}]}],
            "tenants": [{"id": "t1", "pool": "p", "ru_quota": 1000, "replica_count": 1}],
        },
        "workloads": [{"tenant": "t1", "arrival": {"kind": "constant", "rate": 50}}],
        "toggles": {"autoscaler": False, "rescheduler": False},
    }
    base.update(overrides)
    return base


@pytest.fixture
def scenario_text():
    def make(**overrides):
        return json.dumps(scenario_dict(**overrides), indent=2)
    return make


# ---- acceptance report ----------------------------------------------------

ACCEPTANCE: dict = {}  # criterion number -> {"title", "ok", "details"}


def record(number: int, title: str, ok: bool, detail: str) -> None:
    entry = ACCEPTANCE.setdefault(number, {"title": title, "ok": True, "details": []})
    entry["ok"] = entry["ok"] and ok
    entry["details"].append(detail)
    print(f"criterion {number} {'PASS' if ok else 'FAIL'}: {title}: {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        e = ACCEPTANCE[number]
        terminalreporter.write_line(f"[{'PASS' if e['ok'] else 'FAIL'}] C{number} {e['title']}: "
                                    + "; ".join(e["details"]))
