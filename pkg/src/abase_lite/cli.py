"""Command-line entry points: run scenarios, reschedule pool snapshots, forecast series.

Exit codes: 0 success, 1 runtime or audit failure, 2 invalid input.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import autoscale as asc
from .config import ConfigError, bundled_scenarios, load_scenario, run_scenario
from .forecast import SeriesError, forecast, read_series_csv
from .reschedule import (Pool, SnapshotError, converge, inter_pool_reschedule, load_snapshot,
                         phase1_replica_balance)
from .simkit.engine import SimulationError

log = logging.getLogger("abase_lite")

EXIT_OK, EXIT_RUNTIME, EXIT_INVALID = 0, 1, 2


def _setup_logging() -> None:
    level = os.environ.get("ABASE_LITE_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def _ndjson(path: Path, records) -> None:
    with path.open("w") as fh:
        for r in records:
            fh.write(json.dumps(r, sort_keys=True, default=_jsonable) + "\n")


def _jsonable(x):
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"not serializable: {type(x).__name__}")


# ---- run ------------------------------------------------------------------

def cmd_run(args) -> int:
    try:
        cfg = load_scenario(args.scenario)
    except ConfigError as exc:
        for line in exc.diagnostics:
            print(line, file=sys.stderr)
        return EXIT_INVALID
    try:
        result = run_scenario(cfg, args.seed)
    except ConfigError as exc:
        for line in exc.diagnostics:
            print(line, file=sys.stderr)
        return EXIT_INVALID
    except SimulationError as exc:
        print(f"simulation failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "metrics.csv").write_text(result.metrics.to_csv())
    summary = dict(result.summary, scenario=cfg.name)
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True, default=_jsonable) + "\n")
    _ndjson(out / "decisions.ndjson", result.decisions)
    _ndjson(out / "migrations.ndjson", result.migrations)
    cons = result.summary["conservation"]
    for t, s in sorted(result.summary["tenants"].items()):
        print(f"{t}: offered={s['offered']} success={s['success']} proxy_reject={s['proxy_reject']} "
              f"partition_reject={s['partition_reject']} timeout={s['timeout']}")
    if not cons["ok"]:
        for p in cons["problems"]:
            print(f"conservation audit: {p}", file=sys.stderr)
        return EXIT_RUNTIME
    print(f"wrote {out}/metrics.csv, summary.json, decisions.ndjson, migrations.ndjson")
    return EXIT_OK


# ---- reschedule ---------------------------------------------------------

def _load_pools(ref: str) -> list[Pool]:
    p = Path(ref)
    if not p.exists() and not p.suffix:
        bundled = resources.files("abase_lite") / "data" / f"{ref}.json"
        if not bundled.is_file():
            raise SnapshotError(f"{ref}: no such file or bundled snapshot")
        data = json.loads(bundled.read_text())
    elif not p.exists():
        raise SnapshotError(f"{ref}: no such file")
    else:
        data = load_snapshot(p)
    snaps = data["pools"] if "pools" in data else [data]
    if not isinstance(snaps, list) or not snaps:
        raise SnapshotError(f"{ref}: 'pools' must be a non-empty list")
    pools = [Pool.from_snapshot(s) for s in snaps]
    for pool in pools:
        for pid, nodes in pool.partition_nodes.items():
            count = sum(1 for x in pool.partitions if x == pid)
            if len(nodes) < count:
                raise SnapshotError(f"pool {pool.pool_id}: partition {pid} has two replicas on one node")
        over = np.flatnonzero(pool.node_sto.max(axis=1) > pool.sto_cap * (1 + 1e-9))
        for i in over:
            print(f"warning: pool {pool.pool_id}: node {pool.node_ids[i]} starts above its storage capacity",
                  file=sys.stderr)
    return pools


def _stats(pool: Pool) -> dict:
    return {"nodes": len(pool.node_ids), "replicas": len(pool.replica_ids),
            "ru_std": pool.std("ru"), "storage_var": pool.var("storage"),
            "max_loss": float(pool.losses().max(initial=0.0)),
            "target": [pool.target().r, pool.target().s]}


def cmd_reschedule(args) -> int:
    try:
        pools = _load_pools(args.pool_state)
    except SnapshotError as exc:
        print(f"invalid snapshot: {exc}", file=sys.stderr)
        return EXIT_INVALID
    records = []
    report = {"pools": {}}
    if len(pools) > 1:
        res = inter_pool_reschedule(pools, theta=args.theta, rounds=args.iterations)
        report["inter_pool"] = {"moved_nodes": res.moved_nodes, "skipped": res.skipped}
        records += [dict(m.as_record(), phase="drain") for m in res.drain_plan]
        for pid, plan in res.follow_up.items():
            records += [dict(m.as_record(), phase="intra", pool=pid) for m in plan]
        for pid, before in ((p.pool_id, p) for p in pools):
            after = res.pools.get(pid, before)
            report["pools"][pid] = {"before": _stats(before), "after": _stats(after)}
    else:
        pool = pools[0]
        before = _stats(pool)
        try:
            p1 = phase1_replica_balance(pool, apply=True)
            plan, history = converge(pool, args.iterations, args.theta, audit=True)
        except AssertionError as exc:
            print(f"rescheduling audit failed: {exc}", file=sys.stderr)
            return EXIT_RUNTIME
        records += [dict(m.as_record(), phase="replica_balance") for m in p1]
        records += [dict(m.as_record(), phase="intra") for m in plan]
        report["pools"][pool.pool_id] = {
            "before": before, "after": _stats(pool),
            "rounds": [{"iteration": h.iteration, "moves": h.moves, "max_loss": h.max_loss,
                        "ru_std": h.ru_std, "storage_var": h.storage_var} for h in history]}
    for r in records:
        print(f"move {r['replica']}: {r['src']} -> {r['dst']} gain={r['gain']:.6f} ({r['phase']})")
    for pid, s in report["pools"].items():
        b, a = s["before"], s["after"]
        ru_red = 1 - a["ru_std"] / b["ru_std"] if b["ru_std"] else 0.0
        sto_red = 1 - a["storage_var"] / b["storage_var"] if b["storage_var"] else 0.0
        print(f"pool {pid}: RU std {b['ru_std']:.4f} -> {a['ru_std']:.4f} ({ru_red:.1%} reduction); "
              f"storage var {b['storage_var']:.6f} -> {a['storage_var']:.6f} ({sto_red:.1%} reduction)")
    print(f"{len(records)} migrations planned")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        _ndjson(out / "migrations.ndjson", records)
        (out / "reschedule_summary.json").write_text(
            json.dumps(report, indent=2, sort_keys=True, default=_jsonable) + "\n")
    return EXIT_OK


# ---- forecast -----------------------------------------------------------

def cmd_forecast(args) -> int:
    try:
        usage = read_series_csv(args.series, "usage")
        quota = read_series_csv(args.quota, "quota") if args.quota else None
    except (OSError, SeriesError) as exc:
        print(f"invalid series: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if quota is not None and len(quota) != len(usage):
        print("invalid series: usage and quota lengths differ", file=sys.stderr)
        return EXIT_INVALID
    q_t = args.ru_quota
    if q_t is None and quota is not None:
        q_t = float(quota.values[-1])
    res = forecast(usage, quota, horizon=args.horizon)
    doc = res.to_dict()
    if res.fallback:
        print(f"notice: {res.fallback}", file=sys.stderr)
    print(f"U_max = {res.u_max:.3f} (period={res.detected_period}, burst_guard={res.burst_guard_applied})")
    if q_t is not None:
        state = asc.ScalingState("tenant", q_t, args.partitions)
        dec = asc.decide(state, res.u_max, 0.0)
        doc["recommendation"] = dec.as_record(0.0, "tenant", state)
        print(f"recommendation: {dec.action} (Q_T {q_t:g} -> {dec.new_q_t:.3f}, "
              f"Q_P -> {dec.new_q_p:.3f}, partitions {dec.new_n}{', split' if dec.split_triggered else ''})")
    else:
        print("recommendation: unavailable (no --quota series or --ru-quota given)")
    text = json.dumps(doc, indent=2, sort_keys=True, default=_jsonable) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    return EXIT_OK


def cmd_list(_args) -> int:
    for name in bundled_scenarios():
        print(name)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="abase-lite", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="simulate a scenario file or bundled scenario")
    r.add_argument("--scenario", required=True, help="path to a scenario JSON file or a bundled name")
    r.add_argument("--out", required=True, help="output directory")
    r.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("reschedule", help="plan replica migrations for a pool snapshot")
    s.add_argument("--pool-state", required=True, help="snapshot JSON (or 'pool_100_skewed')")
    s.add_argument("--iterations", type=int, default=100)
    s.add_argument("--theta", type=float, default=0.05)
    s.add_argument("--out", default=None, help="directory for migrations.ndjson and a summary")
    s.set_defaults(func=cmd_reschedule)

    f = sub.add_parser("forecast", help="forecast an hourly usage series")
    f.add_argument("--series", required=True, help="CSV of timestamp,value on an hourly grid")
    f.add_argument("--quota", default=None, help="matching quota series CSV")
    f.add_argument("--horizon", type=int, default=168)
    f.add_argument("--ru-quota", type=float, default=None, help="current tenant quota Q_T")
    f.add_argument("--partitions", type=int, default=1, help="current partition count N")
    f.add_argument("--out", default=None, help="write the forecast document here")
    f.set_defaults(func=cmd_forecast)

    ls = sub.add_parser("list", help="list bundled scenarios")
    ls.set_defaults(func=cmd_list)
    return ap


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and EXIT_INVALID
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
