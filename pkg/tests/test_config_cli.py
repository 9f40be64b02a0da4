"""Scenario configuration parsing and the command-line interface."""

import json
import subprocess
import sys

import numpy as np
import pytest

from abase_lite.cli import EXIT_INVALID, EXIT_OK, main
from abase_lite.config import (ConfigError, bundled_scenarios, dump_scenario, load_scenario, parse_scenario)
from abase_lite.forecast import MetricSeries, write_series_csv
from abase_lite.reschedule import HOURS
from abase_lite.synthetic import diurnal_growth_series

from conftest import scenario_dict


def dumps(d):
    return json.dumps(d, indent=2)


class TestConfig:
    def test_toggles_default_on(self, scenario_text):
        cfg = parse_scenario(scenario_text(toggles={}))
        assert all(cfg.toggles.model_dump().values())

    def test_unknown_key_rejected_with_line(self, scenario_text):
        d = scenario_dict()
        d["workloads"][0]["rate_limit"] = 3
        text = dumps(d)
        with pytest.raises(ConfigError) as info:
            parse_scenario(text, "s.json")
        (msg,) = info.value.diagnostics
        line = next(i for i, l in enumerate(text.splitlines(), 1) if "rate_limit" in l)
        assert msg.startswith(f"s.json:{line}:") and "rate_limit" in msg

    @pytest.mark.parametrize("mutate, needle", [
        (lambda d: d["workloads"][0].update(tenant="ghost"), "unknown tenant"),
        (lambda d: d["topology"]["tenants"][0].update(pool="nowhere"), "unknown pool"),
        (lambda d: d.update(tenant_toggles={"ghost": {}}), "tenant_toggles.ghost"),
        (lambda d: d.update(timeline=[{"at_s": 99, "toggle": "proxy_quota", "value": True}]), "after the end"),
        (lambda d: d["workloads"][0].update(target_partition=3), "partitions"),
        (lambda d: d.update(duration_s=0), "duration_s"),
        (lambda d: d["workloads"][0].update(read_ratio=2), "read_ratio"),
    ])
    def test_reference_and_range_checks(self, mutate, needle):
        d = scenario_dict()
        mutate(d)
        with pytest.raises(ConfigError) as info:
            parse_scenario(dumps(d))
        assert any(needle in m for m in info.value.diagnostics)

    def test_invalid_json(self):
        with pytest.raises(ConfigError, match="invalid JSON"):
            parse_scenario("{\n  'x': 1\n}", "bad.json")

    @pytest.mark.parametrize("name", bundled_scenarios())
    def test_roundtrip(self, name):
        cfg = load_scenario(name)
        again = parse_scenario(dump_scenario(cfg))
        assert again == cfg
        assert dump_scenario(again) == dump_scenario(cfg)

    def test_bundled_names(self):
        assert bundled_scenarios() == ["elasticity_case", "fig10_reschedule", "fig7_proxy_quota",
                                       "fig8_partition_wfq", "table2_fanout_cache"]

    def test_unknown_bundled_name(self):
        with pytest.raises(ConfigError, match="no such file"):
            load_scenario("nope")


class TestCliRun:
    def test_run_writes_outputs(self, tmp_path, scenario_text, capsys):
        path = tmp_path / "s.json"
        path.write_text(scenario_text())
        assert main(["run", "--scenario", str(path), "--out", str(tmp_path / "o")]) == EXIT_OK
        out = tmp_path / "o"
        assert {p.name for p in out.iterdir()} == {"metrics.csv", "summary.json", "decisions.ndjson",
                                                   "migrations.ndjson"}
        summary = json.loads((out / "summary.json").read_text())
        assert summary["scenario"] == "tiny" and summary["conservation"]["ok"]
        assert summary["tenants"]["t1"]["offered"] == 150
        assert "t1: offered=150" in capsys.readouterr().out

    def test_same_seed_same_bytes(self, tmp_path, scenario_text):
        path = tmp_path / "s.json"
        path.write_text(scenario_text())
        for d in ("a", "b"):
            main(["run", "--scenario", str(path), "--out", str(tmp_path / d), "--seed", "5"])
        assert (tmp_path / "a/metrics.csv").read_bytes() == (tmp_path / "b/metrics.csv").read_bytes()

    def test_malformed_file(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text('{"name": "x", "duration_s": 1,\n "topology": {}, "bogus": 1}')
        assert main(["run", "--scenario", str(path), "--out", str(tmp_path / "o")]) == EXIT_INVALID
        err = capsys.readouterr().err
        assert "bad.json:2" in err and "bogus" in err

    def test_missing_file(self, tmp_path):
        assert main(["run", "--scenario", str(tmp_path / "none.json"), "--out", str(tmp_path)]) == EXIT_INVALID

    def test_bad_arguments(self):
        assert main(["frobnicate"]) == EXIT_INVALID
        assert main(["run"]) == EXIT_INVALID

    def test_list(self, capsys):
        assert main(["list"]) == EXIT_OK
        assert "fig7_proxy_quota" in capsys.readouterr().out.split()


def snapshot(nodes, replicas):
    return {"pool_id": "p", "nodes": [{"id": f"n{i}", "ru_capacity": 1.0, "storage_capacity": 1.0}
                                      for i in range(nodes)],
            "replicas": [{"id": f"r{i}", "tenant": "t", "partition": f"x{i}", "node": f"n{n}",
                          "ru": [ru] * HOURS, "storage": [0.1] * HOURS} for i, (n, ru) in enumerate(replicas)]}


class TestCliReschedule:
    def run(self, tmp_path, snap, *extra):
        p = tmp_path / "snap.json"
        p.write_text(json.dumps(snap))
        return main(["reschedule", "--pool-state", str(p), "--out", str(tmp_path / "o"), *extra])

    def test_balanced_snapshot(self, tmp_path, capsys):
        assert self.run(tmp_path, snapshot(3, [(0, 0.4), (1, 0.4), (2, 0.4)])) == EXIT_OK
        assert "0 migrations planned" in capsys.readouterr().out
        assert (tmp_path / "o/migrations.ndjson").read_text() == ""

    def test_single_node(self, tmp_path, capsys):
        assert self.run(tmp_path, snapshot(1, [(0, 0.9), (0, 0.05)])) == EXIT_OK
        assert "0 migrations planned" in capsys.readouterr().out

    def test_skewed_snapshot_improves(self, tmp_path, capsys):
        assert self.run(tmp_path, snapshot(3, [(0, 0.4), (0, 0.3), (0, 0.2), (1, 0.05), (2, 0.05)])) == EXIT_OK
        out = capsys.readouterr().out
        assert "move r" in out and "reduction" in out
        report = json.loads((tmp_path / "o/reschedule_summary.json").read_text())
        before, after = report["pools"]["p"]["before"], report["pools"]["p"]["after"]
        assert after["ru_std"] < before["ru_std"]

    def test_two_pools(self, tmp_path, capsys):
        hot = snapshot(3, [(i % 3, 0.2) for i in range(12)])
        cold = snapshot(3, [(i % 3, 0.1) for i in range(3)])
        cold["pool_id"] = "q"
        for n in cold["nodes"]:
            n["id"] = "c" + n["id"]
        for r in cold["replicas"]:
            r["node"] = "c" + r["node"]
            r["id"] = "c" + r["id"]
        assert self.run(tmp_path, {"pools": [hot, cold]}) == EXIT_OK
        assert "pool q:" in capsys.readouterr().out

    def test_anti_affinity_violation(self, tmp_path, capsys):
        snap = snapshot(2, [(0, 0.1), (0, 0.1)])
        snap["replicas"][1]["partition"] = "x0"
        assert self.run(tmp_path, snap) == EXIT_INVALID
        assert "two replicas on one node" in capsys.readouterr().err

    def test_garbage(self, tmp_path):
        p = tmp_path / "snap.json"
        p.write_text("[1, 2")
        assert main(["reschedule", "--pool-state", str(p)]) == EXIT_INVALID


class TestCliForecast:
    def write(self, tmp_path, values, name="u.csv"):
        p = tmp_path / name
        write_series_csv(p, MetricSeries(np.asarray(values, dtype=float), start=0))
        return str(p)

    def test_diurnal_u_max(self, tmp_path, capsys):
        full = diurnal_growth_series(37, 400, 0.3, 0.0)
        series = self.write(tmp_path, full[:720])
        assert main(["forecast", "--series", series, "--out", str(tmp_path / "f.json")]) == EXIT_OK
        doc = json.loads((tmp_path / "f.json").read_text())
        assert doc["u_max"] == pytest.approx(full.max(), rel=0.05)
        assert "recommendation: unavailable" in capsys.readouterr().out

    def test_constant_inside_band(self, tmp_path, capsys):
        series = self.write(tmp_path, [75.0] * 720)
        quota = self.write(tmp_path, [100.0] * 720, "q.csv")
        assert main(["forecast", "--series", series, "--quota", quota]) == EXIT_OK
        assert "recommendation: none" in capsys.readouterr().out

    def test_growth_scales_up(self, tmp_path, capsys):
        series = self.write(tmp_path, diurnal_growth_series(30, 400, 0.3, 0.03))
        out_path = tmp_path / "f.json"
        assert main(["forecast", "--series", series, "--ru-quota", "1080", "--out", str(out_path)]) == EXIT_OK
        doc = json.loads(out_path.read_text())
        assert doc["recommendation"]["action"] == "scale_up"
        assert doc["recommendation"]["new_q_t"] == pytest.approx(doc["u_max"] / 0.65)

    def test_short_series_notice(self, tmp_path, capsys):
        series = self.write(tmp_path, [5.0] * 48)
        assert main(["forecast", "--series", series]) == EXIT_OK
        assert "notice:" in capsys.readouterr().err

    def test_unreadable(self, tmp_path):
        assert main(["forecast", "--series", str(tmp_path / "missing.csv")]) == EXIT_INVALID


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "abase_lite", "list"], capture_output=True, text=True)
    assert proc.returncode == 0 and "elasticity_case" in proc.stdout
