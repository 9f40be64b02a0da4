"""Walk through the bundled proxy-quota scenario and print the three phases.

Tenant t1 bursts to five times its quota while its proxy does not enforce
the quota; tenant t2 shares the node. Enforcement starts at 2100 s.

    python3 demos/proxy_quota_ablation.py
"""

from abase_lite.config import load_scenario, run_scenario


def main():
    res = run_scenario(load_scenario("fig7_proxy_quota"))
    m = res.metrics
    t1, t2 = m.series("t1", "success"), m.series("t2", "success")
    phases = [("before burst", 100, 600), ("burst, no enforcement", 700, 2100), ("enforced", 2160, 2400)]
    print(f"{'phase':<24}{'t1 success/s':>14}{'t2 success/s':>14}")
    for label, a, b in phases:
        print(f"{label:<24}{t1[a:b].mean():>14.1f}{t2[a:b].mean():>14.1f}")
    for d in res.decisions:
        print("decision:", d)


if __name__ == "__main__":
    main()
