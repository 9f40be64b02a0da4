"""Sweep the proxy group count and show the hit ratio / hot-key spread trade-off.

    python3 demos/fanout_sweep.py
"""

from abase_lite.simkit.cachesim import fanout_experiment, size_aware_comparison
from abase_lite.simkit.workload import ZipfKeys, sample_keys

PROXIES = 75


def main():
    keys = sample_keys(ZipfKeys(1.0, 100_000), 1_000_000, seed=5)
    print(f"{'groups':>6}{'proxies/key':>13}{'hit ratio':>11}{'hot peak':>10}")
    for n in (1, 3, 5, 15, 25, 75):
        r = fanout_experiment(proxies=PROXIES, groups=n, keys=keys, seed=5)
        print(f"{n:>6}{PROXIES // n:>13}{r.hit_ratio:>11.3f}{r.hot_peak:>10}")
    sa, lru = size_aware_comparison()
    print(f"node cache, lognormal sizes: size-aware {sa:.3f} vs plain LRU {lru:.3f}")


if __name__ == "__main__":
    main()
