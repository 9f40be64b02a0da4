"""Rebalance the bundled 100-node skewed pool and print per-round statistics.

    python3 demos/reschedule_pool.py
"""

import json
from importlib import resources

from abase_lite.reschedule import Pool, converge, phase1_replica_balance


def main():
    snap = json.loads((resources.files("abase_lite") / "data" / "pool_100_skewed.json").read_text())
    pool = Pool.from_snapshot(snap)
    print(f"start: RU std {pool.std('ru'):.4f}, storage var {pool.var('storage'):.6f}")
    moves = phase1_replica_balance(pool, apply=True)
    print(f"replica-count balancing: {len(moves)} moves")
    _, history = converge(pool, 200)
    for h in history:
        print(f"round {h.iteration:>3}: {h.moves:>3} moves, max loss {h.max_loss:.4f}, "
              f"RU std {h.ru_std:.4f}, storage var {h.storage_var:.6f}")


if __name__ == "__main__":
    main()
