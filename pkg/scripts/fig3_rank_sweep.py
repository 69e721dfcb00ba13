"""SINR after a fixed number of snapshots versus rank for both JIO filters.

    python scripts/fig3_rank_sweep.py --runs 100 --out fig3.csv
"""

import argparse
from dataclasses import replace

from jioccm.cli import bundled_scenario
from jioccm.metrics import Scenario, rank_sweep, write_rank_sweep_csv


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--scenario", default=bundled_scenario("fig2.json"))
    ap.add_argument("--runs", type=int, default=100)
    ap.add_argument("--snapshots", type=int, default=500)
    ap.add_argument("--ranks", type=int, nargs="+", default=list(range(2, 9)))
    ap.add_argument("--out", default="fig3.csv")
    args = ap.parse_args()

    sc = replace(Scenario.from_json(args.scenario), n_runs=args.runs)
    res = {a: rank_sweep(sc, a, args.ranks, args.snapshots) for a in ("jio-ccm", "jio-ccm-gs")}
    write_rank_sweep_csv(res, args.out)
    for algo, pts in res.items():
        print(algo, "  ".join(f"r={r}: {v:.2f}" for r, v in pts))


if __name__ == "__main__":
    main()
