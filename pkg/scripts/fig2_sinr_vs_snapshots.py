"""SINR versus snapshots for the four filters on the q=7 scenario.

    python scripts/fig2_sinr_vs_snapshots.py --runs 100 --out fig2.csv
"""

import argparse
from dataclasses import replace

from jioccm.cli import bundled_scenario
from jioccm.metrics import Scenario, convergence_snapshot, run_ensembles, steady_state_stats, write_curves_csv


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--scenario", default=bundled_scenario("fig2.json"))
    ap.add_argument("--runs", type=int, default=100)
    ap.add_argument("--snapshots", type=int, default=1000)
    ap.add_argument("--out", default="fig2.csv")
    args = ap.parse_args()

    sc = replace(Scenario.from_json(args.scenario), n_runs=args.runs, n_snapshots=args.snapshots)
    curves = run_ensembles(sc)
    write_curves_csv(curves.values(), args.out)
    window = max(1, sc.n_snapshots // 10)
    for name, c in curves.items():
        mean, std = steady_state_stats(c, window)
        print(f"{name:16s} steady {mean:6.2f} +/- {std:.2f} dB   within 2 dB at snapshot {convergence_snapshot(c, 2.0, window)}")


if __name__ == "__main__":
    main()
