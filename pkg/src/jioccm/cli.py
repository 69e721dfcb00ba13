"""Command-line front end.

    jioccm curve       --scenario S.json --out curves.csv
    jioccm rank-sweep  --scenario S.json --out ranks.csv
    jioccm mismatch    --scenario S.json --out mismatch.csv --mismatch-deg 2
    jioccm complexity  --m 32 --r 5 --out table.csv
    jioccm selftest

Exit codes: 0 success, 1 runtime failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

from . import metrics
from .selftest import run_selftest

log = logging.getLogger("jioccm")

COMMANDS = ("curve", "rank-sweep", "mismatch", "complexity", "selftest")

DEFAULT_SCENARIOS = {"curve": "fig2.json", "rank-sweep": "fig2.json", "mismatch": "fig4.json"}

# flag dest -> Scenario field
_OVERRIDES = {
    "runs": "n_runs",
    "snapshots": "n_snapshots",
    "rank": "rank",
    "seed": "master_seed",
    "gs_period": "gs_period",
    "mu_t": "mu_T",
    "mu_w": "mu_w",
    "mu_t_gs": "mu_T_gs",
    "mu_w_gs": "mu_w_gs",
    "mu_cmv": "mu_cmv",
    "mu_ccm": "mu_ccm",
}


@dataclass
class ExperimentSpec:
    command: str
    scenario_path: Path | None = None
    output_path: Path | None = None
    overrides: dict = field(default_factory=dict)


def bundled_scenario(name: str) -> Path:
    return Path(str(resources.files("jioccm.scenarios").joinpath(name)))


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="jioccm", description="Reduced-rank CCM beamforming experiments.")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def sim_flags(sp, *, ranks=False, mismatch=False):
        sp.add_argument("--scenario", type=Path, help="scenario JSON file (default: bundled scenario)")
        sp.add_argument("--out", type=Path, required=True, help="output CSV path")
        sp.add_argument("--runs", type=int, help="Monte Carlo runs K")
        sp.add_argument("--snapshots", type=int, help="snapshots per run N")
        sp.add_argument("--rank", type=int, help="rank r of the JIO filters")
        sp.add_argument("--seed", type=int, help="master RNG seed")
        sp.add_argument("--gs-period", type=int, help="orthonormalize T every P snapshots")
        sp.add_argument("--mu-t", type=float, help="step size for T (JIO-CCM)")
        sp.add_argument("--mu-w", type=float, help="step size for w_bar (JIO-CCM)")
        sp.add_argument("--mu-t-gs", type=float, help="step size for T (JIO-CCM-GS)")
        sp.add_argument("--mu-w-gs", type=float, help="step size for w_bar (JIO-CCM-GS)")
        sp.add_argument("--mu-cmv", type=float, help="step size of the full-rank CMV-SG filter")
        sp.add_argument("--mu-ccm", type=float, help="step size of the full-rank CCM-SG filter")
        if ranks:
            sp.add_argument("--ranks", type=int, nargs="+", default=list(range(2, 9)), help="ranks to sweep (default 2..8)")
        if mismatch:
            sp.add_argument("--mismatch-deg", type=float, default=2.0, help="presumed minus true SOI DOA (default 2)")

    sim_flags(sub.add_parser("curve", help="SINR versus snapshots for the four filters"))
    sim_flags(sub.add_parser("rank-sweep", help="SINR after N snapshots versus rank (N defaults to 500)"), ranks=True)
    sim_flags(sub.add_parser("mismatch", help="SINR curves with and without steering mismatch"), mismatch=True)

    cx = sub.add_parser("complexity", help="per-snapshot operation counts")
    cx.add_argument("--m", type=int, required=True, help="sensor count")
    cx.add_argument("--r", type=int, required=True, help="rank")
    cx.add_argument("--out", type=Path, required=True, help="output CSV path")

    st = sub.add_parser("selftest", help="run the built-in invariant checks")
    st.add_argument("--out", type=Path, help="optional report file")
    return p


def parse_args(argv) -> ExperimentSpec:
    parser = _build_parser()
    ns = parser.parse_args(argv)
    overrides = {k: v for k, v in vars(ns).items() if k not in ("command", "scenario", "out") and v is not None}
    scenario = getattr(ns, "scenario", None)
    if ns.command in DEFAULT_SCENARIOS:
        if scenario is None:
            scenario = bundled_scenario(DEFAULT_SCENARIOS[ns.command])
        elif not scenario.is_file():
            parser.error(f"scenario file not found: {scenario}")
    for k in ("runs", "snapshots", "rank", "gs_period", "m", "r"):
        if k in overrides and overrides[k] < 1:
            parser.error(f"--{k.replace('_', '-')} must be >= 1")
    return ExperimentSpec(command=ns.command, scenario_path=scenario, output_path=ns.out, overrides=overrides)


def _load_scenario(spec: ExperimentSpec) -> metrics.Scenario:
    sc = metrics.Scenario.from_json(spec.scenario_path)
    kw = {_OVERRIDES[k]: v for k, v in spec.overrides.items() if k in _OVERRIDES}
    return replace(sc, **kw)


def run(spec: ExperimentSpec) -> int:
    try:
        if spec.command == "complexity":
            m, r = spec.overrides["m"], spec.overrides["r"]
            metrics.write_complexity_csv(metrics.complexity_table(m, r), m, r, spec.output_path)
        elif spec.command == "selftest":
            lines = []
            ok = run_selftest(out=lambda s: (print(s), lines.append(s)))
            if spec.output_path is not None:
                spec.output_path.write_text("\n".join(lines) + "\n")
            return 0 if ok else 1
        elif spec.command == "curve":
            sc = _load_scenario(spec)
            curves = metrics.run_ensembles(sc)
            metrics.write_curves_csv(curves.values(), spec.output_path)
        elif spec.command == "rank-sweep":
            n_fixed = spec.overrides.get("snapshots", 500)
            sc = _load_scenario(spec)
            res = {a: metrics.rank_sweep(sc, a, spec.overrides["ranks"], n_fixed) for a in ("jio-ccm", "jio-ccm-gs")}
            metrics.write_rank_sweep_csv(res, spec.output_path)
        elif spec.command == "mismatch":
            sc = _load_scenario(spec)
            curves = metrics.mismatch_experiment(sc, metrics.ALGORITHMS, 0.0)
            curves += metrics.mismatch_experiment(sc, metrics.ALGORITHMS, spec.overrides["mismatch_deg"])
            metrics.write_curves_csv(curves, spec.output_path, extra_cols=("mismatch_deg",))
        else:  # pragma: no cover - argparse rejects unknown commands
            raise ValueError(spec.command)
    except (OSError, ValueError, ArithmeticError) as exc:
        print(f"jioccm: error: {exc}", file=sys.stderr)
        return 1
    log.info("wrote %s", spec.output_path)
    return 0


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    spec = parse_args(sys.argv[1:] if argv is None else argv)
    return run(spec)


if __name__ == "__main__":
    sys.exit(main())
