"""Output SINR, Monte Carlo ensembles, rank sweep, mismatch experiment and
the operation-count model of the compared algorithms."""

from __future__ import annotations

import csv
import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .array_model import ArrayConfig, generate_block
from .fullrank import ccm_sg_step, cmv_sg_step, init_fullrank
from .jio import equivalent_filter, init_state, jio_step

__all__ = [
    "ALGORITHMS",
    "COMPLEXITY_ROWS",
    "Scenario",
    "SinrCurve",
    "ComplexityCount",
    "output_sinr",
    "run_ensemble",
    "run_ensembles",
    "rank_sweep",
    "mismatch_experiment",
    "complexity_counts",
    "complexity_table",
    "steady_state_stats",
    "convergence_snapshot",
    "write_curves_csv",
    "write_rank_sweep_csv",
    "write_complexity_csv",
]

log = logging.getLogger(__name__)

ALGORITHMS = ("fullrank-cmv-sg", "fullrank-ccm-sg", "jio-ccm", "jio-ccm-gs")

SINR_FLOOR_DB = -300.0


@dataclass(frozen=True)
class Scenario:
    """Array configuration plus Monte Carlo and adaptation parameters."""

    array: ArrayConfig
    n_snapshots: int = 1000
    n_runs: int = 100
    master_seed: int = 0
    rank: int = 5
    mu_T: float = 0.002
    mu_w: float = 0.001
    mu_T_gs: float = 0.003
    mu_w_gs: float = 0.0007
    mu_cmv: float = 0.001
    mu_ccm: float = 0.001
    gs_period: int = 1

    _RUN_KEYS = (
        "n_snapshots", "n_runs", "master_seed", "rank", "mu_T", "mu_w",
        "mu_T_gs", "mu_w_gs", "mu_cmv", "mu_ccm", "gs_period",
    )

    @classmethod
    def from_dict(cls, d: dict) -> "Scenario":
        kw = {k: d[k] for k in cls._RUN_KEYS if k in d}
        return cls(array=ArrayConfig.from_dict(d), **kw)

    @classmethod
    def from_json(cls, path) -> "Scenario":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def to_dict(self) -> dict:
        d = self.array.to_dict()
        d.update({k: getattr(self, k) for k in self._RUN_KEYS})
        return d

    def step_sizes(self, algo: str) -> tuple[float, float]:
        """``(mu_T, mu_w)`` used by ``algo``; full-rank filters report ``mu_T = 0``."""
        return {
            "fullrank-cmv-sg": (0.0, self.mu_cmv),
            "fullrank-ccm-sg": (0.0, self.mu_ccm),
            "jio-ccm": (self.mu_T, self.mu_w),
            "jio-ccm-gs": (self.mu_T_gs, self.mu_w_gs),
        }[algo]

    def algo_rank(self, algo: str) -> int:
        return self.rank if algo.startswith("jio") else self.array.m


@dataclass
class SinrCurve:
    algorithm: str
    snapshots: np.ndarray
    sinr_db: np.ndarray
    n_runs: int
    params: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.sinr_db)


@dataclass(frozen=True)
class ComplexityCount:
    algorithm: str
    additions: int
    multiplications: int


def output_sinr(w_eq, cfg: ArrayConfig) -> float:
    """Analytic output SINR in dB from the true scenario parameters.

    ``p_0 |w^H a(theta_0)|^2 / (w^H R_in w)``; the desired steering vector is
    the true (not presumed) one. Returns ``SINR_FLOOR_DB`` when the desired
    response is exactly nulled.
    """
    w = np.asarray(w_eq, dtype=complex)
    if not np.any(w):
        raise ValueError("output SINR undefined for the zero weight vector")
    return _SinrMeter(cfg).db(w)


class _SinrMeter:
    # precomputed pieces of output_sinr for the per-snapshot loop
    def __init__(self, cfg: ArrayConfig):
        self.a = cfg.steering(cfg.doas_deg[0])
        self.p0 = cfg.source_powers[0]
        self.R = cfg.interference_covariance()

    def linear(self, w):
        g = np.vdot(w, self.a)
        num = self.p0 * (g.real * g.real + g.imag * g.imag)
        den = np.vdot(w, self.R @ w).real
        return num / den

    def db(self, w):
        v = self.linear(w)
        return SINR_FLOOR_DB if v <= 0 else max(10 * np.log10(v), SINR_FLOOR_DB)


def _run_one(scenario: Scenario, algos, run_index: int) -> dict:
    """Linear SINR per snapshot for each algorithm on one shared block.

    A run whose weights stop being finite is counted as diverged: its SINR is
    zero (the dB floor) from that snapshot on. Returns ``{algo: (vals, diverged)}``.
    """
    cfg = scenario.array
    block = generate_block(cfg, scenario.n_snapshots, scenario.master_seed, run_index)
    a0 = cfg.constraint_vector()
    meter = _SinrMeter(cfg)
    out = {}
    for algo in algos:
        vals = np.zeros(scenario.n_snapshots)
        diverged = False
        with np.errstate(over="ignore", invalid="ignore"):
            if algo.startswith("fullrank"):
                step = cmv_sg_step if algo == "fullrank-cmv-sg" else ccm_sg_step
                st = init_fullrank(a0, scenario.step_sizes(algo)[1])
                for i, x in enumerate(block.x):
                    st = step(st, x)
                    vals[i] = meter.linear(st.w)
                    if not np.isfinite(vals[i]):
                        diverged = True
                        break
            else:
                mu_T, mu_w = scenario.step_sizes(algo)
                st = init_state(a0, scenario.rank, mu_T, mu_w, gs=algo == "jio-ccm-gs",
                                gs_period=scenario.gs_period)
                for i, x in enumerate(block.x):
                    try:
                        st, _ = jio_step(st, x)
                    except (ArithmeticError, ValueError):
                        # Gram-Schmidt or the constraint rescale broke down on non-finite weights
                        diverged = True
                        break
                    vals[i] = meter.linear(equivalent_filter(st))
                    if not np.isfinite(vals[i]):
                        diverged = True
                        break
        if diverged:
            vals[i:] = 0.0
        out[algo] = (vals, diverged)
    return out


def _n_workers() -> int:
    try:
        return max(1, int(os.environ.get("BEAMFORM_THREADS", "1")))
    except ValueError:
        return 1


def run_ensembles(scenario: Scenario, algos=ALGORITHMS) -> dict[str, SinrCurve]:
    """Run several algorithms on shared per-run snapshot blocks.

    Every run draws its block from the stream keyed on
    ``(master_seed, run_index)``, and all algorithms see the same block.
    Linear SINR is summed in run-index order and converted to dB last, so
    the result does not depend on how runs are scheduled.
    """
    algos = tuple(algos)
    for a in algos:
        if a not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {a!r}; choose from {ALGORITHMS}")
    runs = range(scenario.n_runs)
    workers = min(_n_workers(), scenario.n_runs)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_run_one, [scenario] * len(runs), [algos] * len(runs), runs))
    else:
        results = [_run_one(scenario, algos, k) for k in runs]

    curves = {}
    for algo in algos:
        acc = np.zeros(scenario.n_snapshots)
        n_diverged = 0
        for res in results:
            vals, diverged = res[algo]
            acc += vals
            n_diverged += diverged
        if n_diverged:
            log.warning("%s: %d of %d runs diverged", algo, n_diverged, scenario.n_runs)
        mean = acc / scenario.n_runs
        with np.errstate(divide="ignore"):
            db = np.maximum(10 * np.log10(mean), SINR_FLOOR_DB)
        mu_T, mu_w = scenario.step_sizes(algo)
        curves[algo] = SinrCurve(
            algorithm=algo,
            snapshots=np.arange(1, scenario.n_snapshots + 1),
            sinr_db=db,
            n_runs=scenario.n_runs,
            params={
                "rank": scenario.algo_rank(algo),
                "mu_T": mu_T,
                "mu_w": mu_w,
                "seed": scenario.master_seed,
                "presumed_doa_deg": scenario.array.presumed_doa_deg,
                "n_diverged": n_diverged,
            },
        )
    return curves


def run_ensemble(scenario: Scenario, algo: str) -> SinrCurve:
    return run_ensembles(scenario, (algo,))[algo]


def rank_sweep(scenario: Scenario, algo: str, ranks, n_fixed: int = 500) -> list[tuple[int, float]]:
    """Ensemble-averaged SINR after ``n_fixed`` snapshots for each rank."""
    if not algo.startswith("jio"):
        raise ValueError(f"rank sweep needs a reduced-rank algorithm, got {algo!r}")
    m = scenario.array.m
    out = []
    for r in ranks:
        if not 1 <= r <= m - 1:
            raise ValueError(f"rank {r} outside [1, {m - 1}]")
        curve = run_ensemble(replace(scenario, rank=int(r), n_snapshots=int(n_fixed)), algo)
        out.append((int(r), float(curve.sinr_db[-1])))
    return out


def mismatch_experiment(scenario: Scenario, algos=ALGORITHMS, mismatch_deg: float = 2.0) -> list[SinrCurve]:
    """Constrain toward ``true DOA + mismatch_deg`` while signals keep the true DOA."""
    if abs(mismatch_deg) >= 90:
        raise ValueError("mismatch must be smaller than 90 degrees")
    cfg = scenario.array
    mis = replace(scenario, array=cfg.with_presumed_doa(cfg.doas_deg[0] + mismatch_deg))
    curves = run_ensembles(mis, algos)
    for c in curves.values():
        c.params["mismatch_deg"] = float(mismatch_deg)
    return [curves[a] for a in algos]


def steady_state_stats(curve: SinrCurve, window: int | None = None) -> tuple[float, float]:
    """Mean and (population) standard deviation of the last ``window`` points.

    The default window is the last 10% of the curve.
    """
    n = len(curve.sinr_db)
    if window is None:
        window = max(1, n // 10)
    if not 1 <= window <= n:
        raise ValueError(f"window {window} not in [1, {n}]")
    tail = np.asarray(curve.sinr_db[-window:], dtype=float)
    return float(tail.mean()), float(tail.std())


def convergence_snapshot(curve: SinrCurve, tol_db: float = 2.0, window: int | None = None) -> int:
    """First snapshot index at which the curve is within ``tol_db`` of its steady state."""
    ss, _ = steady_state_stats(curve, window)
    hit = np.nonzero(np.asarray(curve.sinr_db) >= ss - tol_db)[0]
    return int(curve.snapshots[hit[0]])


# Operation counts per snapshot: (additions, multiplications) as functions of (m, r).
COMPLEXITY_ROWS = {
    "Full-Rank-CMV": (lambda m, r: 3 * m - 1, lambda m, r: 4 * m + 1),
    "Full-Rank-CCM": (lambda m, r: 3 * m, lambda m, r: 4 * m + 3),
    "MSWF-CMV": (
        lambda m, r: r * m**2 + r * m + m + 2 * r - 2,
        lambda m, r: r * m**2 + m**2 + 2 * r * m + 5 * r + 2,
    ),
    "MSWF-CCM": (
        lambda m, r: r * m**2 + r * m + m + 2 * r - 1,
        lambda m, r: r * m**2 + m**2 + 2 * r * m + 5 * r + 4,
    ),
    "AVF": (
        lambda m, r: r * (4 * m**2 + m - 2) + 5 * m**2 - m - 1,
        lambda m, r: r * (5 * m**2 + 3 * m) + 8 * m**2 + 2 * m,
    ),
    "JIO-CMV": (lambda m, r: 4 * r * m + m + 2 * r - 3, lambda m, r: 4 * r * m + m + 7 * r + 3),
    "JIO-CMV-GS": (lambda m, r: 7 * r * m - m - 1, lambda m, r: 7 * r * m - 2 * m + 8 * r + 2),
    "JIO-CCM": (lambda m, r: 4 * r * m + m + 2 * r - 2, lambda m, r: 4 * r * m + m + 7 * r + 6),
    "JIO-CCM-GS": (lambda m, r: 7 * r * m - m, lambda m, r: 7 * r * m - 2 * m + 8 * r + 5),
}


def complexity_counts(algorithm: str, m: int, r: int = 1) -> ComplexityCount:
    try:
        adds, mults = COMPLEXITY_ROWS[algorithm]
    except KeyError:
        raise ValueError(f"unknown complexity row {algorithm!r}; choose from {list(COMPLEXITY_ROWS)}") from None
    if m < 1 or r < 1:
        raise ValueError("m and r must be >= 1")
    return ComplexityCount(algorithm, int(adds(m, r)), int(mults(m, r)))


def complexity_table(m: int, r: int) -> list[ComplexityCount]:
    return [complexity_counts(name, m, r) for name in COMPLEXITY_ROWS]


def _open_out(path_or_file):
    if hasattr(path_or_file, "write"):
        return path_or_file, False
    return open(path_or_file, "w", newline=""), True


def _write_rows(path_or_file, header, rows):
    fh, close = _open_out(path_or_file)
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    finally:
        if close:
            fh.close()


def write_curves_csv(curves, path_or_file, extra_cols=()):
    header = ["algorithm", "snapshot", "sinr_db", "n_runs", "rank", "mu_T", "mu_w", "seed", *extra_cols]
    rows = []
    for c in curves:
        p = c.params
        tail = [p[k] for k in extra_cols]
        for n, v in zip(c.snapshots, c.sinr_db):
            rows.append([c.algorithm, int(n), repr(float(v)), c.n_runs, p["rank"], p["mu_T"], p["mu_w"], p["seed"], *tail])
    _write_rows(path_or_file, header, rows)


def write_rank_sweep_csv(results: dict, path_or_file):
    rows = [[algo, r, repr(float(v))] for algo, pts in results.items() for r, v in pts]
    _write_rows(path_or_file, ["algorithm", "rank", "sinr_db"], rows)


def write_complexity_csv(counts, m, r, path_or_file):
    rows = [[c.algorithm, m, r, c.additions, c.multiplications] for c in counts]
    _write_rows(path_or_file, ["algorithm", "m", "r", "additions", "multiplications"], rows)
