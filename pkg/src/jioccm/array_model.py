"""Uniform linear array signal model.

Received snapshots follow ``x(i) = A(theta) s(i) + n(i)`` with BPSK sources
and circular complex Gaussian sensor noise. Angles are measured from the
array axis, so broadside is 90 degrees and the phase progression uses
``cos(theta)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "ArrayConfig",
    "SnapshotBlock",
    "steering_vector",
    "steering_matrix",
    "normalize_steering",
    "noise_power",
    "default_doas",
    "make_rng",
    "generate_block",
]


def default_doas(q: int, soi_deg: float = 90.0, span=(20.0, 160.0)) -> list[float]:
    """SOI first, then ``q - 1`` interferers evenly spread over ``span``.

    ``q`` points are laid out on the span and the one closest to the SOI is
    dropped, so interferers never sit on top of the desired user.
    """
    if q < 1:
        raise ValueError("q must be >= 1")
    grid = list(np.linspace(span[0], span[1], q))
    grid.pop(int(np.argmin(np.abs(np.asarray(grid) - soi_deg))))
    return [float(soi_deg)] + [float(g) for g in grid]


@dataclass(frozen=True)
class ArrayConfig:
    """ULA geometry and source constellation.

    ``doas_deg[0]`` is the signal of interest. ``presumed_doa_deg`` is where
    the receiver believes the SOI to be; it defaults to the true DOA.
    ``constraint_norm`` selects the scaling of the constraint vector handed
    to the beamformers: ``"unit-modulus"`` (raw steering vector, so the SOI
    comes out of a constrained filter with unit gain) or ``"unit-norm"``.
    """

    m: int
    doas_deg: tuple[float, ...]
    source_powers: tuple[float, ...] | None = None
    snr_db: float = 10.0
    d_over_lambda: float = 0.5
    presumed_doa_deg: float | None = None
    constraint_norm: str = "unit-modulus"

    def __post_init__(self):
        doas = tuple(float(d) for d in self.doas_deg)
        object.__setattr__(self, "doas_deg", doas)
        powers = self.source_powers
        powers = (1.0,) * len(doas) if powers is None else tuple(float(p) for p in powers)
        object.__setattr__(self, "source_powers", powers)
        if self.presumed_doa_deg is None:
            object.__setattr__(self, "presumed_doa_deg", doas[0] if doas else None)
        self.validate()

    @property
    def q(self) -> int:
        return len(self.doas_deg)

    def validate(self):
        if self.m < 1 or int(self.m) != self.m:
            raise ValueError(f"m must be a positive integer, got {self.m}")
        if not 1 <= self.q <= self.m:
            raise ValueError(f"need 1 <= q <= m, got q={self.q}, m={self.m}")
        if len(self.source_powers) != self.q:
            raise ValueError("source_powers must have one entry per DOA")
        for d in self.doas_deg + (self.presumed_doa_deg,):
            _check_angle(d)
        if len(set(self.doas_deg)) != self.q:
            raise ValueError("DOAs must be pairwise distinct")
        if any(p <= 0 for p in self.source_powers):
            raise ValueError("source powers must be positive")
        if self.d_over_lambda <= 0:
            raise ValueError("d_over_lambda must be positive")
        if self.constraint_norm not in ("unit-modulus", "unit-norm"):
            raise ValueError(f"unknown constraint_norm {self.constraint_norm!r}")

    @property
    def noise_power(self) -> float:
        return noise_power(self)

    def steering(self, theta_deg: float) -> np.ndarray:
        return steering_vector(self, theta_deg)

    def constraint_vector(self) -> np.ndarray:
        """Steering vector toward the presumed SOI DOA, scaled per ``constraint_norm``."""
        a = steering_vector(self, self.presumed_doa_deg)
        if self.constraint_norm == "unit-norm":
            a = normalize_steering(a)
        return a

    def interference_covariance(self) -> np.ndarray:
        """True interference-plus-noise covariance ``sum_k>=1 p_k a_k a_k^H + s_n^2 I``."""
        A = steering_matrix(self, self.doas_deg[1:])
        p = np.asarray(self.source_powers[1:])
        return (A * p) @ A.conj().T + self.noise_power * np.eye(self.m)

    def with_presumed_doa(self, presumed_doa_deg: float) -> "ArrayConfig":
        from dataclasses import replace

        return replace(self, presumed_doa_deg=presumed_doa_deg)

    @classmethod
    def from_dict(cls, d: dict) -> "ArrayConfig":
        doas = d.get("doas_deg")
        if doas is None:
            doas = default_doas(int(d["q"]), d.get("soi_doa_deg", 90.0))
        return cls(
            m=int(d["m"]),
            doas_deg=tuple(doas),
            source_powers=d.get("source_powers"),
            snr_db=float(d.get("snr_db", 10.0)),
            d_over_lambda=float(d.get("d_over_lambda", 0.5)),
            presumed_doa_deg=d.get("presumed_doa_deg"),
            constraint_norm=d.get("constraint_norm", "unit-modulus"),
        )

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "d_over_lambda": self.d_over_lambda,
            "doas_deg": list(self.doas_deg),
            "source_powers": list(self.source_powers),
            "snr_db": self.snr_db,
            "presumed_doa_deg": self.presumed_doa_deg,
            "constraint_norm": self.constraint_norm,
        }

    @classmethod
    def from_json(cls, path) -> "ArrayConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))


def _check_angle(theta_deg):
    if theta_deg is None or not 0.0 < float(theta_deg) < 180.0:
        raise ValueError(f"angle must lie in (0, 180) degrees, got {theta_deg}")


def steering_vector(cfg: ArrayConfig, theta_deg: float) -> np.ndarray:
    """Raw ULA response ``exp(-2j*pi*k*(d/lambda)*cos(theta))``, ``k = 0..m-1``."""
    _check_angle(theta_deg)
    k = np.arange(cfg.m)
    return np.exp(-2j * np.pi * cfg.d_over_lambda * k * np.cos(np.deg2rad(theta_deg)))


def steering_matrix(cfg: ArrayConfig, thetas_deg) -> np.ndarray:
    thetas = list(thetas_deg)
    if not thetas:
        return np.zeros((cfg.m, 0), dtype=complex)
    return np.stack([steering_vector(cfg, t) for t in thetas], axis=1)


def normalize_steering(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    nrm = np.linalg.norm(v)
    if nrm == 0:
        raise ValueError("cannot normalize a zero vector")
    return v / nrm


def noise_power(cfg: ArrayConfig) -> float:
    """Per-sensor noise variance implied by the SOI power and input SNR."""
    return cfg.source_powers[0] / 10 ** (cfg.snr_db / 10)


def make_rng(master_seed: int, run_index: int = 0) -> np.random.Generator:
    """Counter-based Philox stream keyed on ``(master_seed, run_index)``."""
    ss = np.random.SeedSequence([int(master_seed), int(run_index)])
    return np.random.Generator(np.random.Philox(ss))


@dataclass
class SnapshotBlock:
    """``x`` is ``N x m`` (row ``i`` is snapshot ``x(i)``); ``s`` is ``N x q``."""

    x: np.ndarray
    s: np.ndarray
    seed: tuple[int, int] = field(default=(0, 0))

    def __len__(self):
        return self.x.shape[0]


def generate_block(cfg: ArrayConfig, n_snapshots: int, seed: int, run_index: int = 0) -> SnapshotBlock:
    if n_snapshots < 1:
        raise ValueError("n_snapshots must be >= 1")
    rng = make_rng(seed, run_index)
    amps = np.sqrt(np.asarray(cfg.source_powers))
    s = rng.choice([-1.0, 1.0], size=(n_snapshots, cfg.q)) * amps
    A = steering_matrix(cfg, cfg.doas_deg)
    sigma = np.sqrt(cfg.noise_power / 2)
    n = sigma * (rng.standard_normal((n_snapshots, cfg.m)) + 1j * rng.standard_normal((n_snapshots, cfg.m)))
    x = s @ A.T + n
    return SnapshotBlock(x=x, s=s, seed=(int(seed), int(run_index)))
