"""Full-rank constrained beamformers: CMV-SG, CCM-SG and the iterated
closed-form CCM solution."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .array_model import SnapshotBlock

__all__ = [
    "FullRankState",
    "init_fullrank",
    "fullrank_output",
    "ccm_sg_step",
    "cmv_sg_step",
    "ccm_closed_form",
    "lcmv_solve",
    "loaded_inverse",
]


@dataclass(frozen=True)
class FullRankState:
    w: np.ndarray
    mu: float
    a0: np.ndarray


def init_fullrank(a0, mu: float) -> FullRankState:
    """Start from ``a0 / (a0^H a0)``, which meets ``w^H a0 = 1``."""
    a0 = np.asarray(a0, dtype=complex)
    return FullRankState(w=a0 / np.vdot(a0, a0).real, mu=float(mu), a0=a0)


def fullrank_output(st: FullRankState, x) -> complex:
    x = np.asarray(x)
    if x.shape != st.w.shape:
        raise ValueError(f"dimension mismatch: w {st.w.shape}, x {x.shape}")
    return complex(np.vdot(st.w, x))


def _orth(a0, v):
    # v minus its component along a0
    return v - a0 * (np.vdot(a0, v) / np.vdot(a0, a0).real)


def ccm_sg_step(st: FullRankState, x) -> FullRankState:
    """``w <- w - mu e y* [I - a0 a0^H / (a0^H a0)] x`` with ``e = |y|^2 - 1``."""
    y = fullrank_output(st, x)
    e = y.real * y.real + y.imag * y.imag - 1.0
    w = st.w - (st.mu * e * np.conj(y)) * _orth(st.a0, x)
    return replace(st, w=w)


def cmv_sg_step(st: FullRankState, x) -> FullRankState:
    """Frost's constrained LMS: ``w <- P (w - mu y* x) + a0 / (a0^H a0)``."""
    y = fullrank_output(st, x)
    a0 = st.a0
    w = _orth(a0, st.w - st.mu * np.conj(y) * x) + a0 / np.vdot(a0, a0).real
    return replace(st, w=w)


def loaded_inverse(R: np.ndarray, loading: float) -> np.ndarray:
    """Inverse of ``R + loading * mean(diag R) * I``.

    ``loading`` is relative to the mean diagonal. Raises
    ``np.linalg.LinAlgError`` when the loaded matrix is singular.
    """
    n = R.shape[0]
    delta = loading * np.real(np.trace(R)) / n
    Rl = R + delta * np.eye(n)
    if not np.all(np.isfinite(Rl)):
        raise np.linalg.LinAlgError("non-finite covariance estimate")
    inv = np.linalg.inv(Rl)
    if np.linalg.cond(Rl) > 1e15:
        raise np.linalg.LinAlgError("covariance estimate is numerically singular")
    return inv


def lcmv_solve(R_inv: np.ndarray, p: np.ndarray, a: np.ndarray) -> np.ndarray:
    """``R^-1 (p - lam a)`` with ``lam`` chosen so that ``w^H a = 1`` exactly.

    ``lam = (a^H R^-1 p - 1) / (a^H R^-1 a)``.
    """
    Rp = R_inv @ p
    Ra = R_inv @ a
    lam = (np.vdot(a, Rp) - 1.0) / np.vdot(a, Ra).real
    return Rp - lam * Ra


def ccm_closed_form(
    block: SnapshotBlock | np.ndarray,
    a0,
    init_w,
    n_iters: int,
    loading: float = 1e-6,
    mu: float = 0.0,
) -> FullRankState:
    """Fixed-point iteration of the CCM normal equations on a block.

    Each pass recomputes ``y = w^H x`` over the block, forms
    ``R = mean(|y|^2 x x^H)`` and ``p = mean(y* x)``, and solves the
    constrained problem. ``loading`` is relative to the mean diagonal of R.
    """
    X = block.x if isinstance(block, SnapshotBlock) else np.asarray(block)
    a0 = np.asarray(a0, dtype=complex)
    w = np.asarray(init_w, dtype=complex).copy()
    n = X.shape[0]
    for _ in range(n_iters):
        y = X @ w.conj()
        Xy = X * np.abs(y)[:, None]
        R = Xy.T @ Xy.conj() / n
        p = X.T @ y.conj() / n
        w = lcmv_solve(loaded_inverse(R, loading), p, a0)
    return FullRankState(w=w, mu=mu, a0=a0)
