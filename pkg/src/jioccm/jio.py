"""Joint iterative optimization of a transformation matrix ``T`` (m x r)
and a reduced-rank weight vector ``w_bar`` (r) under the constrained
constant modulus criterion.

The filter output is ``y = w_bar^H T^H x`` and the constraint is
``w_bar^H T^H a0 = 1``. Both quantities are adapted by stochastic gradient
steps whose directions are projected so the constraint survives each
update. The Gram-Schmidt variant orthonormalizes ``T`` after its update and
then rescales ``w_bar`` to restore the constraint.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .array_model import SnapshotBlock
from .fullrank import lcmv_solve, loaded_inverse

__all__ = [
    "JioState",
    "CmSample",
    "DegenerateBasisError",
    "init_state",
    "project",
    "forward",
    "cm_cost",
    "grad_T",
    "grad_w",
    "update_T",
    "update_w",
    "gram_schmidt",
    "restore_constraint",
    "jio_step",
    "equivalent_filter",
    "closed_form_w",
    "closed_form_T",
]


class DegenerateBasisError(ValueError):
    """Columns handed to Gram-Schmidt are (numerically) linearly dependent."""


@dataclass(frozen=True)
class JioState:
    T: np.ndarray
    w_bar: np.ndarray
    mu_T: float
    mu_w: float
    a0: np.ndarray
    a_bar: np.ndarray
    gs_enabled: bool = False
    gs_period: int = 1
    n_steps: int = 0

    @property
    def m(self) -> int:
        return self.T.shape[0]

    @property
    def r(self) -> int:
        return self.T.shape[1]

    def constraint_value(self) -> complex:
        return complex(np.vdot(self.w_bar, self.a_bar))


@dataclass(frozen=True)
class CmSample:
    x: np.ndarray
    x_bar: np.ndarray
    y: complex
    e: float


def init_state(a0, r: int, mu_T: float, mu_w: float, gs: bool = False, gs_period: int = 1) -> JioState:
    """``T(0) = [I_r; 0]`` and ``w_bar(0) = a_bar / ||a_bar||^2``.

    ``r == m`` is accepted (``T = I``), which reduces the scheme to the
    full-rank CCM filter.
    """
    a0 = np.asarray(a0, dtype=complex)
    m = a0.shape[0]
    if not 1 <= r <= m:
        raise ValueError(f"rank must satisfy 1 <= r <= m, got r={r}, m={m}")
    if gs_period < 1:
        raise ValueError("gs_period must be >= 1")
    T = np.zeros((m, r), dtype=complex)
    T[:r, :r] = np.eye(r)
    a_bar = a0[:r].copy()
    nrm2 = np.vdot(a_bar, a_bar).real
    if nrm2 == 0:
        raise ValueError("leading r entries of a0 vanish; constraint cannot be met with T(0) = [I; 0]")
    return JioState(
        T=T,
        w_bar=a_bar / nrm2,
        mu_T=float(mu_T),
        mu_w=float(mu_w),
        a0=a0,
        a_bar=a_bar,
        gs_enabled=bool(gs),
        gs_period=int(gs_period),
    )


def project(st: JioState, x) -> np.ndarray:
    x = np.asarray(x)
    if x.shape != (st.m,):
        raise ValueError(f"dimension mismatch: expected ({st.m},), got {x.shape}")
    return st.T.conj().T @ x


def forward(st: JioState, x) -> CmSample:
    x_bar = project(st, x)
    y = complex(np.vdot(st.w_bar, x_bar))
    # products, not **: a diverging filter should overflow to inf, not raise
    return CmSample(x=np.asarray(x), x_bar=x_bar, y=y, e=y.real * y.real + y.imag * y.imag - 1.0)


def equivalent_filter(st: JioState) -> np.ndarray:
    """Full-length weights ``T w_bar`` realized by the reduced-rank scheme."""
    return st.T @ st.w_bar


def cm_cost(samples) -> float:
    samples = list(samples)
    if not samples:
        raise ValueError("cm_cost needs at least one sample")
    return float(np.mean([s.e ** 2 for s in samples]))


def grad_T(s: CmSample, st: JioState) -> np.ndarray:
    """Unconstrained part ``2 e y* x w_bar^H`` of the gradient w.r.t. ``T``.

    This is the conjugate-Wirtinger derivative of ``(|y|^2 - 1)^2``, so the
    first-order change of the instantaneous cost along ``D`` is
    ``2 Re sum(conj(G) * D)``.
    """
    return 2.0 * s.e * np.conj(s.y) * np.outer(s.x, st.w_bar.conj())


def grad_w(s: CmSample, st: JioState) -> np.ndarray:
    """Unconstrained part ``2 e y* x_bar`` of the gradient w.r.t. ``w_bar``."""
    return 2.0 * s.e * np.conj(s.y) * s.x_bar


def update_T(st: JioState, s: CmSample) -> JioState:
    """``T <- T - mu_T e y* [x - a0 a0^H x / (a0^H a0)] w_bar^H``.

    For unit-norm ``a0`` this is ``x w_bar^H - a0 w_bar^H a0^H x`` in the
    bracket. The bracket is orthogonal to ``a0`` so ``T^H a0`` is unchanged.
    """
    a0 = st.a0
    px = s.x - a0 * (np.vdot(a0, s.x) / np.vdot(a0, a0).real)
    T = st.T - (st.mu_T * s.e * np.conj(s.y)) * np.outer(px, st.w_bar.conj())
    return replace(st, T=T)


def update_w(st: JioState, s: CmSample) -> JioState:
    """``w_bar <- w_bar - mu_w e y* [I - a_bar a_bar^H / (a_bar^H a_bar)] x_bar``."""
    ab = st.a_bar
    nrm2 = np.vdot(ab, ab).real
    if nrm2 == 0:
        raise ZeroDivisionError("a_bar vanished; constraint direction undefined")
    pxb = s.x_bar - ab * (np.vdot(ab, s.x_bar) / nrm2)
    w_bar = st.w_bar - (st.mu_w * s.e * np.conj(s.y)) * pxb
    return replace(st, w_bar=w_bar)


def gram_schmidt(T, tol: float = 1e-12) -> np.ndarray:
    """Orthonormalize the columns of ``T`` in order (modified Gram-Schmidt).

    Column ``l`` has its projections onto the already orthonormalized
    columns ``0..l-1`` removed and is then scaled to unit length, so the
    first output column is ``t_1 / ||t_1||`` and spans are nested.
    """
    T = np.array(T, dtype=complex)
    if T.ndim != 2:
        raise ValueError("expected a 2-D matrix")
    Q = np.empty_like(T)
    for l in range(T.shape[1]):
        v = T[:, l].copy()
        ref = np.linalg.norm(v)
        for j in range(l):
            v -= Q[:, j] * np.vdot(Q[:, j], v)
        nrm = np.linalg.norm(v)
        if ref == 0 or nrm <= tol * max(ref, 1.0):
            raise DegenerateBasisError(f"column {l} is linearly dependent on the previous ones")
        Q[:, l] = v / nrm
    return Q


def restore_constraint(st: JioState) -> JioState:
    """Recompute ``a_bar = T^H a0`` and rescale ``w_bar`` so ``w_bar^H a_bar = 1``."""
    a_bar = st.T.conj().T @ st.a0
    c = np.vdot(st.w_bar, a_bar)
    if c == 0:
        raise ZeroDivisionError("w_bar is orthogonal to the refreshed a_bar")
    return replace(st, a_bar=a_bar, w_bar=st.w_bar / np.conj(c))


def jio_step(st: JioState, x) -> tuple[JioState, CmSample]:
    """Process one snapshot.

    ``y`` and ``e`` are evaluated once with the incoming state and shared by
    both updates. Order: update ``T``; if Gram-Schmidt is due, orthonormalize
    ``T``, refresh ``a_bar``/``w_bar`` and re-project ``x`` onto the new
    basis; then update ``w_bar``.
    """
    s = forward(st, x)
    new = update_T(st, s)
    s_w = s
    if st.gs_enabled and (st.n_steps + 1) % st.gs_period == 0:
        new = restore_constraint(replace(new, T=gram_schmidt(new.T)))
        s_w = replace(s, x_bar=new.T.conj().T @ s.x)
    new = update_w(new, s_w)
    return replace(new, n_steps=st.n_steps + 1), s


def _block_x(block) -> np.ndarray:
    return block.x if isinstance(block, SnapshotBlock) else np.asarray(block)


def closed_form_w(block, st: JioState, loading: float = 1e-6) -> np.ndarray:
    """One evaluation of the reduced-rank CCM normal equations for ``w_bar``.

    Expectations become block averages computed with the current ``(T, w_bar)``:
    ``R_bar = mean(|y|^2 x_bar x_bar^H)``, ``p_bar = mean(y* x_bar)``,
    ``a_bar = T^H a0``. The result meets ``w_bar^H a_bar = 1`` exactly.
    """
    X = _block_x(block)
    Xb = X @ st.T.conj()  # rows are x_bar(i)^T
    y = Xb @ st.w_bar.conj()
    n = X.shape[0]
    Xy = Xb * np.abs(y)[:, None]
    R = Xy.T @ Xy.conj() / n
    p = Xb.T @ y.conj() / n
    a_bar = st.T.conj().T @ st.a0
    return lcmv_solve(loaded_inverse(R, loading), p, a_bar)


def closed_form_T(block, st: JioState, loading: float = 1e-6, w_history=None, window: int | None = None) -> np.ndarray:
    """One evaluation of the CCM normal equations for ``T`` with ``w_bar`` held.

    ``R`` and ``p`` are block averages using the current equivalent filter.
    The covariance of ``w_bar`` is averaged over the last ``window`` entries
    of ``w_history`` (default: just the current ``w_bar``), plus loading.
    The returned matrix meets ``w_bar^H T^H a0 = 1`` exactly.
    """
    X = _block_x(block)
    n = X.shape[0]
    wb = st.w_bar
    y = X @ equivalent_filter(st).conj()
    Xy = X * np.abs(y)[:, None]
    R_inv = loaded_inverse(Xy.T @ Xy.conj() / n, loading)
    p = X.T @ y.conj() / n

    hist = [wb] if w_history is None else list(w_history)
    if window is not None:
        hist = hist[-window:]
    W = np.asarray(hist, dtype=complex)
    Rw_inv = loaded_inverse(W.T @ W.conj() / W.shape[0], loading)

    a0 = st.a0
    beta = np.vdot(wb, Rw_inv @ wb).real
    Rp = R_inv @ p
    Ra = R_inv @ a0
    lam = (beta * np.vdot(a0, Rp) - 1.0) / (beta * np.vdot(a0, Ra).real)
    return np.outer(Rp - lam * Ra, wb.conj()) @ Rw_inv
