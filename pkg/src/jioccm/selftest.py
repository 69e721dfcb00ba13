"""Fast invariant checks run by ``jioccm selftest``."""

from __future__ import annotations

from dataclasses import replace

import numpy as np

from .array_model import ArrayConfig, default_doas, generate_block
from .fullrank import ccm_sg_step, init_fullrank
from .jio import forward, grad_T, grad_w, init_state, jio_step
from .metrics import complexity_counts


def _scenario_block(n, seed=7):
    cfg = ArrayConfig(m=32, doas_deg=default_doas(7))
    return cfg, generate_block(cfg, n, seed)


def check_constraints(n=2000):
    cfg, block = _scenario_block(n)
    worst_c = worst_o = 0.0
    for gs in (False, True):
        st = init_state(cfg.constraint_vector(), 5, 0.003 if gs else 0.002, 0.0007 if gs else 0.001, gs=gs)
        for x in block.x:
            st, _ = jio_step(st, x)
            worst_c = max(worst_c, abs(st.constraint_value() - 1))
            if gs:
                worst_o = max(worst_o, np.linalg.norm(st.T.conj().T @ st.T - np.eye(st.r)))
    return worst_c <= 1e-6 and worst_o <= 1e-8, f"max |w^H a - 1| = {worst_c:.2e}, max ||T^H T - I|| = {worst_o:.2e}"


def check_gradients(n_points=20, h=1e-6, seed=1):
    rng = np.random.default_rng(seed)
    cfg, block = _scenario_block(n_points, seed)
    a0 = cfg.constraint_vector()
    worst = 0.0
    for x in block.x:
        st = init_state(a0, 5, 0.0, 0.0)
        st = replace(st, T=st.T + 0.1 * (rng.standard_normal(st.T.shape) + 1j * rng.standard_normal(st.T.shape)))
        s = forward(st, x)

        def cost(T, wb):
            y = np.vdot(wb, T.conj().T @ x)
            return (abs(y) ** 2 - 1) ** 2

        D = rng.standard_normal(st.T.shape) + 1j * rng.standard_normal(st.T.shape)
        fd = (cost(st.T + h * D, st.w_bar) - cost(st.T - h * D, st.w_bar)) / (2 * h)
        an = 2 * np.real(np.vdot(grad_T(s, st), D))
        worst = max(worst, abs(fd - an) / max(abs(an), 1e-12))
        d = rng.standard_normal(st.r) + 1j * rng.standard_normal(st.r)
        fd = (cost(st.T, st.w_bar + h * d) - cost(st.T, st.w_bar - h * d)) / (2 * h)
        an = 2 * np.real(np.vdot(grad_w(s, st), d))
        worst = max(worst, abs(fd - an) / max(abs(an), 1e-12))
    return worst < 1e-4, f"max relative error = {worst:.2e}"


def check_fullrank_specialization(n=1000):
    cfg, block = _scenario_block(n)
    a0 = cfg.constraint_vector()
    st = init_state(a0, cfg.m, 0.0, 0.001)
    fr = init_fullrank(a0, 0.001)
    worst = 0.0
    for x in block.x:
        st, _ = jio_step(st, x)
        fr = ccm_sg_step(fr, x)
        worst = max(worst, np.max(np.abs(st.T @ st.w_bar - fr.w)))
    return worst <= 1e-12, f"max |T w_bar - w| = {worst:.2e}"


def check_complexity():
    c = complexity_counts("JIO-CCM", 32, 5)
    ok = (c.additions, c.multiplications) == (680, 713)
    return ok, f"JIO-CCM (m=32, r=5): {c.additions} additions, {c.multiplications} multiplications"


CHECKS = {
    "constraints": check_constraints,
    "gradients": check_gradients,
    "fullrank-specialization": check_fullrank_specialization,
    "complexity": check_complexity,
}


def run_selftest(out=print) -> bool:
    all_ok = True
    for name, fn in CHECKS.items():
        ok, msg = fn()
        all_ok &= bool(ok)
        out(f"[{'PASS' if ok else 'FAIL'}] {name}: {msg}")
    return all_ok
