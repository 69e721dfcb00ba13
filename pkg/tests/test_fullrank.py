import numpy as np
import pytest

from jioccm.array_model import ArrayConfig, generate_block, normalize_steering, steering_vector
from jioccm.fullrank import (
    FullRankState,
    ccm_closed_form,
    ccm_sg_step,
    cmv_sg_step,
    fullrank_output,
    init_fullrank,
)
from jioccm.metrics import output_sinr


def crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def ccm_oracle(w, a0, x, mu):
    # element-by-element evaluation of w - mu e y* [I - a a^H/(a^H a)] x
    m = len(w)
    y = sum(np.conj(w[k]) * x[k] for k in range(m))
    e = (y.real**2 + y.imag**2) - 1
    aa = sum(abs(a0[k]) ** 2 for k in range(m))
    ax = sum(np.conj(a0[k]) * x[k] for k in range(m))
    return np.array([w[k] - mu * e * np.conj(y) * (x[k] - a0[k] * ax / aa) for k in range(m)])


def cmv_oracle(w, a0, x, mu):
    m = len(w)
    y = sum(np.conj(w[k]) * x[k] for k in range(m))
    v = [w[k] - mu * np.conj(y) * x[k] for k in range(m)]
    aa = sum(abs(a0[k]) ** 2 for k in range(m))
    av = sum(np.conj(a0[k]) * v[k] for k in range(m))
    return np.array([v[k] - a0[k] * av / aa + a0[k] / aa for k in range(m)])


class TestOutput:
    def test_unit_vector(self):
        st = FullRankState(w=np.eye(4)[0].astype(complex), mu=0.0, a0=np.ones(4))
        assert fullrank_output(st, np.array([3 + 1j, 2, 5, 7])) == 3 + 1j

    def test_matched(self):
        a0 = normalize_steering(steering_vector(ArrayConfig(m=6, doas_deg=(90.0,)), 70.0))
        st = FullRankState(w=a0, mu=0.0, a0=a0)
        assert fullrank_output(st, a0) == pytest.approx(1.0)

    def test_random_against_sum(self):
        rng = np.random.default_rng(0)
        w, x = crandn(rng, 5), crandn(rng, 5)
        st = FullRankState(w=w, mu=0.0, a0=np.ones(5))
        assert fullrank_output(st, x) == pytest.approx(sum(np.conj(w[k]) * x[k] for k in range(5)), abs=1e-13)

    def test_mismatch(self):
        st = FullRankState(w=np.ones(4, complex), mu=0.0, a0=np.ones(4))
        with pytest.raises(ValueError):
            fullrank_output(st, np.ones(3))


class TestCcmSg:
    def test_unit_modulus_output_leaves_w(self):
        a0 = np.ones(4, complex)
        st = init_fullrank(a0, 0.01)
        x = np.array([1, 1j, -1, 0.5])  # y = sum(x)/4 -> pick x with |y| = 1
        x = x / abs(fullrank_output(st, x))
        np.testing.assert_allclose(ccm_sg_step(st, x).w, st.w, atol=1e-15)

    def test_x_along_constraint(self):
        rng = np.random.default_rng(1)
        a0 = steering_vector(ArrayConfig(m=4, doas_deg=(90.0,)), 60.0)
        st = FullRankState(w=crandn(rng, 4), mu=0.1, a0=a0)
        np.testing.assert_allclose(ccm_sg_step(st, (2 - 1j) * a0).w, st.w, atol=1e-14)

    @pytest.mark.parametrize("unit_norm", [True, False])
    def test_against_oracle(self, unit_norm):
        rng = np.random.default_rng(2)
        a0 = crandn(rng, 4)
        if unit_norm:
            a0 /= np.linalg.norm(a0)
        for _ in range(20):
            w, x = crandn(rng, 4), crandn(rng, 4)
            got = ccm_sg_step(FullRankState(w=w, mu=0.001, a0=a0), x).w
            np.testing.assert_allclose(got, ccm_oracle(w, a0, x, 0.001), atol=1e-12)

    def test_constraint_preserved_long_run(self):
        cfg = ArrayConfig(m=8, doas_deg=(90.0, 40.0, 120.0))
        a0 = cfg.constraint_vector()
        st = init_fullrank(a0, 0.001)
        for x in generate_block(cfg, 10_000, 4).x:
            st = ccm_sg_step(st, x)
        assert abs(np.vdot(st.w, a0) - 1) <= 1e-9

    def test_direction_is_projected_gradient(self):
        # central differences of J(w) = (|w^H x|^2 - 1)^2 along constraint-tangent directions
        rng = np.random.default_rng(3)
        m = 6
        a0 = normalize_steering(crandn(rng, m))
        P = np.eye(m) - np.outer(a0, a0.conj())
        h = 1e-6
        for _ in range(10):
            w, x = crandn(rng, m), crandn(rng, m)
            mu = 1.0
            step = w - ccm_sg_step(FullRankState(w=w, mu=mu, a0=a0), x).w  # = e y* P x

            def J(v):
                return (abs(np.vdot(v, x)) ** 2 - 1) ** 2

            d = P @ crandn(rng, m)
            fd = (J(w + h * d) - J(w - h * d)) / (2 * h)
            # dJ along d is 2 Re<grad, d> with grad = 2 e y* x; projecting onto the tangent leaves it unchanged
            an = 2 * np.real(np.vdot(2 * step, d))
            assert abs(fd - an) / abs(an) < 1e-4


class TestCmvSg:
    def test_quiescent(self):
        a0 = steering_vector(ArrayConfig(m=5, doas_deg=(90.0,)), 50.0)
        st = init_fullrank(a0, 0.01)
        np.testing.assert_allclose(cmv_sg_step(st, np.zeros(5)).w, st.w, atol=1e-15)

    def test_restores_constraint(self):
        rng = np.random.default_rng(4)
        a0 = crandn(rng, 7)
        for _ in range(20):
            st = FullRankState(w=crandn(rng, 7), mu=0.05, a0=a0)
            w = cmv_sg_step(st, crandn(rng, 7)).w
            assert abs(np.vdot(w, a0) - 1) <= 1e-12

    def test_against_oracle(self):
        rng = np.random.default_rng(5)
        a0 = crandn(rng, 3)
        for _ in range(20):
            w, x = crandn(rng, 3), crandn(rng, 3)
            got = cmv_sg_step(FullRankState(w=w, mu=0.01, a0=a0), x).w
            np.testing.assert_allclose(got, cmv_oracle(w, a0, x, 0.01), atol=1e-12)


class TestClosedForm:
    def test_zero_iterations(self):
        rng = np.random.default_rng(6)
        w0 = crandn(rng, 4)
        st = ccm_closed_form(crandn(rng, 20, 4), np.ones(4), w0, n_iters=0)
        assert np.array_equal(st.w, w0)

    def test_noiseless_single_source(self):
        cfg = ArrayConfig(m=2, doas_deg=(90.0,), snr_db=np.inf)
        block = generate_block(cfg, 50, 1)
        a0 = cfg.constraint_vector()
        st = ccm_closed_form(block, a0, a0 / 2, n_iters=10, loading=1e-6)
        assert abs(np.vdot(st.w, a0) - 1) < 1e-12
        np.testing.assert_allclose(np.abs(block.x @ st.w.conj()), 1.0, atol=1e-9)

    def test_constraint_every_iterate(self):
        cfg = ArrayConfig(m=6, doas_deg=(90.0, 30.0, 140.0))
        block = generate_block(cfg, 300, 2)
        a0 = cfg.constraint_vector()
        w = a0 / 6
        for _ in range(5):
            w = ccm_closed_form(block, a0, w, n_iters=1).w
            assert abs(np.vdot(w, a0) - 1) < 1e-12

    def test_beats_sg_on_block(self):
        cfg = ArrayConfig(m=4, doas_deg=(90.0, 40.0))
        block = generate_block(cfg, 2000, 3)
        a0 = cfg.constraint_vector()
        sg = init_fullrank(a0, 0.001)
        for x in block.x:
            sg = ccm_sg_step(sg, x)
        cf = ccm_closed_form(block, a0, a0 / 4, n_iters=20, loading=1e-6)
        assert output_sinr(cf.w, cfg) >= output_sinr(sg.w, cfg) - 0.5

    def test_singular(self):
        with pytest.raises(np.linalg.LinAlgError):
            ccm_closed_form(np.zeros((10, 3), complex), np.ones(3), np.ones(3) / 3, n_iters=1, loading=0.0)
