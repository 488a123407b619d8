"""Tests for prediction, the detection-adaptive update and estimates."""

import math

import numpy as np
import pytest

from mbcontrol import (
    BernoulliComponent,
    BirthSpec,
    MeasurementModel,
    MotionModel,
    MultiBernoulliBelief,
    extract_estimates,
    predict,
    prune,
    update_known_params,
    update_robust,
)
from mbcontrol.filtering import A_MAX, A_MIN, ncv_noise_cov


def comp(r, u, a, x, w=None, src=None):
    u = np.atleast_1d(u)
    n = u.size
    w = np.full(n, 1.0 / n) if w is None else w
    return BernoulliComponent(r, u, np.broadcast_to(a, n),
                              np.atleast_2d(x), w, src)


def random_belief(rng, m=3, n=40, u=None):
    comps = []
    for _ in range(m):
        uu = rng.integers(0, 2, n) if u is None else np.full(n, u)
        comps.append(BernoulliComponent(
            rng.uniform(0.1, 0.9), uu, rng.uniform(0.05, 0.95, n),
            rng.uniform([0, 0, -10, -10], [1000, 1000, 10, 10], (n, 4)),
            np.full(n, 1.0 / n)))
    return MultiBernoulliBelief(comps)


# ------------------------------------------------------------------- motion

def test_transition_and_noise_matrices():
    m = MotionModel(dt=2.0)
    f = m.transition_matrix()
    x = np.array([1.0, 2.0, 3.0, 4.0])
    assert np.allclose(f @ x, [7.0, 10.0, 3.0, 4.0])
    # white-acceleration covariance, dt = 2, sigma = 2:
    # G = [[2,0],[0,2],[2,0],[0,2]], Q = 4 * G G^T
    q = ncv_noise_cov(m)
    expect = 4.0 * np.array([[4, 0, 4, 0],
                             [0, 4, 0, 4],
                             [4, 0, 4, 0],
                             [0, 4, 0, 4]], dtype=float)
    assert np.allclose(q, expect)


def test_predict_survival_scaling():
    rng = np.random.default_rng(0)
    model = MotionModel(p_s=0.98, p_s_clutter=0.9, sigma_acc=0.0, sigma_a=0.0)
    belief = MultiBernoulliBelief([
        comp(0.5, np.ones(4, dtype=int), 0.5, np.zeros((4, 4))),
        comp(0.4, np.zeros(4, dtype=int), 0.5, np.zeros((4, 4))),
    ])
    pred = predict(belief, model, rng, l_max=10)
    assert math.isclose(pred[0].r, 0.5 * 0.98)
    assert math.isclose(pred[1].r, 0.4 * 0.9)


def test_predict_mixed_class_reweighting():
    rng = np.random.default_rng(1)
    model = MotionModel(p_s=0.8, p_s_clutter=0.4, sigma_acc=0.0, sigma_a=0.0)
    c = comp(1.0, np.array([1, 0]), 0.5, np.zeros((2, 4)),
             np.array([0.5, 0.5]))
    pred = predict(MultiBernoulliBelief([c]), model, rng, l_max=10)
    mass = 0.5 * 0.8 + 0.5 * 0.4
    assert math.isclose(pred[0].r, c.r * mass)
    assert np.allclose(pred[0].w, [0.5 * 0.8 / mass, 0.5 * 0.4 / mass])


def test_predict_noise_covariance_statistics():
    rng = np.random.default_rng(2)
    model = MotionModel(sigma_acc=2.0, sigma_a=0.0)
    n = 20000
    c = comp(0.5, np.ones(n, dtype=int), 0.5, np.zeros((n, 4)))
    pred = predict(MultiBernoulliBelief([c]), model, rng, l_max=10)
    q = np.cov(pred[0].x.T)
    assert np.allclose(q, ncv_noise_cov(model), atol=0.3)


def test_predict_detection_probability_clipping():
    rng = np.random.default_rng(3)
    model = MotionModel(sigma_a=5.0)  # huge jitter forces clipping
    c = comp(0.5, np.ones(200, dtype=int), 0.5, np.zeros((200, 4)))
    pred = predict(MultiBernoulliBelief([c]), model, rng, l_max=10)
    assert pred[0].a.min() >= A_MIN and pred[0].a.max() <= A_MAX
    assert pred[0].a.min() == A_MIN  # clipping actually happened


def test_predict_appends_births():
    rng = np.random.default_rng(4)
    births = [BirthSpec(0.03, 1, [0, 0, -10, -10], [100, 100, 10, 10],
                        0.5, 1.0),
              BirthSpec(0.1, 0, [0, 0, -10, -10], [100, 100, 10, 10],
                        0.1, 0.9)]
    model = MotionModel(births=births)
    pred = predict(MultiBernoulliBelief(), model, rng, l_max=77)
    assert len(pred) == 2
    assert len(pred[0]) == 77
    assert math.isclose(pred[0].r, 0.03)
    assert np.all(pred[1].u == 0)
    assert pred[1].a.min() >= 0.1 and pred[1].a.max() <= 0.9


# ------------------------------------------------------------- measurements

def test_measurement_h_and_range_sigma():
    mm = MeasurementModel(sigma_0=1.0, eta=5e-5)
    z = mm.h(np.array([[3.0, 4.0, 0.0, 0.0]]), [0.0, 0.0])
    assert math.isclose(z[0, 0], math.atan2(4.0, 3.0))
    assert math.isclose(z[0, 1], 5.0)
    assert math.isclose(mm.range_sigma(100.0), 1.0 + 5e-5 * 1e4)
    assert math.isclose(mm.volume, 2.0 * math.pi * mm.r_max)


def test_likelihood_peak_value_and_bearing_wrap():
    mm = MeasurementModel()
    x = np.array([[100.0, 0.0, 0.0, 0.0]])
    z = mm.h(x, [0.0, 0.0])[0]
    g = mm.likelihood(z, x, [0.0, 0.0])[0]
    sr = mm.range_sigma(100.0)
    assert math.isclose(g, 1.0 / (2.0 * math.pi * mm.sigma_theta * sr),
                        rel_tol=1e-12)
    # bearing wrap: measurement at +pi matches a state just below -pi
    x2 = np.array([[-100.0, -1e-6, 0.0, 0.0]])
    g2 = mm.likelihood(np.array([math.pi, 100.0]), x2, [0.0, 0.0])[0]
    assert g2 > 0.9 / (2.0 * math.pi * mm.sigma_theta * sr)


def test_likelihood_prefers_true_state():
    mm = MeasurementModel()
    truth = np.array([[400.0, 300.0, 0.0, 0.0]])
    z = mm.h(truth, [0.0, 0.0])[0]
    far = truth + np.array([[50.0, -30.0, 0.0, 0.0]])
    g = mm.likelihood(z, np.vstack([truth, far]), [0.0, 0.0])
    assert g[0] > 100.0 * g[1]


# ------------------------------------------------------------------- update

def test_update_legacy_hand_value():
    # one component, uniform detection probability a = 0.5, r = 0.2:
    # varrho = 0.5, r_L = 0.2*0.5/(1 - 0.1) = 1/9
    belief = MultiBernoulliBelief(
        [comp(0.2, np.ones(3, dtype=int), 0.5, np.zeros((3, 4)))])
    upd = update_robust(belief, [], [0.0, 0.0], MeasurementModel())
    assert len(upd) == 1
    assert math.isclose(upd[0].r, 0.2 * 0.5 / (1.0 - 0.2 * 0.5), rel_tol=1e-12)
    assert np.allclose(upd[0].w, 1.0 / 3.0)


def test_update_legacy_reweights_by_missed_detection():
    belief = MultiBernoulliBelief([comp(
        0.5, np.ones(2, dtype=int), np.array([0.9, 0.1]),
        np.zeros((2, 4)), np.array([0.5, 0.5]))])
    upd = update_robust(belief, [], [0.0, 0.0], MeasurementModel())
    # weights proportional to w * (1 - a)
    assert np.allclose(upd[0].w, [0.1 / 1.0, 0.9 / 1.0])
    varrho = 0.5 * 0.9 + 0.5 * 0.1
    assert math.isclose(upd[0].r,
                        0.5 * (1.0 - varrho) / (1.0 - 0.5 * varrho))


def test_update_single_clutter_generator_hand_value():
    mm = MeasurementModel()
    a = 0.4
    r = 0.3
    belief = MultiBernoulliBelief(
        [comp(r, np.zeros(2, dtype=int), a, np.zeros((2, 4)))])
    z = np.array([0.3, 500.0])
    upd = update_robust(belief, [z], [0.0, 0.0], mm)
    # psi = a / V for clutter generators, rho = a / V, varrho = a
    rho = a / mm.volume
    denom = 1.0 - r * a
    r_u = (r * (1.0 - r) * rho / denom ** 2) / (r * rho / denom)
    meas_comp = upd[-1]
    assert math.isclose(meas_comp.r, r_u, rel_tol=1e-12)
    # legacy + one measurement component
    assert len(upd) == 2


def test_update_measurement_component_weights():
    mm = MeasurementModel()
    x = np.array([[300.0, 0.0, 0.0, 0.0], [0.0, 300.0, 0.0, 0.0]])
    belief = MultiBernoulliBelief(
        [comp(0.5, np.ones(2, dtype=int), 0.8, x)])
    z = mm.h(x[:1], [0.0, 0.0])[0]
    upd = update_robust(belief, [z], [0.0, 0.0], mm)
    mc = upd[-1]
    # nearly all posterior weight on the particle that explains z
    j = int(np.argmax(mc.w))
    assert np.allclose(mc.x[j], x[0])
    assert mc.w[j] > 0.999


def test_update_known_params_rejects_negative_clutter():
    belief = MultiBernoulliBelief(
        [comp(0.5, np.ones(2, dtype=int), 0.5, np.zeros((2, 4)))])
    with pytest.raises(ValueError):
        update_known_params(belief, [], [0.0, 0.0], MeasurementModel(),
                            -1.0, 0.9)


def test_update_existence_stays_in_unit_interval():
    rng = np.random.default_rng(5)
    mm = MeasurementModel()
    for _ in range(20):
        belief = random_belief(rng)
        zs = [np.array([rng.uniform(-math.pi, math.pi),
                        rng.uniform(0, 1415)]) for _ in range(3)]
        upd = update_robust(belief, zs, [500.0, 500.0], mm)
        r = upd.r
        assert np.all(r > 0.0) and np.all(r < 1.0)
        for c in upd:
            assert math.isclose(c.w.sum(), 1.0, rel_tol=1e-9)


def test_robust_known_params_degeneracy():
    """With u=1 everywhere, detection a == p_D and kappa = 0, the
    detection-adaptive update reproduces the fixed-parameter update."""
    rng = np.random.default_rng(6)
    mm = MeasurementModel()
    worst = 0.0
    for _ in range(50):
        p_d = rng.uniform(0.2, 0.95)
        belief = random_belief(rng, m=int(rng.integers(1, 4)), u=1)
        for c in belief:
            c.a[:] = p_d
        n_z = int(rng.integers(0, 4))
        zs = [np.array([rng.uniform(-math.pi, math.pi),
                        rng.uniform(50, 1200)]) for _ in range(n_z)]
        sensor = rng.uniform(0, 1000, 2)
        u1 = update_robust(belief, zs, sensor, mm)
        u2 = update_known_params(belief, zs, sensor, mm, 0.0, p_d)
        assert len(u1) == len(u2)
        for c1, c2 in zip(u1, u2):
            worst = max(worst, abs(c1.r - c2.r),
                        float(np.abs(c1.w - c2.w).max()))
    assert worst < 1e-10


# -------------------------------------------------------------------- prune

def test_prune_threshold_and_cap():
    rng = np.random.default_rng(7)
    comps = [comp(r, np.ones(5, dtype=int), 0.5, np.zeros((5, 4)))
             for r in (0.9, 1e-4, 0.3, 0.6, 0.2)]
    belief = MultiBernoulliBelief(comps)
    out = prune(belief, r_min=1e-3, m_max=3, l_max=8, rng=rng)
    # low-r component dropped, then top-3 by r in original order
    assert [c.r for c in out] == [0.9, 0.3, 0.6]
    assert all(len(c) == 8 for c in out)
    assert all(np.allclose(c.w, 1.0 / 8) for c in out)


# ---------------------------------------------------------------- estimates

def test_extract_estimates_hand_case():
    t1 = comp(0.8, np.ones(2, dtype=int), 0.9,
              np.array([[100.0, 200.0, 1.0, 0.0], [110.0, 210.0, 1.0, 0.0]]),
              np.array([0.5, 0.5]))
    cg = comp(0.5, np.zeros(2, dtype=int), 0.4, np.zeros((2, 4)))
    est = extract_estimates(MultiBernoulliBelief([t1, cg]))
    assert est.n_targets == 1
    assert np.allclose(est.target_states, [[105.0, 205.0, 1.0, 0.0]])
    # clutter rate = r * E[a | u=0] summed over components
    assert math.isclose(est.clutter_rate, 0.5 * 0.4)
    assert est.all_object_states.shape == (1, 4)


def test_extract_estimates_mixed_component():
    c = comp(1.0, np.array([1, 0]), np.array([0.9, 0.3]),
             np.array([[10.0, 0.0, 0, 0], [0.0, 10.0, 0, 0]]),
             np.array([0.6, 0.4]))
    est = extract_estimates(MultiBernoulliBelief([c]))
    r = c.r  # capped just below 1
    assert est.n_targets == round(r * 0.6)
    assert math.isclose(est.clutter_rate, r * 0.4 * 0.3, rel_tol=1e-6)


def test_extract_estimates_empty():
    est = extract_estimates(MultiBernoulliBelief())
    assert est.n_targets == 0
    assert est.clutter_rate == 0.0
    assert est.target_states.shape == (0, 4)


def test_extract_estimates_clutter_rate_statistics():
    """lambda-hat equals the expected number of clutter detections."""
    rng = np.random.default_rng(8)
    comps = []
    lam_expect = 0.0
    for _ in range(10):
        r = rng.uniform(0.2, 0.9)
        a = rng.uniform(0.05, 0.95, 30)
        comps.append(BernoulliComponent(
            r, np.zeros(30, dtype=np.int8), a,
            np.zeros((30, 4)), np.full(30, 1.0 / 30)))
        lam_expect += r * a.mean()
    est = extract_estimates(MultiBernoulliBelief(comps))
    assert math.isclose(est.clutter_rate, lam_expect, rel_tol=1e-9)
