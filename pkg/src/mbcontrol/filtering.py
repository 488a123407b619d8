"""Robust multi-Bernoulli recursion on the hybrid target/clutter space.

Prediction with nearly-constant-velocity kinematics and birth, the
robust measurement update (per-particle detection probability, clutter
handled by u=0 clutter-generator components, no exogenous clutter
intensity), a known-parameter baseline update, pruning and estimate
extraction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _fast
from .core import (
    R_CAP,
    BernoulliComponent,
    MultiBernoulliBelief,
    resample_component,
)

A_MIN, A_MAX = 0.01, 0.99

# library defaults; config-exposed everywhere they are used
DEFAULT_L_MAX = 1000
DEFAULT_M_MAX = 60
DEFAULT_R_MIN = 1e-3


@dataclass
class BirthSpec:
    """One Bernoulli birth component, sampled fresh each prediction."""

    r: float
    u: int
    x_low: np.ndarray   # (4,) lower corner of [px, py, vx, vy] box
    x_high: np.ndarray  # (4,) upper corner
    a_low: float
    a_high: float

    def sample(self, n, rng):
        x = rng.uniform(np.asarray(self.x_low, dtype=float),
                        np.asarray(self.x_high, dtype=float), size=(n, 4))
        a = rng.uniform(self.a_low, self.a_high, size=n)
        return BernoulliComponent(self.r, np.full(n, self.u, dtype=np.int8),
                                  a, x, np.full(n, 1.0 / n))


@dataclass
class MotionModel:
    p_s: float = 0.98        # target survival
    p_s_clutter: float = 0.9  # clutter-generator survival
    dt: float = 1.0
    sigma_acc: float = 2.0   # white acceleration noise, m/s^2
    sigma_a: float = 0.02    # detection-probability jitter
    births: list = field(default_factory=list)

    def transition_matrix(self):
        dt = self.dt
        return np.array([[1, 0, dt, 0],
                         [0, 1, 0, dt],
                         [0, 0, 1, 0],
                         [0, 0, 0, 1]], dtype=float)

    def noise_gain(self):
        dt = self.dt
        return np.array([[0.5 * dt * dt, 0],
                         [0, 0.5 * dt * dt],
                         [dt, 0],
                         [0, dt]], dtype=float)


def ncv_noise_cov(model):
    """Process-noise covariance of the discrete white-acceleration model."""
    g = model.noise_gain()
    return model.sigma_acc ** 2 * g @ g.T


@dataclass
class MeasurementModel:
    """Bearing-range sensor with distance-growing range noise.

    z = [atan2(py - sy, px - sx), ||p - s||]; sigma_R(d) = sigma_0 +
    eta * d^2; observation volume V = 2*pi*r_max.
    """

    sigma_theta: float = math.pi / 180.0
    sigma_0: float = 1.0
    eta: float = 5e-5
    r_max: float = 1415.0

    @property
    def volume(self):
        return 2.0 * math.pi * self.r_max

    def h(self, x, sensor):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        d = x[:, :2] - np.asarray(sensor, dtype=float)[None, :]
        return np.column_stack([np.arctan2(d[:, 1], d[:, 0]),
                                np.hypot(d[:, 0], d[:, 1])])

    def range_sigma(self, dist):
        return self.sigma_0 + self.eta * np.asarray(dist, dtype=float) ** 2

    def likelihood(self, z, x, sensor):
        """g(z | x) for every kinematic state row of ``x``."""
        pred = self.h(x, sensor)
        dtheta = np.angle(np.exp(1j * (z[0] - pred[:, 0])))
        sr = self.range_sigma(pred[:, 1])
        lt = -0.5 * (dtheta / self.sigma_theta) ** 2 - math.log(self.sigma_theta)
        lr = -0.5 * ((z[1] - pred[:, 1]) / sr) ** 2 - np.log(sr)
        return np.exp(lt + lr - math.log(2.0 * math.pi))


def predict(belief, model, rng, l_max=DEFAULT_L_MAX):
    """Survival + NCV propagation of every component, then births.

    Existence decays by the weight-mixed survival probability; particle
    weights are reweighted by per-class survival; the detection
    probability receives clipped Gaussian jitter.
    """
    f = model.transition_matrix()
    g = model.noise_gain()
    out = []
    for c in belief:
        ps = np.where(c.u == 1, model.p_s, model.p_s_clutter)
        mass = float((c.w * ps).sum())
        if mass <= 0.0:
            continue
        accel = rng.normal(0.0, model.sigma_acc, size=(len(c), 2))
        x = c.x @ f.T + accel @ g.T
        a = np.clip(c.a + rng.normal(0.0, model.sigma_a, size=len(c)),
                    A_MIN, A_MAX)
        out.append(BernoulliComponent(min(c.r * mass, R_CAP), c.u, a, x,
                                      c.w * ps / mass))
    for spec in model.births:
        out.append(spec.sample(l_max, rng))
    return MultiBernoulliBelief(out)


def _update(belief, measurements, sensor, model, det, clutter_intensity):
    out = []
    for i, c in enumerate(belief):
        varrho = float((c.w * det[i]).sum())
        r_l = c.r * (1.0 - varrho) / (1.0 - c.r * varrho)
        w = c.w * (1.0 - det[i])
        total = w.sum()
        if total <= 0.0 or r_l <= 0.0:
            continue
        out.append(BernoulliComponent(min(r_l, R_CAP), c.u, c.a, c.x,
                                      w / total, c.src))
    measurements = [np.asarray(z, dtype=float) for z in measurements]
    if measurements and len(belief):
        # flatten every cloud once; each measurement reuses the arrays
        sizes = np.array([len(c) for c in belief])
        bounds = np.concatenate([[0], np.cumsum(sizes)])
        u = np.concatenate([c.u for c in belief])
        x = np.concatenate([c.x for c in belief])
        a_all = np.concatenate([c.a for c in belief])
        w_all = np.concatenate([c.w for c in belief])
        det_all = np.concatenate(det)
        src = (np.concatenate([c.src for c in belief])
               if all(c.src is not None for c in belief) else None)
        r = belief.r
        varrho = np.add.reduceat(w_all * det_all, bounds[:-1])
        denom = 1.0 - r * varrho
        sensor = np.asarray(sensor, dtype=float)
        for z in measurements:
            comp = _measurement_component(
                z, sensor, model, clutter_intensity, r, denom, bounds,
                u, x, a_all, w_all, det_all, src)
            if comp is not None:
                out.append(comp)
    return MultiBernoulliBelief(out)


def _measurement_component(z, sensor, model, clutter_intensity, r, denom,
                           bounds, u, x, a, w, det, src):
    """One measurement-updated Bernoulli component (flattened clouds)."""
    psi = _fast.measurement_psi(
        x, det, u, z[0], z[1], sensor[0], sensor[1],
        model.sigma_theta, model.sigma_0, model.eta, model.volume)
    w_psi = w * psi
    rho = np.add.reduceat(w_psi, bounds[:-1])
    num = float((r * (1.0 - r) * rho / denom ** 2).sum())
    den = clutter_intensity / model.volume + float((r * rho / denom).sum())
    if den <= 0.0 or num <= 0.0:
        return None
    fac = r / denom
    w_out = np.repeat(fac, np.diff(bounds)) * w_psi
    total = w_out.sum()
    if total <= 0.0:
        return None
    keep = w_out > total * 1e-12
    return BernoulliComponent(min(num / den, R_CAP), u[keep], a[keep],
                              x[keep], w_out[keep] / w_out[keep].sum(),
                              None if src is None else src[keep])


def update_robust(belief, measurements, sensor, model, clutter_intensity=0.0):
    """Robust update: detection probability comes from the particles.

    Legacy (missed-detection) components use the per-particle (1 - a)
    factor; each measurement spawns one component whose per-particle
    likelihood is a*g(z|x) for targets and a/V for clutter generators.
    ``clutter_intensity`` defaults to 0 (no exogenous clutter model) and
    exists as the hook the known-parameter baseline shares.
    """
    det = [c.a for c in belief]
    return _update(belief, measurements, sensor, model, det, clutter_intensity)


def update_known_params(belief, measurements, sensor, model, kappa, p_d):
    """Classical multi-Bernoulli update with fixed p_D and clutter rate.

    kappa is the mean clutter count per scan; the per-measurement clutter
    density is kappa / V.
    """
    if kappa < 0.0:
        raise ValueError("clutter intensity must be nonnegative")
    det = [np.full(len(c), p_d) for c in belief]
    return _update(belief, measurements, sensor, model, det, kappa)


def prune(belief, r_min=DEFAULT_R_MIN, m_max=DEFAULT_M_MAX,
          l_max=DEFAULT_L_MAX, rng=None):
    """Threshold by r, cap count, resample survivors to equal weights."""
    keep = [i for i, c in enumerate(belief) if c.r >= r_min]
    if len(keep) > m_max:
        order = sorted(keep, key=lambda i: -belief[i].r)[:m_max]
        keep = sorted(order)
    if rng is None:
        rng = np.random.default_rng()
    return MultiBernoulliBelief(
        [resample_component(belief[i], l_max, rng) for i in keep])


@dataclass
class EstimateSummary:
    n_targets: int
    target_states: np.ndarray      # (n_targets, 4)
    clutter_rate: float
    all_object_states: np.ndarray  # (n_all, 4), targets and clutter gens


def _top_means(belief, scores, n, mask_u=None):
    order = np.argsort(-np.asarray(scores))[:n]
    states = []
    for i in order:
        c = belief[i]
        mask = np.ones(len(c), dtype=bool) if mask_u is None else c.u == mask_u
        w = c.w[mask]
        if w.sum() <= 0.0:
            continue
        states.append(w @ c.x[mask] / w.sum())
    return np.array(states) if states else np.empty((0, 4))


def extract_estimates(belief):
    """Cardinality, target states and clutter-rate point estimates.

    Target cardinality rounds the summed u=1 existence mass; clutter
    rate is sum_i r_i(0) * E[a | u=0] (expected clutter detections per
    scan).  ``all_object_states`` keeps clutter generators too, for the
    first PIMS stage which does not discriminate them.
    """
    if len(belief) == 0:
        return EstimateSummary(0, np.empty((0, 4)), 0.0, np.empty((0, 4)))
    r1 = np.array([c.r_class(1) for c in belief])
    n_hat = int(round(float(r1.sum())))
    lam = 0.0
    for c in belief:
        m0 = c.class_mass(0)
        if m0 > 0.0:
            mask = c.u == 0
            lam += c.r * m0 * float(c.w[mask] @ c.a[mask]) / m0
    r_all = belief.r
    n_all = int(round(float(r_all.sum())))
    return EstimateSummary(
        n_hat,
        _top_means(belief, r1, n_hat, mask_u=1),
        lam,
        _top_means(belief, r_all, n_all),
    )
