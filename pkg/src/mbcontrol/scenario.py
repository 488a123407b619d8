"""Ground-truth world: target schedule, NCV motion with border
reflection, bearing-range measurements with distance-dependent noise
and detection probability, and Poisson clutter."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .filtering import MeasurementModel


@dataclass
class TargetSchedule:
    birth_step: int
    death_step: int           # inclusive last alive step; <= horizon
    initial_state: np.ndarray  # (4,)


@dataclass
class ScenarioConfig:
    area: tuple = (0.0, 1000.0, 0.0, 1000.0)  # x_min, x_max, y_min, y_max
    horizon: int = 35
    sensor_start: tuple = (10.0, 10.0)
    clutter_rate: float = 10.0
    p_max: float = 0.98
    r_pd: float = 700.0       # detection-profile length scale, m
    sigma_theta: float = math.pi / 180.0
    sigma_0: float = 1.0
    eta: float = 5e-5
    r_max: float = 1415.0
    dt: float = 1.0
    sigma_acc: float = 2.0
    targets: list = field(default_factory=list)  # TargetSchedule entries

    def measurement_model(self):
        return MeasurementModel(self.sigma_theta, self.sigma_0,
                                self.eta, self.r_max)

    def detection_probability(self, dist):
        d = np.asarray(dist, dtype=float)
        return self.p_max * np.exp(-d * d / (2.0 * self.r_pd ** 2))


def default_targets():
    """Five targets born at steps 1, 1, 5, 10, 15, alive to the end."""
    return [
        TargetSchedule(1, 35, np.array([200.0, 800.0, 8.0, -6.0])),
        TargetSchedule(1, 35, np.array([800.0, 200.0, -7.0, 9.0])),
        TargetSchedule(5, 35, np.array([150.0, 150.0, 10.0, 6.0])),
        TargetSchedule(10, 35, np.array([850.0, 850.0, -9.0, -7.0])),
        TargetSchedule(15, 35, np.array([500.0, 100.0, 2.0, 12.0])),
    ]


def default_scenario():
    return ScenarioConfig(targets=default_targets())


class GroundTruth:
    """Alive-target states per step, plus the sensor trajectory."""

    def __init__(self, config):
        self.config = config
        self.states = {}      # target index -> current (4,) state
        self.history = []     # list of (ids, (n, 4) states) per step
        self.sensor_track = []

    def alive_states(self):
        ids = sorted(self.states)
        if not ids:
            return ids, np.empty((0, 4))
        return ids, np.array([self.states[i] for i in ids])


def _reflect(state, area):
    x_min, x_max, y_min, y_max = area
    px, py, vx, vy = state
    if px < x_min:
        px, vx = 2 * x_min - px, -vx
    elif px > x_max:
        px, vx = 2 * x_max - px, -vx
    if py < y_min:
        py, vy = 2 * y_min - py, -vy
    elif py > y_max:
        py, vy = 2 * y_max - py, -vy
    return np.array([px, py, vx, vy])


def step_ground_truth(truth, k, rng):
    """Advance the world to step ``k``: births, deaths, NCV motion."""
    cfg = truth.config
    dt = cfg.dt
    f = np.array([[1, 0, dt, 0], [0, 1, 0, dt],
                  [0, 0, 1, 0], [0, 0, 0, 1]], dtype=float)
    g = np.array([[0.5 * dt * dt, 0], [0, 0.5 * dt * dt],
                  [dt, 0], [0, dt]], dtype=float)
    for idx in [i for i, s in enumerate(cfg.targets) if s.death_step < k]:
        truth.states.pop(idx, None)
    for idx in list(truth.states):
        accel = rng.normal(0.0, cfg.sigma_acc, size=2)
        truth.states[idx] = _reflect(f @ truth.states[idx] + g @ accel,
                                     cfg.area)
    for idx, sched in enumerate(cfg.targets):
        if sched.birth_step == k:
            truth.states[idx] = np.asarray(sched.initial_state,
                                           dtype=float).copy()
    ids, states = truth.alive_states()
    truth.history.append((ids, states))
    return truth


def generate_measurements(states, sensor, config, rng):
    """One scan: per-target thinned detections plus Poisson clutter.

    Detection probability p_max * exp(-d^2 / (2 r_pd^2)); bearing noise
    sigma_theta; range noise sigma_0 + eta d^2.  Clutter is uniform on
    [-pi, pi] x [0, r_max].
    """
    model = config.measurement_model()
    sensor = np.asarray(sensor, dtype=float)
    zs = []
    states = np.atleast_2d(np.asarray(states, dtype=float))
    if states.size:
        z_true = model.h(states, sensor)
        dist = z_true[:, 1]
        detected = rng.uniform(size=len(states)) < \
            config.detection_probability(dist)
        for z, d, hit in zip(z_true, dist, detected):
            if not hit:
                continue
            theta = z[0] + rng.normal(0.0, config.sigma_theta)
            rng_noise = rng.normal(0.0, config.sigma_0 + config.eta * d * d)
            zs.append([math.atan2(math.sin(theta), math.cos(theta)),
                       z[1] + rng_noise])
    n_clutter = rng.poisson(config.clutter_rate)
    for _ in range(n_clutter):
        zs.append([rng.uniform(-math.pi, math.pi),
                   rng.uniform(0.0, config.r_max)])
    if not zs:
        return np.empty((0, 2))
    out = np.array(zs)
    return out[rng.permutation(len(out))]


def apply_command(sensor, command):
    """Instantaneous relocation to the commanded position."""
    return np.asarray(command, dtype=float).copy()
