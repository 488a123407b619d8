"""Batch experiment driver for the closed tracking-and-control loop.

Runs seeded Monte Carlo trials (predict -> select command -> move ->
measure -> update), logs per-step metrics and writes per-trial and
aggregate CSV files.
"""

from __future__ import annotations

import csv
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np
import yaml

from .control import ControlConfig, plan_step
from .core import MultiBernoulliBelief
from .filtering import (
    BirthSpec,
    MotionModel,
    extract_estimates,
    prune,
    update_known_params,
    update_robust,
)
from .scenario import (
    GroundTruth,
    ScenarioConfig,
    TargetSchedule,
    apply_command,
    default_targets,
    generate_measurements,
    step_ground_truth,
)

log = logging.getLogger(__name__)

MODES = ("robust", "baseline")

TRIAL_COLUMNS = [
    "trial", "step", "mode", "cmd_x", "cmd_y", "sensor_x", "sensor_y",
    "n_est", "lambda_est", "n_true", "lambda_true", "target_estimates",
    "wall_ms",
]
AGG_COLUMNS = [
    "mode", "step", "n_est_mean", "n_est_std", "lambda_est_mean",
    "lambda_est_std", "n_true", "lambda_true",
]


@dataclass
class FilterConfig:
    l_max: int = 1000
    m_max: int = 60
    r_min: float = 1e-3
    p_s: float = 0.98
    p_s_clutter: float = 0.9
    sigma_a: float = 0.02
    n_target_births: int = 4
    target_birth_r: float = 0.03
    n_clutter_births: int = 8
    clutter_birth_r: float = 0.1
    birth_speed: float = 10.0
    target_birth_a: tuple = (0.5, 1.0)
    clutter_birth_a: tuple = (0.1, 0.9)
    baseline_kappa: float = 15.0
    baseline_p_d: float = 0.98


@dataclass
class ExperimentConfig:
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    filter: FilterConfig = field(default_factory=FilterConfig)
    control: ControlConfig = field(default_factory=ControlConfig)

    def motion_model(self, mode="robust"):
        fc, area = self.filter, self.scenario.area
        lo = [area[0], area[2], -fc.birth_speed, -fc.birth_speed]
        hi = [area[1], area[3], fc.birth_speed, fc.birth_speed]
        births = [BirthSpec(fc.target_birth_r, 1, lo, hi,
                            *fc.target_birth_a)
                  for _ in range(fc.n_target_births)]
        if mode == "robust":
            births += [BirthSpec(fc.clutter_birth_r, 0, lo, hi,
                                 *fc.clutter_birth_a)
                       for _ in range(fc.n_clutter_births)]
        return MotionModel(fc.p_s, fc.p_s_clutter, self.scenario.dt,
                           self.scenario.sigma_acc, fc.sigma_a, births)


def default_config():
    cfg = ExperimentConfig()
    cfg.scenario.targets = default_targets()
    return cfg


class ConfigError(ValueError):
    pass


def config_to_dict(cfg):
    d = {
        "scenario": asdict(cfg.scenario),
        "filter": asdict(cfg.filter),
        "control": asdict(cfg.control),
    }
    d["scenario"]["targets"] = [
        {"birth_step": t.birth_step, "death_step": t.death_step,
         "initial_state": [float(v) for v in t.initial_state]}
        for t in cfg.scenario.targets
    ]
    return d


def config_from_dict(d):
    cfg = default_config()
    scen = d.get("scenario", {})
    targets = scen.pop("targets", None)
    for section, obj in (("scenario", cfg.scenario), ("filter", cfg.filter),
                         ("control", cfg.control)):
        for key, value in d.get(section, {}).items():
            if not hasattr(obj, key):
                raise ConfigError(f"unknown {section} key: {key!r}")
            if isinstance(getattr(obj, key), tuple):
                value = tuple(value)
            setattr(obj, key, value)
    if targets is not None:
        cfg.scenario.targets = [
            TargetSchedule(int(t["birth_step"]), int(t["death_step"]),
                           np.asarray(t["initial_state"], dtype=float))
            for t in targets
        ]
    return cfg


def load_config(path):
    text = Path(path).read_text()
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" at line {mark.line + 1}" if mark else ""
        raise ConfigError(f"cannot parse {path}{where}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return config_from_dict(data)


def save_config(cfg, path):
    Path(path).write_text(yaml.safe_dump(config_to_dict(cfg), sort_keys=False))


@dataclass
class TrialRow:
    step: int
    cmd: tuple
    sensor: tuple
    n_est: int
    lambda_est: float
    n_true: int
    lambda_true: float
    target_estimates: str
    wall_ms: float


def _serialize_states(states):
    return ";".join(",".join(f"{v:.9g}" for v in row) for row in states)


def _update_fn(cfg, mode, meas_model):
    if mode == "robust":
        return lambda b, z, s: update_robust(b, z, s, meas_model)
    if mode == "baseline":
        fc = cfg.filter
        return lambda b, z, s: update_known_params(
            b, z, s, meas_model, fc.baseline_kappa, fc.baseline_p_d)
    raise ValueError(f"unknown mode {mode!r}")


def run_trial(cfg, seed, mode="robust"):
    """One closed-loop trial; deterministic given (cfg, seed, mode).

    Independent substreams for truth, measurements, filter and reward
    sampling keep the simulated world identical across modes.
    """
    scen, fc = cfg.scenario, cfg.filter
    rng_truth = np.random.default_rng([seed, 0])
    rng_meas = np.random.default_rng([seed, 1])
    rng_filt = np.random.default_rng([seed, 2])
    rng_reward = np.random.default_rng([seed, 3])
    meas_model = scen.measurement_model()
    motion = cfg.motion_model(mode)
    update_fn = _update_fn(cfg, mode, meas_model)

    truth = GroundTruth(scen)
    sensor = np.asarray(scen.sensor_start, dtype=float)
    posterior = MultiBernoulliBelief()
    rows = []
    for k in range(1, scen.horizon + 1):
        t0 = time.perf_counter()
        step_ground_truth(truth, k, rng_truth)
        command, _, pred = plan_step(
            posterior, sensor, motion, meas_model, scen.area, rng_filt,
            cfg.control, fc.l_max, update_fn, rng_reward)
        sensor = apply_command(sensor, command.position)
        truth.sensor_track.append(sensor.copy())
        _, states = truth.alive_states()
        measurements = generate_measurements(states, sensor, scen, rng_meas)
        posterior = prune(update_fn(pred, measurements, sensor),
                          fc.r_min, fc.m_max, fc.l_max, rng_filt)
        est = extract_estimates(posterior)
        rows.append(TrialRow(
            k, (command.x, command.y), (float(sensor[0]), float(sensor[1])),
            est.n_targets, est.clutter_rate, len(states), scen.clutter_rate,
            _serialize_states(est.target_states),
            (time.perf_counter() - t0) * 1e3))
    return rows


def _write_trials(path, mode, logs):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRIAL_COLUMNS)
        for trial, rows in enumerate(logs):
            for r in rows:
                writer.writerow([
                    trial, r.step, mode,
                    f"{r.cmd[0]:.9g}", f"{r.cmd[1]:.9g}",
                    f"{r.sensor[0]:.9g}", f"{r.sensor[1]:.9g}",
                    r.n_est, f"{r.lambda_est:.9g}", r.n_true,
                    f"{r.lambda_true:.9g}", r.target_estimates,
                    f"{r.wall_ms:.9g}",
                ])


def _trial_task(args):
    cfg, seed, mode = args
    return run_trial(cfg, seed, mode)


def run_batch(cfg, n_runs, modes=("robust",), out_dir="results",
              base_seed=12345, n_workers=None):
    """Seeded batch across modes; writes per-trial and aggregate CSVs.

    Trial i uses seed base_seed + i, shared across modes so both filters
    face identical worlds.  Trials run in a process pool (``n_workers``
    defaults to the CPU count); results are collected and written by the
    calling process.  Returns {mode: list of trial logs}.
    """
    if n_runs < 1:
        raise ValueError("n_runs must be at least 1")
    if n_workers is None:
        n_workers = os.cpu_count() or 1
    n_workers = min(n_workers, n_runs)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    results = {}
    for mode in modes:
        t0 = time.perf_counter()
        tasks = [(cfg, base_seed + i, mode) for i in range(n_runs)]
        if n_workers > 1:
            with ProcessPoolExecutor(max_workers=n_workers) as pool:
                logs = list(pool.map(_trial_task, tasks))
        else:
            logs = []
            for i, task in enumerate(tasks):
                t1 = time.perf_counter()
                logs.append(_trial_task(task))
                log.info("mode=%s trial=%d done in %.1fs", mode, i,
                         time.perf_counter() - t1)
        log.info("mode=%s batch of %d done in %.1fs", mode, n_runs,
                 time.perf_counter() - t0)
        _write_trials(out / f"trials_{mode}.csv", mode, logs)
        results[mode] = logs
    with open(out / "aggregate.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(AGG_COLUMNS)
        for mode in modes:
            logs = results[mode]
            for k in range(cfg.scenario.horizon):
                n_est = np.array([rows[k].n_est for rows in logs], float)
                lam = np.array([rows[k].lambda_est for rows in logs])
                writer.writerow([
                    mode, k + 1,
                    f"{n_est.mean():.9g}", f"{n_est.std():.9g}",
                    f"{lam.mean():.9g}", f"{lam.std():.9g}",
                    f"{np.mean([rows[k].n_true for rows in logs]):.9g}",
                    f"{logs[0][k].lambda_true:.9g}",
                ])
    return results
