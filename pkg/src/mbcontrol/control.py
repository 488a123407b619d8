"""Information-driven sensor control.

For every admissible command: build the predicted ideal measurement set
(PIMS), update the predicted belief with it, score the update with a
Monte Carlo Renyi-divergence reward over sampled multi-object sets, and
move to the best command.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _fast
from .core import (
    MultiBernoulliBelief,
    resample_component,
    sample_belief,
    silverman_bandwidth,
)
from .filtering import extract_estimates, predict, update_robust

LOG_TINY = -745.0
LOG_HUGE = 700.0


@dataclass
class SensorCommand:
    """Candidate sensor position in the plane."""

    position: np.ndarray

    @property
    def x(self):
        return float(self.position[0])

    @property
    def y(self):
        return float(self.position[1])


@dataclass
class RewardEvaluation:
    command: SensorCommand
    divergence: float   # (1/(alpha-1)) log of the Monte Carlo sum, nats
    raw_sum: float      # the Monte Carlo sum itself
    pims: np.ndarray    # measurement set used for the candidate update
    n_samples: int


@dataclass
class ControlConfig:
    alpha: float = 0.5
    n_samples: int = 100            # sample sets per reward
    step_sizes: tuple = (50.0, 100.0)
    n_directions: int = 8
    dp_cap: int = 20
    prune_threshold: float = 1e-4   # relative row cutoff before the DP
    kde_basis: int = 100            # planner-side KDE support thinning
    dp_work_limit: float = 3e7      # op budget per exact assignment DP
    pred_r_min: float = 0.02        # existence floor for scored components


def admissible_commands(position, area, step_sizes=(50.0, 100.0),
                        n_directions=8):
    """Stay plus ``n_directions`` headings per step size, area-clipped."""
    x_min, x_max, y_min, y_max = area
    position = np.asarray(position, dtype=float)
    commands = [SensorCommand(position.copy())]
    angles = 2.0 * math.pi * np.arange(n_directions) / max(n_directions, 1)
    for d in step_sizes:
        for th in angles:
            p = position + d * np.array([math.cos(th), math.sin(th)])
            p[0] = min(max(p[0], x_min), x_max)
            p[1] = min(max(p[1], y_min), y_max)
            commands.append(SensorCommand(p))
    return commands


class PredictedDensity:
    """Set-density evaluator for a predicted belief.

    Single-object densities come from class-matched Gaussian KDE with
    per-component Silverman bandwidths; the assignment sum of the
    closed-form multi-Bernoulli density is computed exactly by a subset
    DP, after splitting each sampled set into independent blocks of
    points that share no (numerically relevant) component support.
    KDE rows are cached by particle provenance so repeated scoring of
    the same predicted belief stays cheap.
    """

    def __init__(self, belief, dp_cap=20, prune_threshold=1e-6,
                 kde_basis=None, dp_work_limit=float(1 << 62), r_floor=0.0):
        if r_floor > 0.0:
            # negligible-existence components barely perturb the set
            # density but multiply the assignment-sum cost; the planner
            # scores without them
            belief = MultiBernoulliBelief(
                [c for c in belief if c.r >= r_floor])
        self.belief = belief
        self.dp_cap = dp_cap
        self.prune_threshold = prune_threshold
        self.dp_work_limit = dp_work_limit
        self.oversize_count = 0
        m = len(belief)
        l_max = max((len(c) for c in belief), default=1)
        if kde_basis:
            l_max = min(l_max, kde_basis)
        self.states = np.zeros((m, l_max, 5))
        self.weights = np.zeros((m, l_max))
        self.labels = np.full((m, l_max), -1, dtype=np.int8)
        self.bandwidths = np.ones((m, 5))
        self.class_mass = np.zeros((m, 2))
        self.bboxes = np.zeros((m, 2, 2, 2))
        self.r = belief.r
        for i, c in enumerate(belief):
            # bandwidths and bounding boxes from the full cloud; the
            # kernel support may be thinned to keep scoring tractable
            self.bandwidths[i] = silverman_bandwidth(c.points, c.w)
            if kde_basis and len(c) > kde_basis:
                sel = np.linspace(0, len(c) - 1, kde_basis).round().astype(int)
            else:
                sel = np.arange(len(c))
            n = sel.size
            w = c.w[sel]
            w = w / w.sum() if w.sum() > 0.0 else w
            self.states[i, :n] = c.points[sel]
            self.weights[i, :n] = w
            self.labels[i, :n] = c.u[sel]
            for u in (0, 1):
                self.class_mass[i, u] = float(w[c.u[sel] == u].sum())
                mask = c.u == u
                if mask.any():
                    pos = c.x[mask, :2]
                    self.bboxes[i, u, :, 0] = pos.min(axis=0)
                    self.bboxes[i, u, :, 1] = pos.max(axis=0)
        self.log_empty = float(np.log1p(-self.r).sum()) if m else 0.0
        self.ratio = self.r / (1.0 - self.r)
        self._cache = {}

    def dens_rows(self, coords, us, srcs=None):
        """(n, M) single-object density matrix for ``n`` query points."""
        coords = np.atleast_2d(np.asarray(coords, dtype=float))
        us = np.asarray(us, dtype=np.int8)
        n = coords.shape[0]
        rows = np.empty((n, len(self.belief)))
        if srcs is None:
            srcs = np.full(n, -1, dtype=np.int64)
        missing = [k for k in range(n)
                   if srcs[k] < 0 or srcs[k] not in self._cache]
        if missing:
            fresh = _fast.kde_rows(
                np.ascontiguousarray(coords[missing]),
                np.ascontiguousarray(us[missing]),
                self.states, self.weights, self.labels,
                self.bandwidths, self.class_mass, self.ratio,
                self.bboxes, self.prune_threshold)
            for row, k in zip(fresh, missing):
                if srcs[k] >= 0:
                    self._cache[srcs[k]] = row
                rows[k] = row
        for k in range(n):
            if srcs[k] >= 0:
                rows[k] = self._cache[srcs[k]]
        return rows

    def log_set_density_from_rows(self, rows):
        """log pi(X) given the per-point density rows."""
        n = rows.shape[0]
        if n > len(self.belief):
            return -math.inf
        if n == 0:
            return self.log_empty
        mat = np.ascontiguousarray(rows * self.ratio[None, :])
        val, status = _fast.assignment_log_sum(mat, self.prune_threshold,
                                               self.dp_cap,
                                               self.dp_work_limit)
        if status == 2:
            self.oversize_count += 1
            return -math.inf
        return self.log_empty + val if status == 0 else -math.inf

    def log_set_density(self, coords, us, srcs=None):
        return self.log_set_density_from_rows(self.dens_rows(coords, us, srcs))


def _set_provenance(belief):
    offset = 0
    for c in belief:
        c.src = np.arange(offset, offset + len(c), dtype=np.int64)
        offset += len(c)


def _log_upd_density(upd, sample):
    """log pi_upd at a sample it was drawn from (provenance weights).

    Every sampled point coincides with exactly one particle of its own
    component, so the assignment sum collapses to the provenance tuple.
    """
    r = upd.r
    total = float(np.log1p(-r).sum()) if len(upd) else 0.0
    for i, j in sample.points:
        w = upd[i].w[j]
        if w <= 0.0:
            return -math.inf
        total += math.log(r[i]) - math.log1p(-r[i]) + math.log(w)
    return total


def _reward_sum(pred_eval, upd, alpha, n_sets, rng):
    sets = sample_belief(upd, n_sets, rng)
    coords, us, srcs, lus, offsets = [], [], [], [], [0]
    r = upd.r
    log_empty_upd = float(np.log1p(-r).sum()) if len(upd) else 0.0
    with np.errstate(divide="ignore"):
        log_w = [np.log(r[i]) - np.log1p(-r[i]) + np.log(c.w)
                 for i, c in enumerate(upd)]
    for s in sets:
        lu = log_empty_upd
        for i, j in s.indices:
            c = upd[i]
            coords.append(np.concatenate([[c.a[j]], c.x[j]]))
            us.append(c.u[j])
            srcs.append(-1 if c.src is None else c.src[j])
            lu += log_w[i][j]
        lus.append(lu)
        offsets.append(offsets[-1] + s.cardinality)
    if offsets[-1]:
        rows = pred_eval.dens_rows(np.array(coords), np.array(us),
                                   np.array(srcs, dtype=np.int64))
    else:
        rows = np.empty((0, len(pred_eval.belief)))
    total = 0.0
    for k in range(n_sets):
        lp = pred_eval.log_set_density_from_rows(rows[offsets[k]:offsets[k + 1]])
        if lp == -math.inf:
            continue
        expo = (1.0 - alpha) * (lp - lus[k])
        total += math.exp(min(max(expo, LOG_TINY), LOG_HUGE))
    return total / n_sets


def renyi_reward(pred, upd, alpha, n_sets, rng, dp_cap=20,
                 prune_threshold=1e-6, pred_eval=None):
    """Monte Carlo estimate of the Renyi-reward sum.

    Draws ``n_sets`` multi-object samples from the (equal-weight
    resampled) updated belief and returns the mean of
    (pi_pred / pi_upd)^(1-alpha), with the updated density read from
    provenance-particle weights and the predicted density from KDE.
    The associated divergence is (1/(alpha-1)) * log of this sum.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    if pred_eval is None:
        pred_eval = PredictedDensity(pred, dp_cap, prune_threshold)
    return _reward_sum(pred_eval, upd, alpha, n_sets, rng)


def divergence_from_sum(raw_sum, alpha):
    return math.log(max(raw_sum, 1e-300)) / (alpha - 1.0)


def pims_target_states(pred, sensor, model, update_fn=None):
    """Stages 1-4 of PIMS: command-independent target estimates.

    All predicted objects (clutter generators included) emit one
    noise-free measurement from the current sensor position; an
    intermediate update with that set separates targets from clutter
    generators, and the u=1 estimates of the result are returned.
    """
    if update_fn is None:
        update_fn = lambda b, z, s: update_robust(b, z, s, model)
    est = extract_estimates(pred)
    if est.all_object_states.shape[0] == 0:
        return np.empty((0, 4))
    z_bar = model.h(est.all_object_states, sensor)
    mid = update_fn(pred, z_bar, np.asarray(sensor, dtype=float))
    return extract_estimates(mid).target_states


def generate_pims(pred, command, sensor, model, update_fn=None):
    """Full PIMS for one command: noise-free, clutter-free, all detected."""
    states = pims_target_states(pred, sensor, model, update_fn)
    if states.shape[0] == 0:
        return np.empty((0, 2))
    pos = command.position if isinstance(command, SensorCommand) else command
    return model.h(states, pos)


def plan_step(posterior, sensor, motion_model, meas_model, area, rng,
              config=None, l_max=1000, update_fn=None, reward_rng=None):
    """Predict once, score every admissible command, pick the best.

    Returns (command, evaluations, predicted_belief).  Selection
    maximizes the divergence, i.e. minimizes the raw Monte Carlo sum;
    ties keep the earliest command ("stay" first).  When no targets are
    estimated anywhere, every reward ties by definition and "stay" is
    returned without scoring.
    """
    cfg = config or ControlConfig()
    if update_fn is None:
        update_fn = lambda b, z, s: update_robust(b, z, s, meas_model)
    pred = predict(posterior, motion_model, rng, l_max)
    _set_provenance(pred)
    commands = admissible_commands(np.asarray(sensor, dtype=float), area,
                                   cfg.step_sizes, cfg.n_directions)
    states = pims_target_states(pred, sensor, meas_model, update_fn)
    if states.shape[0] == 0:
        evals = [RewardEvaluation(c, 0.0, 1.0, np.empty((0, 2)),
                                  cfg.n_samples) for c in commands]
        return commands[0], evals, pred
    pred_eval = PredictedDensity(pred, cfg.dp_cap, cfg.prune_threshold,
                                 cfg.kde_basis, cfg.dp_work_limit,
                                 cfg.pred_r_min)
    root = int((reward_rng or rng).integers(1 << 62))
    evals = []
    best = None
    for idx, cmd in enumerate(commands):
        rng_c = np.random.default_rng([root, idx])
        z_hat = meas_model.h(states, cmd.position)
        upd = update_fn(pred, z_hat, cmd.position)
        upd_rs = MultiBernoulliBelief(
            [resample_component(c, l_max, rng_c) for c in upd])
        raw = _reward_sum(pred_eval, upd_rs, cfg.alpha, cfg.n_samples, rng_c)
        div = divergence_from_sum(raw, cfg.alpha)
        evals.append(RewardEvaluation(cmd, div, raw, z_hat, cfg.n_samples))
        if best is None or div > evals[best].divergence:
            best = idx
    return evals[best].command, evals, pred


def select_command(posterior, sensor, motion_model, meas_model, area, rng,
                   config=None, l_max=1000):
    """Spec-facing wrapper around plan_step (robust filter mode)."""
    cmd, evals, _ = plan_step(posterior, sensor, motion_model, meas_model,
                              area, rng, config, l_max)
    return cmd, evals
