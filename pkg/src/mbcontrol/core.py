"""Multi-Bernoulli set-density primitives.

Particle-based building blocks shared by the filter and the controller:
systematic resampling, Monte Carlo sampling of a multi-Bernoulli
distribution, exact set-density evaluation via a subset DP, and Gaussian
kernel density estimation with Silverman bandwidths.

A hybrid-space particle carries a class label ``u`` (0 = clutter
generator, 1 = actual target), a detection probability ``a`` in (0, 1)
and a 4-dim kinematic state [px, py, vx, vy].
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

R_CAP = 1.0 - 1e-6          # existence probabilities stay below 1
DEFAULT_DP_CAP = 20         # max sampled-set cardinality for the exact DP
BANDWIDTH_FLOOR = 1e-3

_LOG_2PI = math.log(2.0 * math.pi)


class DegenerateComponentError(ValueError):
    pass


class CardinalityCapError(ValueError):
    pass


@dataclass
class HybridParticle:
    """One weighted sample of the augmented single-object state."""

    u: int
    a: float
    x: np.ndarray
    w: float


class BernoulliComponent:
    """Existence probability plus a weighted hybrid-particle cloud.

    Particles are stored struct-of-arrays: ``u`` (int8), ``a``, ``w``
    (float) and ``x`` with one row per particle.  ``src`` optionally
    records provenance ids (flat indices into some reference cloud) so
    later lookups can identify where a particle originated.
    """

    __slots__ = ("r", "u", "a", "x", "w", "src")

    def __init__(self, r, u, a, x, w, src=None):
        self.r = min(float(r), R_CAP)
        self.u = np.asarray(u, dtype=np.int8)
        self.a = np.asarray(a, dtype=float)
        self.x = np.atleast_2d(np.asarray(x, dtype=float))
        self.w = np.asarray(w, dtype=float)
        self.src = None if src is None else np.asarray(src, dtype=np.int64)

    @classmethod
    def from_particles(cls, r, particles):
        return cls(
            r,
            [p.u for p in particles],
            [p.a for p in particles],
            np.array([p.x for p in particles], dtype=float),
            [p.w for p in particles],
        )

    def particle(self, j):
        return HybridParticle(int(self.u[j]), float(self.a[j]),
                              self.x[j].copy(), float(self.w[j]))

    def __len__(self):
        return self.a.size

    @property
    def points(self):
        """Particles in KDE coordinates: columns [a, px, py, vx, vy]."""
        return np.column_stack([self.a, self.x])

    def class_mass(self, u):
        """Weight share of particles having label ``u``."""
        return float(self.w[self.u == u].sum())

    def r_class(self, u):
        """Per-class existence r(u) = r * (weight mass of u-particles)."""
        return self.r * self.class_mass(u)

    def normalized(self):
        s = self.w.sum()
        if s <= 0.0:
            raise DegenerateComponentError("degenerate component")
        return BernoulliComponent(self.r, self.u, self.a, self.x,
                                  self.w / s, self.src)

    def copy(self):
        return BernoulliComponent(self.r, self.u.copy(), self.a.copy(),
                                  self.x.copy(), self.w.copy(),
                                  None if self.src is None else self.src.copy())


class MultiBernoulliBelief:
    """Ordered collection of Bernoulli components."""

    __slots__ = ("components",)

    def __init__(self, components=()):
        self.components = list(components)

    def __len__(self):
        return len(self.components)

    def __iter__(self):
        return iter(self.components)

    def __getitem__(self, i):
        return self.components[i]

    @property
    def r(self):
        return np.array([c.r for c in self.components], dtype=float)

    def copy(self):
        return MultiBernoulliBelief([c.copy() for c in self.components])


@dataclass
class SampleSet:
    """One Monte Carlo draw from a multi-Bernoulli distribution.

    ``indices`` has one (component, particle) row per included point, so
    every point keeps its provenance.  Component indices are distinct
    within a set by construction.
    """

    indices: np.ndarray  # (n, 2) int array of (component i, particle j)

    @property
    def cardinality(self):
        return int(self.indices.shape[0])

    @property
    def points(self):
        return [tuple(row) for row in self.indices]


def systematic_resample(weights, n, rng):
    """Indices of ``n`` systematic-resampling draws from ``weights``."""
    w = np.asarray(weights, dtype=float)
    total = w.sum()
    if total <= 0.0 or not np.isfinite(total):
        raise DegenerateComponentError("degenerate component")
    positions = (rng.uniform() + np.arange(n)) / n
    return np.searchsorted(np.cumsum(w / total), positions, side="right").clip(0, w.size - 1)


def resample_component(c, l_max, rng):
    """Equal-weight rebuild of a component with exactly ``l_max`` particles.

    Systematic resampling; ``r`` is untouched.  Raises
    DegenerateComponentError when all weights are zero.
    """
    idx = systematic_resample(c.w, l_max, rng)
    src = idx if c.src is None else c.src[idx]
    return BernoulliComponent(c.r, c.u[idx], c.a[idx], c.x[idx],
                              np.full(l_max, 1.0 / l_max), src)


def cardinality_pmf(r):
    """Exact pmf of sum of independent Bernoulli(r_i), by convolution."""
    r = np.asarray(r, dtype=float)
    pmf = np.array([1.0])
    for ri in r:
        pmf = np.convolve(pmf, [1.0 - ri, ri])
    return pmf


def sample_multi_bernoulli(r, l_max, n_sets, rng):
    """Draw ``n_sets`` Monte Carlo samples of a multi-Bernoulli RFS.

    Per set and per component: include one uniformly chosen particle
    index (out of ``l_max`` equal-weight particles) with probability
    ``r_i``.  Returns a list of SampleSet with (i, j) provenance rows.
    """
    r = np.asarray(r, dtype=float)
    m = r.size
    include = rng.uniform(size=(n_sets, m)) < r[None, :]
    picks = rng.integers(0, l_max, size=(n_sets, m))
    rows, cols = np.nonzero(include)
    data = np.column_stack([cols, picks[rows, cols]]).astype(np.int64)
    bounds = np.concatenate([[0], np.cumsum(include.sum(axis=1))])
    return [SampleSet(data[bounds[ell]:bounds[ell + 1]])
            for ell in range(n_sets)]


def sample_belief(belief, n_sets, rng):
    """Alg.-1 sampling of a belief whose components are equal-weight."""
    sizes = {len(c) for c in belief}
    if len(sizes) > 1:
        raise ValueError("components must be resampled to a common size")
    l_max = sizes.pop() if sizes else 1
    return sample_multi_bernoulli(belief.r, l_max, n_sets, rng)


def _log_permanent(mat):
    """log of the rectangular permanent (sum over injections rows->cols).

    Subset DP over rows, O(m * 2^n * n), with per-row scaling so the
    float DP never overflows.  Returns -inf for a zero permanent.
    """
    n, m = mat.shape
    if n == 0:
        return 0.0
    scales = mat.max(axis=1)
    if np.any(scales <= 0.0):
        return -math.inf
    a = mat / scales[:, None]
    size = 1 << n
    f = np.zeros(size)
    f[0] = 1.0
    subsets = np.arange(size)
    lows = [np.nonzero((subsets & (1 << j)) == 0)[0] for j in range(n)]
    for i in range(m):
        col = a[:, i]
        if not col.any():
            continue
        g = f.copy()
        for j in range(n):
            if col[j] == 0.0:
                continue
            lo = lows[j]
            g[lo + (1 << j)] += f[lo] * col[j]
        f = g
    val = f[size - 1]
    if val <= 0.0:
        return -math.inf
    return math.log(val) + float(np.log(scales).sum())


def eval_mb_density_log(belief, sample, dens, dp_cap=DEFAULT_DP_CAP):
    """log multi-Bernoulli set density at a sampled set (exact DP).

    ``dens(i, (ci, pj))`` must return the single-object density of
    component ``i`` evaluated at the point whose provenance is
    ``(ci, pj)``.  The empty-set value is prod(1 - r_i); the assignment
    sum over ordered distinct component tuples is a rectangular
    permanent, computed exactly.
    """
    r = belief.r
    n = sample.cardinality
    m = r.size
    if n > m:
        return -math.inf
    if n > dp_cap:
        raise CardinalityCapError("cardinality too large for exact assignment sum")
    log_empty = float(np.log1p(-r).sum()) if m else 0.0
    if n == 0:
        return log_empty
    mat = np.empty((n, m))
    pts = sample.points
    for i in range(m):
        ratio = r[i] / (1.0 - r[i])
        for j, pt in enumerate(pts):
            mat[j, i] = ratio * dens(i, pt)
    if np.any(mat < 0.0) or not np.all(np.isfinite(mat)):
        raise ValueError("density evaluator must return finite nonnegative values")
    return log_empty + _log_permanent(mat)


def eval_mb_density(belief, sample, dens, dp_cap=DEFAULT_DP_CAP):
    """Multi-Bernoulli set density (Vo-style closed form) at a sample."""
    logv = eval_mb_density_log(belief, sample, dens, dp_cap)
    return 0.0 if logv == -math.inf else math.exp(logv)


def gaussian_kernel_log_norm(bandwidth):
    h = np.asarray(bandwidth, dtype=float)
    return -0.5 * h.size * _LOG_2PI - float(np.log(h).sum())


def kde_density(points, weights, labels, bandwidth, query, query_u):
    """Gaussian-kernel density of the ``query_u`` class at ``query``.

    Diagonal-covariance kernels centered at the particles; only
    particles with matching class label contribute, with their weights
    renormalized by the class weight share.  Returns 0 when no particle
    matches the label.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    weights = np.asarray(weights, dtype=float)
    labels = np.asarray(labels)
    h = np.asarray(bandwidth, dtype=float)
    if np.any(h <= 0.0):
        raise ValueError("bandwidth entries must be positive")
    mask = labels == query_u
    share = weights[mask].sum()
    if share <= 0.0:
        return 0.0
    z = (points[mask] - np.asarray(query, dtype=float)) / h
    e = 0.5 * (z * z).sum(axis=1)
    norm = math.exp(gaussian_kernel_log_norm(h))
    return float(norm * (weights[mask] * np.exp(-e)).sum() / share)


def silverman_bandwidth(points, weights=None, floor=BANDWIDTH_FLOOR):
    """Per-dimension Silverman rule-of-thumb bandwidths, floored."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    n, d = points.shape
    if weights is None:
        mean = points.mean(axis=0)
        var = ((points - mean) ** 2).mean(axis=0)
    else:
        weights = np.asarray(weights, dtype=float)
        weights = weights / weights.sum()
        mean = weights @ points
        var = weights @ (points - mean) ** 2
    sigma = np.sqrt(var)
    factor = (4.0 / (d + 2.0)) ** (1.0 / (d + 4.0)) * n ** (-1.0 / (d + 4.0))
    return np.maximum(sigma * factor, floor)
