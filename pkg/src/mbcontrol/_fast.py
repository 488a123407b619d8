"""Numba kernels for the reward hot path.

Semantics match the pure-numpy reference functions in ``core``; these
exist because reward scoring evaluates millions of Gaussian kernels and
thousands of small permanents per planning step.
"""

import math

import numpy as np
from numba import njit

_EXP_CUT = 60.0  # exp(-30) ~ 1e-13: kernel numerically irrelevant


@njit(cache=True, fastmath=True)
def kde_rows(points, point_u, states, weights, labels, bandwidths,
             class_mass, odds, bboxes, rel_cut):
    """Class-matched KDE of every component at every query point.

    points      (P, D) query coordinates (D = 5: [a, px, py, vx, vy])
    point_u     (P,)   query class labels
    states      (M, L, D) particle coordinates per component
    weights     (M, L) particle weights
    labels      (M, L) particle class labels (-1 = padding)
    bandwidths  (M, D) per-component Silverman bandwidths
    class_mass  (M, 2) weight share per class per component
    odds        (M,)   r_i / (1 - r_i), the factor the assignment sum
                       later applies to each density
    bboxes      (M, 2, 2, 2) per component, class, position dim: min/max
    rel_cut     drop components whose odds-scaled density upper bound is
                below rel_cut times the best upper bound for the point
                (entries that far down are discarded by the assignment
                sum anyway)

    Returns (P, M) weight-share-renormalized class densities.
    """
    n_pts = points.shape[0]
    n_comp = states.shape[0]
    l_max = states.shape[1]
    dim = points.shape[1]
    out = np.zeros((n_pts, n_comp))
    norms = np.empty(n_comp)
    for m in range(n_comp):
        s = 0.0
        for d in range(dim):
            s += math.log(bandwidths[m, d])
        norms[m] = math.exp(-0.5 * dim * math.log(2.0 * math.pi) - s)
    ub = np.empty(n_comp)
    for p in range(n_pts):
        pu = point_u[p]
        best_ub = 0.0
        for m in range(n_comp):
            if class_mass[m, pu] <= 0.0:
                ub[m] = 0.0
                continue
            e = 0.0
            for d in range(2):
                lo = bboxes[m, pu, d, 0]
                hi = bboxes[m, pu, d, 1]
                v = points[p, d + 1]
                gap = lo - v if v < lo else (v - hi if v > hi else 0.0)
                z = gap / bandwidths[m, d + 1]
                e += z * z
            ub[m] = 0.0 if e > 2.0 * _EXP_CUT else \
                odds[m] * norms[m] * math.exp(-0.5 * e)
            if ub[m] > best_ub:
                best_ub = ub[m]
        cut = best_ub * rel_cut
        for m in range(n_comp):
            if ub[m] <= cut:
                continue
            share = class_mass[m, pu]
            acc = 0.0
            for l in range(l_max):
                if labels[m, l] != pu:
                    continue
                e = 0.0
                for d in range(dim):
                    z = (points[p, d] - states[m, l, d]) / bandwidths[m, d]
                    e += z * z
                    if e > _EXP_CUT:
                        break
                if e <= _EXP_CUT:
                    acc += weights[m, l] * math.exp(-0.5 * e)
            if acc > 0.0:
                out[p, m] = acc / share * norms[m]
    return out


@njit(cache=True, fastmath=True)
def measurement_psi(x, a, u, z_theta, z_range, sx, sy,
                    sigma_theta, sigma_0, eta, volume):
    """Per-particle measurement factor for one detection.

    Targets (u = 1): a * g(z | x) with the bearing-range likelihood;
    clutter generators (u = 0): a / volume.  Bearing offsets beyond
    eight sigma zero the target factor (the Gaussian there is < 1e-13
    relative and the caller compacts such weights away regardless).
    """
    n = x.shape[0]
    out = np.empty(n)
    log_norm = -math.log(2.0 * math.pi) - math.log(sigma_theta)
    for j in range(n):
        if u[j] == 0:
            out[j] = a[j] / volume
            continue
        dx = x[j, 0] - sx
        dy = x[j, 1] - sy
        dist = math.hypot(dx, dy)
        dtheta = math.atan2(dy, dx) - z_theta
        if dtheta > math.pi:
            dtheta -= 2.0 * math.pi
        elif dtheta < -math.pi:
            dtheta += 2.0 * math.pi
        t = dtheta / sigma_theta
        if t > 8.0 or t < -8.0:
            out[j] = 0.0
            continue
        sr = sigma_0 + eta * dist * dist
        rr = (z_range - dist) / sr
        e = log_norm - 0.5 * (t * t + rr * rr) - math.log(sr)
        out[j] = a[j] * math.exp(e) if e > -700.0 else 0.0
    return out


@njit(cache=True, fastmath=True)
def _block_log_permanent(mat, pts, cols):
    """Subset DP over one block; mat rows already scaled to max 1."""
    n = pts.shape[0]
    m = cols.shape[0]
    size = 1 << n
    f = np.zeros(size)
    g = np.zeros(size)
    f[0] = 1.0
    for ci in range(m):
        i = cols[ci]
        for s in range(size):
            g[s] = f[s]
        for jj in range(n):
            c = mat[pts[jj], i]
            if c == 0.0:
                continue
            bj = 1 << jj
            for s in range(size):
                if s & bj == 0:
                    g[s + bj] += f[s] * c
        for s in range(size):
            f[s] = g[s]
    return math.log(f[size - 1]) if f[size - 1] > 0.0 else -np.inf


@njit(cache=True, fastmath=True)
def assignment_log_sum(mat, rel_cut, dp_cap, work_limit=1 << 62):
    """log of the closed-form assignment sum (rectangular permanent).

    Rows are scaled by their max and entries below ``rel_cut`` of the
    row max are dropped; points sharing no remaining component support
    factorize into independent blocks, each solved by exact subset DP.

    Returns (value, status): status 0 ok, 1 zero permanent, 2 a block
    exceeded ``dp_cap`` or its DP would exceed ``work_limit`` operations.
    """
    n, m = mat.shape
    if n == 0:
        return 0.0, 0
    if n > m:
        return -np.inf, 1
    work = np.zeros((n, m))
    log_scale = 0.0
    for j in range(n):
        row_max = 0.0
        for i in range(m):
            if mat[j, i] > row_max:
                row_max = mat[j, i]
        if row_max <= 0.0:
            return -np.inf, 1
        log_scale += math.log(row_max)
        cut = rel_cut
        for i in range(m):
            v = mat[j, i] / row_max
            work[j, i] = v if v >= cut else 0.0
    parent = np.arange(n)
    for i in range(m):
        first = -1
        for j in range(n):
            if work[j, i] == 0.0:
                continue
            if first < 0:
                first = j
                continue
            ra = first
            while parent[ra] != ra:
                ra = parent[ra]
            rb = j
            while parent[rb] != rb:
                rb = parent[rb]
            if ra != rb:
                parent[rb] = ra
    root = np.empty(n, dtype=np.int64)
    for j in range(n):
        r = j
        while parent[r] != r:
            r = parent[r]
        root[j] = r
    total = log_scale
    done = np.zeros(n, dtype=np.uint8)
    pts_buf = np.empty(n, dtype=np.int64)
    used = np.zeros(m, dtype=np.uint8)
    cols_buf = np.empty(m, dtype=np.int64)
    for j in range(n):
        if done[j]:
            continue
        n_pts = 0
        for jj in range(n):
            if root[jj] == root[j]:
                pts_buf[n_pts] = jj
                done[jj] = 1
                n_pts += 1
        if n_pts > dp_cap:
            return -np.inf, 2
        for i in range(m):
            used[i] = 0
        n_cols = 0
        for p in range(n_pts):
            for i in range(m):
                if work[pts_buf[p], i] > 0.0 and used[i] == 0:
                    used[i] = 1
                    cols_buf[n_cols] = i
                    n_cols += 1
        ops = float(n_cols) * float(n_pts) * (2.0 ** (n_pts - 1))
        if ops > work_limit:
            return -np.inf, 2
        lp = _block_log_permanent(work, pts_buf[:n_pts], cols_buf[:n_cols])
        if lp == -np.inf:
            return -np.inf, 1
        total += lp
    return total, 0


@njit(cache=True, fastmath=True)
def log_permanent(mat):
    """Exact log rectangular permanent (no thresholding)."""
    val, status = assignment_log_sum(mat, 0.0, mat.shape[0])
    return val
