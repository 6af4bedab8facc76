"""Hot numeric kernels with a numba fast path and a pure-numpy fallback.

The backend is chosen once at import time. Setting the environment variable
``VORTEXLAB_DISABLE_NUMBA`` to ``1``/``true``/``yes`` forces the numpy path;
otherwise numba is used when importable. ``benchmarks/bench_backends.py``
times the two paths against each other.

Kernel contract notes:
  - grids are square with cell centers at (i + 1/2) h, values[j, i] sampling
    the point (x1, x2) = ((i + 1/2) h, (j + 1/2) h);
  - all displacements are minimal-image on the periodic box of side L;
  - point-vortex kernels report the minimal pair distance they saw instead of
    raising, so the same code compiles under numba. Callers translate a
    distance below the floor into CollisionError.
"""

import math
import os

import numpy as np


def _numba_disabled() -> bool:
    flag = os.environ.get("VORTEXLAB_DISABLE_NUMBA", "")
    return flag.strip().lower() in {"1", "true", "yes", "on"}


# ---------------------------------------------------------------------------
# pure-numpy implementations
# ---------------------------------------------------------------------------

def _wrap(delta, L):
    return delta - L * np.floor(delta / L + 0.5)


def pv_velocities_numpy(positions, strengths):
    """Pairwise Biot-Savart sum z^perp / (2 pi |z|^2); returns (vel, min_dist)."""
    n = positions.shape[0]
    vel = np.zeros_like(positions)
    if n < 2:
        return vel, math.inf
    dx = positions[:, 0][:, None] - positions[:, 0][None, :]
    dy = positions[:, 1][:, None] - positions[:, 1][None, :]
    r2 = dx * dx + dy * dy
    np.fill_diagonal(r2, np.inf)
    min_dist = math.sqrt(r2.min())
    coef = strengths[None, :] / (2.0 * np.pi * r2)
    vel[:, 0] = -(coef * dy).sum(axis=1)
    vel[:, 1] = (coef * dx).sum(axis=1)
    return vel, min_dist


def pv_rk4_steps_numpy(positions, strengths, dt, n_steps, floor):
    """Advance n_steps of classical RK4 in place.

    Returns (steps_done, min_dist, collided). Stops before a step whose first
    stage already sees a pair below the floor, and mid-step collisions leave
    the pre-step positions untouched.
    """
    min_seen = math.inf
    for step in range(n_steps):
        k1, d1 = pv_velocities_numpy(positions, strengths)
        k2, d2 = pv_velocities_numpy(positions + 0.5 * dt * k1, strengths)
        k3, d3 = pv_velocities_numpy(positions + 0.5 * dt * k2, strengths)
        k4, d4 = pv_velocities_numpy(positions + dt * k3, strengths)
        dmin = min(d1, d2, d3, d4)
        min_seen = min(min_seen, dmin)
        if dmin < floor:
            return step, min_seen, True
        positions += (dt / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
    return n_steps, min_seen, False


def minimal_image_moments_numpy(values, h, L, cx, cy):
    """Sums (v, v*dx, v*dy, v*|d|^2) with d the minimal-image offset from (cx, cy)."""
    n = values.shape[0]
    x = (np.arange(n) + 0.5) * h
    dx = _wrap(x - cx, L)
    dy = _wrap(x - cy, L)
    s0 = values.sum()
    sx = values.sum(axis=0) @ dx
    sy = values.sum(axis=1) @ dy
    s2 = (values * (dx[None, :] ** 2 + dy[:, None] ** 2)).sum()
    return s0, sx, sy, s2


def abs_first_moment_numpy(values, h, L, px, py):
    """Sum of v * |d| with d the minimal-image offset from (px, py)."""
    n = values.shape[0]
    x = (np.arange(n) + 0.5) * h
    dx = _wrap(x - px, L)
    dy = _wrap(x - py, L)
    r = np.hypot(dx[None, :], dy[:, None])
    return float((values * r).sum())


def outer_sum_numpy(values, h, L, cx, cy, radius):
    """Sum of v over cells whose minimal-image distance from (cx, cy) exceeds radius."""
    n = values.shape[0]
    x = (np.arange(n) + 0.5) * h
    dx = _wrap(x - cx, L)
    dy = _wrap(x - cy, L)
    mask = dx[None, :] ** 2 + dy[:, None] ** 2 > radius * radius
    return float(values[mask].sum())


# ---------------------------------------------------------------------------
# numba implementations (scalar loops, fused single pass over the grid)
# ---------------------------------------------------------------------------

def _build_numba_kernels():
    from numba import njit

    @njit(cache=True)
    def pv_velocities_nb(positions, strengths):
        n = positions.shape[0]
        vel = np.zeros_like(positions)
        min_dist = np.inf
        for i in range(n):
            ux = 0.0
            uy = 0.0
            for j in range(n):
                if j == i:
                    continue
                zx = positions[i, 0] - positions[j, 0]
                zy = positions[i, 1] - positions[j, 1]
                r2 = zx * zx + zy * zy
                if r2 < min_dist * min_dist:
                    min_dist = math.sqrt(r2)
                coef = strengths[j] / (2.0 * np.pi * r2)
                ux += -coef * zy
                uy += coef * zx
            vel[i, 0] = ux
            vel[i, 1] = uy
        return vel, min_dist

    @njit(cache=True)
    def pv_rk4_steps_nb(positions, strengths, dt, n_steps, floor):
        min_seen = np.inf
        for step in range(n_steps):
            k1, d1 = pv_velocities_nb(positions, strengths)
            k2, d2 = pv_velocities_nb(positions + 0.5 * dt * k1, strengths)
            k3, d3 = pv_velocities_nb(positions + 0.5 * dt * k2, strengths)
            k4, d4 = pv_velocities_nb(positions + dt * k3, strengths)
            dmin = min(min(d1, d2), min(d3, d4))
            if dmin < min_seen:
                min_seen = dmin
            if dmin < floor:
                return step, min_seen, True
            for i in range(positions.shape[0]):
                positions[i, 0] += (dt / 6.0) * (k1[i, 0] + 2.0 * (k2[i, 0] + k3[i, 0]) + k4[i, 0])
                positions[i, 1] += (dt / 6.0) * (k1[i, 1] + 2.0 * (k2[i, 1] + k3[i, 1]) + k4[i, 1])
        return n_steps, min_seen, False

    @njit(cache=True)
    def minimal_image_moments_nb(values, h, L, cx, cy):
        n = values.shape[0]
        s0 = 0.0
        sx = 0.0
        sy = 0.0
        s2 = 0.0
        for j in range(n):
            dy = (j + 0.5) * h - cy
            dy -= L * math.floor(dy / L + 0.5)
            for i in range(n):
                dx = (i + 0.5) * h - cx
                dx -= L * math.floor(dx / L + 0.5)
                v = values[j, i]
                s0 += v
                sx += v * dx
                sy += v * dy
                s2 += v * (dx * dx + dy * dy)
        return s0, sx, sy, s2

    @njit(cache=True)
    def abs_first_moment_nb(values, h, L, px, py):
        n = values.shape[0]
        acc = 0.0
        for j in range(n):
            dy = (j + 0.5) * h - py
            dy -= L * math.floor(dy / L + 0.5)
            for i in range(n):
                dx = (i + 0.5) * h - px
                dx -= L * math.floor(dx / L + 0.5)
                acc += values[j, i] * math.sqrt(dx * dx + dy * dy)
        return acc

    @njit(cache=True)
    def outer_sum_nb(values, h, L, cx, cy, radius):
        n = values.shape[0]
        r2lim = radius * radius
        acc = 0.0
        for j in range(n):
            dy = (j + 0.5) * h - cy
            dy -= L * math.floor(dy / L + 0.5)
            for i in range(n):
                dx = (i + 0.5) * h - cx
                dx -= L * math.floor(dx / L + 0.5)
                if dx * dx + dy * dy > r2lim:
                    acc += values[j, i]
        return acc

    return {
        "pv_velocities": pv_velocities_nb,
        "pv_rk4_steps": pv_rk4_steps_nb,
        "minimal_image_moments": minimal_image_moments_nb,
        "abs_first_moment": abs_first_moment_nb,
        "outer_sum": outer_sum_nb,
    }


NUMPY_KERNELS = {
    "pv_velocities": pv_velocities_numpy,
    "pv_rk4_steps": pv_rk4_steps_numpy,
    "minimal_image_moments": minimal_image_moments_numpy,
    "abs_first_moment": abs_first_moment_numpy,
    "outer_sum": outer_sum_numpy,
}

if _numba_disabled():
    BACKEND = "numpy"
    _kernels = NUMPY_KERNELS
else:
    try:
        _kernels = _build_numba_kernels()
        BACKEND = "numba"
    except ImportError:  # pragma: no cover - exercised only without numba
        _kernels = NUMPY_KERNELS
        BACKEND = "numpy"

USING_NUMBA = BACKEND == "numba"

pv_velocities_kernel = _kernels["pv_velocities"]
pv_rk4_steps_kernel = _kernels["pv_rk4_steps"]
minimal_image_moments = _kernels["minimal_image_moments"]
abs_first_moment = _kernels["abs_first_moment"]
outer_sum = _kernels["outer_sum"]
