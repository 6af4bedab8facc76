"""Point-vortex system: pairwise interaction, RK4 integration, first integrals.

Each vortex moves in the field of the others through the kernel
K(z) = z^perp / (2 pi |z|^2); there is no self-interaction. The integrator
monitors the conserved quantities (interaction energy, linear impulse,
angular impulse) and the minimal pair distance against a collision floor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import accel
from .errors import CollisionError


@dataclass
class PVState:
    """Positions (N, 2), strengths (N,), and the current time."""

    positions: np.ndarray
    strengths: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=np.float64).reshape(-1, 2)
        self.strengths = np.atleast_1d(np.asarray(self.strengths, dtype=np.float64))
        if self.positions.shape[0] != self.strengths.shape[0]:
            raise ValueError("position/strength count mismatch")

    @property
    def n(self) -> int:
        return self.positions.shape[0]

    def min_pair_distance(self) -> float:
        if self.n < 2:
            return math.inf
        diff = self.positions[:, None, :] - self.positions[None, :, :]
        r2 = (diff ** 2).sum(axis=-1)
        np.fill_diagonal(r2, np.inf)
        return float(np.sqrt(r2.min()))

    def copy(self) -> "PVState":
        return PVState(self.positions.copy(), self.strengths.copy(), self.time)


@dataclass
class PVTrajectory:
    """Sampled trajectory with invariants; ``aborted`` marks a collision stop."""

    times: list[float] = field(default_factory=list)
    positions: list[np.ndarray] = field(default_factory=list)
    hamiltonian: list[float] = field(default_factory=list)
    linear_impulse: list[np.ndarray] = field(default_factory=list)
    angular_impulse: list[float] = field(default_factory=list)
    aborted: bool = False
    abort_reason: str | None = None

    def position_array(self) -> np.ndarray:
        return np.asarray(self.positions)


def pv_velocities(state: PVState, collision_floor: float = 0.0) -> np.ndarray:
    """Velocities dY_i/dt = sum_{j != i} a_j K(Y_i - Y_j)."""
    vel, min_dist = accel.pv_velocities_kernel(state.positions, state.strengths)
    if min_dist < max(collision_floor, 0.0) or min_dist == 0.0:
        raise CollisionError(
            f"pair distance {min_dist:.6e} below collision floor {collision_floor:.6e}"
        )
    return vel


def pv_step_rk4(state: PVState, dt: float, collision_floor: float = 0.0) -> PVState:
    """One classical RK4 step; collisions at any stage raise CollisionError."""
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    y = state.positions
    k1 = pv_velocities(state, collision_floor)
    k2 = pv_velocities(PVState(y + 0.5 * dt * k1, state.strengths), collision_floor)
    k3 = pv_velocities(PVState(y + 0.5 * dt * k2, state.strengths), collision_floor)
    k4 = pv_velocities(PVState(y + dt * k3, state.strengths), collision_floor)
    return PVState(
        y + (dt / 6.0) * (k1 + 2.0 * (k2 + k3) + k4),
        state.strengths.copy(),
        state.time + dt,
    )


def hamiltonian(state: PVState) -> float:
    """Interaction energy -(1/4 pi) sum_{i != j} a_i a_j log |Y_i - Y_j|."""
    n = state.n
    if n < 2:
        return 0.0
    diff = state.positions[:, None, :] - state.positions[None, :, :]
    r2 = (diff ** 2).sum(axis=-1)
    iu = np.triu_indices(n, k=1)
    if np.any(r2[iu] == 0.0):
        raise ValueError("hamiltonian undefined for coincident vortices")
    a = state.strengths
    # sum over unordered pairs of a_i a_j log r^2 equals the ordered-pair
    # sum of a_i a_j log r
    pair = (a[:, None] * a[None, :])[iu] * np.log(r2[iu])
    return float(-(1.0 / (4.0 * np.pi)) * pair.sum())


def pv_invariants(state: PVState) -> tuple[np.ndarray, float]:
    """Linear impulse P = sum a_i Y_i and angular impulse I = sum a_i |Y_i|^2."""
    a = state.strengths
    P = (a[:, None] * state.positions).sum(axis=0)
    I = float((a * (state.positions ** 2).sum(axis=1)).sum())
    return P, I


def pv_run(
    initial: PVState,
    t_end: float,
    dt: float,
    schedule: Sequence[float],
    collision_floor: float | None = None,
) -> PVTrajectory:
    """Fixed-step RK4 with exact landing on every scheduled time.

    The nominal step is dt; the step into a scheduled time is shortened to
    land exactly. ``collision_floor=None`` defaults to 1e-3 times the initial
    minimal pair distance. On collision the trajectory collected so far is
    returned with ``aborted=True``.
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    t0 = initial.time
    if t_end < t0:
        raise ValueError(f"t_end={t_end} precedes initial time {t0}")
    schedule = list(schedule)
    if any(b <= a for a, b in zip(schedule, schedule[1:])):
        raise ValueError("schedule must be strictly increasing")
    if schedule and (schedule[0] < t0 or schedule[-1] > t_end + 1e-12):
        raise ValueError(f"schedule must lie within [{t0}, {t_end}]")
    if collision_floor is None:
        d0 = initial.min_pair_distance()
        collision_floor = 0.0 if math.isinf(d0) else 1e-3 * d0

    traj = PVTrajectory()
    state = initial.copy()

    def record(at: float):
        traj.times.append(at)
        traj.positions.append(state.positions.copy())
        traj.hamiltonian.append(hamiltonian(state))
        P, I = pv_invariants(state)
        traj.linear_impulse.append(P)
        traj.angular_impulse.append(I)

    targets = sorted(set(schedule) | {t_end})
    if schedule and schedule[0] == t0:
        record(t0)
    t = t0
    for target in targets:
        if target <= t:
            continue
        span = target - t
        n_full = int(math.floor(span / dt * (1.0 + 1e-12)))
        pos = state.positions.copy()
        done, _min_seen, collided = accel.pv_rk4_steps_kernel(
            pos, state.strengths, dt, n_full, collision_floor
        )
        state = PVState(pos, state.strengths, t + done * dt)
        t = state.time
        if collided:
            traj.aborted = True
            traj.abort_reason = f"collision floor {collision_floor:.3e} crossed near t={t:.6g}"
            return traj
        if target - t > 1e-12 * max(1.0, abs(t_end)):
            try:
                state = pv_step_rk4(state, target - t, collision_floor)
            except CollisionError as exc:
                traj.aborted = True
                traj.abort_reason = str(exc)
                return traj
        state.time = target
        t = target
        if target in schedule:
            record(target)
    return traj
