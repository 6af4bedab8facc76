"""Coupled advection-diffusion of signed vorticity components.

Every component is advected by the one velocity field induced by the summed
vorticity and diffused with the same viscosity, so the total field obeys the
usual vorticity equation while each component keeps its own bookkeeping
(intensity, sign, moments).

Time integration is integrating-factor RK4: the diffusion semigroup
exp(-nu |k|^2 dt) is applied exactly in spectral space and classical RK4
advances the advection on the transformed variable. One velocity solve per
RK stage serves all components. The advective product is computed
pseudo-spectrally from 2/3-dealiased inputs and the product spectrum is
masked again; its zero mode is pinned to exactly zero, which is the discrete
form of intensity conservation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import CflViolation
from .fields import Grid, ScalarField, VectorField, biot_savart

_LANDING_EPS = 1e-12


@dataclass
class ComponentSet:
    """N signed vorticity components sharing one grid and one clock.

    ``omegas[i]`` holds component i; ``intensities[i]`` is its prescribed
    space integral, which the evolution conserves.
    """

    grid: Grid
    omegas: np.ndarray
    intensities: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        self.omegas = np.asarray(self.omegas, dtype=np.float64)
        self.intensities = np.atleast_1d(np.asarray(self.intensities, dtype=np.float64))
        n = self.grid.n
        if self.omegas.ndim != 3 or self.omegas.shape[1:] != (n, n):
            raise ValueError(f"omegas must have shape (N, {n}, {n}), got {self.omegas.shape}")
        if self.omegas.shape[0] != self.intensities.shape[0]:
            raise ValueError("component count mismatch between omegas and intensities")
        if self.omegas.shape[0] < 1:
            raise ValueError("need at least one component")
        if np.any(self.intensities == 0.0):
            raise ValueError("component intensities must be nonzero")

    @property
    def n_components(self) -> int:
        return self.omegas.shape[0]

    @property
    def components(self) -> list[ScalarField]:
        return [ScalarField(self.grid, self.omegas[i]) for i in range(self.n_components)]

    def total(self) -> ScalarField:
        return ScalarField(self.grid, self.omegas.sum(axis=0))

    def copy(self) -> "ComponentSet":
        return ComponentSet(self.grid, self.omegas.copy(), self.intensities.copy(), self.time)

    def sign_violations(self) -> np.ndarray:
        """Per component: max wrong-sign magnitude relative to the sup norm."""
        out = np.zeros(self.n_components)
        for i in range(self.n_components):
            w = self.omegas[i]
            peak = np.max(np.abs(w))
            if peak == 0.0:
                continue
            wrong = -np.sign(self.intensities[i]) * np.min(np.sign(self.intensities[i]) * w)
            out[i] = max(0.0, wrong) / peak
        return out


@dataclass
class SolverParams:
    """Time-stepping knobs; ``sign_abort_tol=None`` disables the sign guard."""

    nu: float
    cfl: float = 0.4
    t_end: float = 0.0
    snapshot_times: tuple = ()
    dealias: bool = True
    sign_abort_tol: float | None = 1e-3
    umax_floor: float = 1e-12

    def __post_init__(self):
        if self.nu < 0:
            raise ValueError(f"viscosity must be nonnegative, got {self.nu}")
        if not 0 < self.cfl <= 1:
            raise ValueError(f"cfl must lie in (0, 1], got {self.cfl}")


@dataclass
class RunResult:
    """Scheduled observations plus the final state of a run."""

    times: list[float]
    records: list
    state: ComponentSet
    n_steps: int = 0
    aborted: bool = False
    abort_reason: str | None = None


class _Stepper:
    """Spectral-space workspace for one (grid, nu, dealias) combination."""

    def __init__(self, grid: Grid, nu: float, dealias: bool):
        self.grid = grid
        self.nu = nu
        self.mask = grid.dealias_mask if dealias else None
        self.d1 = 1j * grid.k1_deriv
        self.d2 = 1j * grid.k2_deriv
        self._exp_cache: dict[float, tuple[np.ndarray, np.ndarray]] = {}

    def to_hats(self, omegas: np.ndarray) -> np.ndarray:
        return np.stack([self.grid.to_spectral(w) for w in omegas])

    def to_physical(self, hats: np.ndarray) -> np.ndarray:
        return np.stack([self.grid.from_spectral(h) for h in hats])

    def factors(self, dt: float) -> tuple[np.ndarray, np.ndarray]:
        hit = self._exp_cache.get(dt)
        if hit is None:
            if len(self._exp_cache) > 8:
                self._exp_cache.clear()
            decay = self.nu * self.grid.ksq
            hit = (np.exp(-decay * dt), np.exp(-decay * (dt / 2.0)))
            self._exp_cache[dt] = hit
        return hit

    def advection(self, hats: np.ndarray) -> tuple[np.ndarray, float]:
        """Advection spectra -FFT(u . grad w_i) and the max velocity magnitude.

        The 2/3 mask is applied to the product spectrum only; masking the
        inputs instead would break the pointwise cancellations (tangential
        velocity against radial gradients) that the moment laws rely on.
        """
        g = self.grid
        psi = -hats.sum(axis=0) * g.inv_ksq
        u1 = g.from_spectral(-self.d2 * psi)
        u2 = g.from_spectral(self.d1 * psi)
        umax = max(np.max(np.abs(u1)), np.max(np.abs(u2)))
        out = np.empty_like(hats)
        for i in range(hats.shape[0]):
            g1 = g.from_spectral(self.d1 * hats[i])
            g2 = g.from_spectral(self.d2 * hats[i])
            adv = -g.to_spectral(u1 * g1 + u2 * g2)
            if self.mask is not None:
                adv *= self.mask
            adv[0, 0] = 0.0  # discrete intensity conservation
            out[i] = adv
        return out, umax

    def step(self, hats: np.ndarray, dt: float, first_stage: np.ndarray | None = None) -> np.ndarray:
        e_full, e_half = self.factors(dt)
        a = first_stage if first_stage is not None else self.advection(hats)[0]
        b, _ = self.advection(e_half * (hats + (dt / 2.0) * a))
        c, _ = self.advection(e_half * hats + (dt / 2.0) * b)
        d, _ = self.advection(e_full * hats + dt * (e_half * c))
        return e_full * hats + (dt / 6.0) * (e_full * a + 2.0 * e_half * (b + c) + d)


def advect_diffuse_rhs(state: ComponentSet, nu: float, dealias: bool = True) -> list[ScalarField]:
    """Semi-discrete right-hand side -u . grad(w_i) + nu lap(w_i) per component."""
    if not np.all(np.isfinite(state.omegas)):
        raise ValueError("advect_diffuse_rhs: state contains non-finite values")
    stepper = _Stepper(state.grid, nu, dealias)
    hats = stepper.to_hats(state.omegas)
    adv, _ = stepper.advection(hats)
    out = []
    for i in range(state.n_components):
        rhs_hat = adv[i] - nu * state.grid.ksq * hats[i]
        out.append(ScalarField(state.grid, state.grid.from_spectral(rhs_hat)))
    return out


def velocity(state: ComponentSet) -> VectorField:
    """Shared velocity induced by the summed vorticity."""
    return biot_savart(state.total())


def cfl_dt(state: ComponentSet, params: SolverParams) -> float:
    """Admissible step cfl * h / max(|u|_inf, floor)."""
    umax = velocity(state).max_speed()
    return params.cfl * state.grid.h / max(umax, params.umax_floor)


def step(state: ComponentSet, params: SolverParams, dt: float) -> ComponentSet:
    """One integrating-factor RK4 step of size dt.

    dt must not exceed cfl_dt(state, params); violations raise CflViolation
    naming the admissible step.
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if not np.all(np.isfinite(state.omegas)):
        raise ValueError("step: state contains non-finite values")
    admissible = cfl_dt(state, params)
    if dt > admissible * (1.0 + 1e-9):
        raise CflViolation(f"dt={dt:.6e} exceeds admissible CFL step {admissible:.6e}")
    stepper = _Stepper(state.grid, params.nu, params.dealias)
    hats = stepper.step(stepper.to_hats(state.omegas), dt)
    return ComponentSet(state.grid, stepper.to_physical(hats), state.intensities.copy(), state.time + dt)


def _validate_schedule(times: Sequence[float], t0: float, t_end: float, label: str):
    times = list(times)
    if any(b <= a for a, b in zip(times, times[1:])):
        raise ValueError(f"{label} must be strictly increasing")
    if times and (times[0] < t0 - _LANDING_EPS or times[-1] > t_end + _LANDING_EPS):
        raise ValueError(f"{label} must lie within [{t0}, {t_end}]")
    return times


def run(
    initial: ComponentSet,
    params: SolverParams,
    diag_times: Sequence[float],
    observer: Callable[[ComponentSet], object] | None = None,
    snapshot_writer: Callable[[ComponentSet], None] | None = None,
) -> RunResult:
    """Integrate to params.t_end, landing exactly on every scheduled time.

    The observer is invoked at each diagnostic time (including the initial
    time when scheduled) and its return values are collected in the result.
    Snapshot times from params trigger snapshot_writer the same way. On a
    sign violation beyond params.sign_abort_tol or a non-finite state the run
    stops and returns the records gathered so far with ``aborted=True``.
    """
    t0 = initial.time
    t_end = params.t_end
    if t_end < t0:
        raise ValueError(f"t_end={t_end} precedes initial time {t0}")
    diag = _validate_schedule(diag_times, t0, t_end, "diagnostic schedule")
    snaps = _validate_schedule(params.snapshot_times, t0, t_end, "snapshot schedule")
    if observer is None:
        observer = lambda s: s.copy()  # noqa: E731 - default snapshot observer

    targets = sorted(set(diag) | set(snaps) | {t_end})
    diag_set = set(diag)
    snap_set = set(snaps)

    result = RunResult(times=[], records=[], state=initial.copy())
    stepper = _Stepper(initial.grid, params.nu, params.dealias)
    hats = stepper.to_hats(initial.omegas)
    t = t0
    scale = max(1.0, abs(t_end))

    def materialize() -> ComponentSet:
        if result.n_steps == 0:
            # before any step the state is the input, bitwise
            return ComponentSet(initial.grid, initial.omegas.copy(), initial.intensities.copy(), t)
        return ComponentSet(initial.grid, stepper.to_physical(hats), initial.intensities.copy(), t)

    def emit(at: float) -> bool:
        """Record/snapshot at a landed time; returns False on abort."""
        state = materialize()
        result.state = state
        if not np.all(np.isfinite(state.omegas)):
            result.aborted = True
            result.abort_reason = f"non-finite state at t={at:.6g}"
            return False
        if at in diag_set:
            result.times.append(at)
            result.records.append(observer(state))
        if at in snap_set and snapshot_writer is not None:
            snapshot_writer(state)
        if params.sign_abort_tol is not None:
            viol = state.sign_violations()
            worst = int(np.argmax(viol))
            if viol[worst] > params.sign_abort_tol:
                result.aborted = True
                result.abort_reason = (
                    f"sign violation {viol[worst]:.3e} on component {worst} at t={at:.6g}"
                )
                return False
        return True

    if not emit(t):
        return result

    for target in targets:
        if target <= t:
            continue
        while t < target - _LANDING_EPS * scale:
            first, umax = stepper.advection(hats)
            if not np.isfinite(umax):
                result.state = materialize()
                result.aborted = True
                result.abort_reason = f"non-finite velocity at t={t:.6g}"
                return result
            dt = params.cfl * initial.grid.h / max(umax, params.umax_floor)
            remaining = target - t
            if dt >= remaining:
                dt = remaining
                t = target
            else:
                t = t + dt
            hats = stepper.step(hats, dt, first_stage=first)
            result.n_steps += 1
        t = target
        if not emit(t):
            return result

    result.state = materialize()
    return result
