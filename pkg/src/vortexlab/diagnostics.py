"""Concentration diagnostics for vorticity components.

All moments use minimal-image distances on the periodic box, midpoint cell
sums as quadrature, and are pure functions of their inputs. The second-moment
concentration radius about a point p is

    w2(p) = sqrt( (1/a) h^2 sum dmin(x, p)^2 w(x) ),

which obeys the parallel-axis identity w2(p)^2 = w2(X)^2 + dmin(X, p)^2 about
the centroid X, so the centroid is the minimizing reference point.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import accel
from .fields import ScalarField
from .point_vortex import PVState
from .solver import ComponentSet

#: header of diagnostics.csv, one row per (time, component)
CSV_HEADER = "t,i,a,X_x,X_y,W2,W2_about_Y,mR,R,l1,l2,l4,linf,distXY,w1_contrib"

_LOCALIZATION_TOL = 1e-6
_NEGATIVE_VARIANCE_TOL = -1e-12


class DegenerateComponentError(ValueError):
    """Component carries (numerically) no intensity."""


class NegativeVarianceError(ValueError):
    """Second moment came out negative beyond tolerance (sign-violation noise)."""


def intensity(component: ScalarField) -> float:
    """Space integral of the component (its circulation)."""
    h = component.grid.h
    return float(h * h * component.values.sum())


def centroid(component: ScalarField, a: float) -> tuple[float, float]:
    """Periodic-safe center of vorticity (1/a) integral of x w(x).

    The circular mean per axis (phase of the first Fourier moment of |w|)
    gives a seed that is then refined by the mean of minimal-image
    displacements about it, so the result is exact for fields localized in
    a half-period and equivariant under full-cell translations.
    """
    if abs(a) <= 0.0:
        raise DegenerateComponentError("centroid needs a nonzero intensity")
    g = component.grid
    h = g.h
    if abs(h * h * component.values.sum()) < 1e-14:
        raise DegenerateComponentError("component intensity below 1e-14")
    absw = np.abs(component.values)
    phase = np.exp(2j * np.pi * g.x / g.L)
    cx = (np.angle(absw.sum(axis=0) @ phase) / (2.0 * np.pi)) * g.L % g.L
    cy = (np.angle(absw.sum(axis=1) @ phase) / (2.0 * np.pi)) * g.L % g.L
    _s0, sx, sy, _s2 = accel.minimal_image_moments(component.values, h, g.L, cx, cy)
    return ((cx + h * h * sx / a) % g.L, (cy + h * h * sy / a) % g.L)


def w2_to_point(component: ScalarField, a: float, p: Sequence[float]) -> float:
    """Concentration radius about p: sqrt of the normalized second moment.

    Emits a localization warning when more than 1e-6 of the mass sits beyond
    L/4 of p. Small negative variances (sign-violation noise) clamp to zero;
    values below -1e-12 raise NegativeVarianceError.
    """
    if abs(a) <= 0.0:
        raise DegenerateComponentError("w2_to_point needs a nonzero intensity")
    g = component.grid
    h = g.h
    px, py = float(p[0]), float(p[1])
    _s0, _sx, _sy, s2 = accel.minimal_image_moments(component.values, h, g.L, px, py)
    far = accel.outer_sum(component.values, h, g.L, px, py, g.L / 4.0)
    if abs(h * h * far / a) > _LOCALIZATION_TOL:
        warnings.warn(
            f"w2_to_point: mass fraction {h * h * far / a:.3e} beyond L/4 of the "
            "reference point; periodic surrogate may misrepresent plane moments",
            stacklevel=2,
        )
    var = h * h * s2 / a
    if var < _NEGATIVE_VARIANCE_TOL:
        raise NegativeVarianceError(f"negative variance {var:.3e}")
    return math.sqrt(max(var, 0.0))


def outer_mass(component: ScalarField, a: float, center: Sequence[float], R: float) -> float:
    """Normalized mass fraction beyond distance R from center."""
    if abs(a) <= 0.0:
        raise DegenerateComponentError("outer_mass needs a nonzero intensity")
    if R < 0:
        raise ValueError(f"R must be nonnegative, got {R}")
    g = component.grid
    h = g.h
    s = accel.outer_sum(component.values, h, g.L, float(center[0]), float(center[1]), R)
    return float(h * h * s / a)


def lp_norm(field: ScalarField, p) -> float:
    """(h^2 sum |w|^p)^(1/p), or max|w| for p = inf."""
    if p == math.inf or p == "inf":
        return float(np.max(np.abs(field.values)))
    p = float(p)
    if p < 1:
        raise ValueError(f"lp_norm requires p >= 1, got {p}")
    h = field.grid.h
    return float((h * h * (np.abs(field.values) ** p).sum()) ** (1.0 / p))


def w1_contribution(component: ScalarField, a: float, point: Sequence[float]) -> float:
    """|a| times the normalized first absolute moment about the point."""
    g = component.grid
    h = g.h
    s = accel.abs_first_moment(component.values, h, g.L, float(point[0]), float(point[1]))
    return float(abs(a) * (h * h * s / a))


def w1_upper_bound(components: ComponentSet, pv: PVState) -> float:
    """First-moment bound on the transport distance to the atomic measure.

    Sum over components of |a_i| * (1/a_i) integral of |x - Y_i| w_i(x) dx,
    an upper bound for the Kantorovich-Rubinstein distance between the total
    field and sum_i a_i delta_{Y_i}.
    """
    if components.n_components != pv.n:
        raise ValueError(
            f"component count {components.n_components} != vortex count {pv.n}"
        )
    total = 0.0
    for i, comp in enumerate(components.components):
        total += w1_contribution(comp, float(components.intensities[i]), pv.positions[i])
    return total


@dataclass
class ComponentDiagnostics:
    """Per-time, per-component measurements (one diagnostics.csv row)."""

    t: float
    i: int
    a: float
    X: tuple[float, float]
    W2: float
    W2_about_Y: float
    m_R: float
    R: float
    lp_norms: dict
    dist_to_Y: float
    w1_contrib: float


@dataclass
class DiagnosticsSeries:
    """Time-ordered diagnostics records plus the paired vortex positions."""

    L: float
    times: list[float] = field(default_factory=list)
    records: list[list[ComponentDiagnostics]] = field(default_factory=list)
    pv_positions: list[np.ndarray] = field(default_factory=list)

    def append(self, t: float, recs: list[ComponentDiagnostics], pv_pos=None):
        if self.times and t <= self.times[-1]:
            raise ValueError("diagnostics times must be strictly increasing")
        if self.records and len(recs) != len(self.records[0]):
            raise ValueError("incomplete component set in diagnostics record")
        self.times.append(t)
        self.records.append(recs)
        if pv_pos is not None:
            self.pv_positions.append(np.asarray(pv_pos, dtype=np.float64))

    def component_centroids(self, i: int) -> np.ndarray:
        return np.asarray([recs[i].X for recs in self.records])


def _torus_distance(p, q, L: float) -> float:
    dx = (p[0] - q[0]) - L * math.floor((p[0] - q[0]) / L + 0.5)
    dy = (p[1] - q[1]) - L * math.floor((p[1] - q[1]) / L + 0.5)
    return math.hypot(dx, dy)


def measure_components(
    state: ComponentSet,
    pv_positions: np.ndarray | None = None,
    R: float | None = None,
) -> list[ComponentDiagnostics]:
    """One full diagnostics record for every component of the state.

    ``pv_positions`` supplies the paired point-vortex positions Y_i at the
    same time; without them the Y-relative columns are NaN. A second moment
    degraded below the negative-variance tolerance by sign noise is recorded
    as NaN rather than aborting the caller's run.
    """
    g = state.grid
    if R is None:
        R = g.L / 4.0
    out = []
    for i, comp in enumerate(state.components):
        a = float(state.intensities[i])
        X = centroid(comp, a)
        try:
            W2 = w2_to_point(comp, a, X)
        except NegativeVarianceError:
            W2 = math.nan
        lp = {
            1: lp_norm(comp, 1),
            2: lp_norm(comp, 2),
            4: lp_norm(comp, 4),
            math.inf: lp_norm(comp, math.inf),
        }
        if pv_positions is not None:
            Y = pv_positions[i]
            try:
                W2Y = w2_to_point(comp, a, Y)
            except NegativeVarianceError:
                W2Y = math.nan
            dXY = _torus_distance(X, Y, g.L)
            w1c = w1_contribution(comp, a, Y)
        else:
            W2Y = math.nan
            dXY = math.nan
            w1c = math.nan
        out.append(
            ComponentDiagnostics(
                t=state.time, i=i, a=a, X=X, W2=W2, W2_about_Y=W2Y,
                m_R=outer_mass(comp, a, X, R), R=R, lp_norms=lp,
                dist_to_Y=dXY, w1_contrib=w1c,
            )
        )
    return out


def centroid_velocity_fd(series: DiagnosticsSeries, i: int) -> np.ndarray:
    """Finite-difference centroid velocity of component i.

    Uses centered differences at interior records and one-sided differences
    at the endpoints; requires at least 3 uniformly spaced records. Centroid
    trajectories are unwrapped across the periodic seam before differencing.
    """
    times = np.asarray(series.times)
    if times.size < 3:
        raise ValueError("centroid_velocity_fd needs at least 3 records")
    dts = np.diff(times)
    if np.max(np.abs(dts - dts[0])) > 1e-9 * abs(dts[0]):
        raise ValueError("centroid_velocity_fd requires uniform record spacing")
    dt = dts[0]
    X = series.component_centroids(i)
    L = series.L
    steps = X[1:] - X[:-1]
    steps -= L * np.floor(steps / L + 0.5)
    X = np.vstack([X[0], X[0] + np.cumsum(steps, axis=0)])
    v = np.empty_like(X)
    v[1:-1] = (X[2:] - X[:-2]) / (2.0 * dt)
    v[0] = (X[1] - X[0]) / dt
    v[-1] = (X[-1] - X[-2]) / dt
    return v


@dataclass
class RateFit:
    exponent: float
    prefactor: float
    max_rel_residual: float


def rate_fit(samples: Sequence[tuple[float, float]]) -> RateFit:
    """Least-squares power-law fit W = C s^q through log-log regression."""
    if len(samples) < 3:
        raise ValueError("rate_fit needs at least 3 samples")
    s = np.asarray([p[0] for p in samples], dtype=np.float64)
    w = np.asarray([p[1] for p in samples], dtype=np.float64)
    if np.any(s <= 0) or np.any(w <= 0):
        raise ValueError("rate_fit requires positive scales and responses")
    q, logc = np.polyfit(np.log(s), np.log(w), 1)
    c = math.exp(logc)
    resid = np.max(np.abs(c * s ** q - w) / w)
    return RateFit(float(q), float(c), float(resid))
