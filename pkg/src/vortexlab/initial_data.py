"""Generators for concentrated initial vorticity and hypothesis verification.

Profiles are parametrized by a concentration scale eps defined as the
continuum second-moment radius of the blob about its center: a Gaussian of
scale sigma = eps / 2 has exactly that radius, a uniform disc of radius eps
has radius eps / sqrt(2). Every generator samples at cell centers and then
renormalizes the discrete mass so the intensity is the prescribed value to
round-off, and every generated component has definite sign.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .diagnostics import lp_norm, outer_mass, w2_to_point
from .fields import Grid, ScalarField
from .point_vortex import PVState
from .solver import ComponentSet

PROFILES = ("gaussian", "disc", "stretched_gaussian")


@dataclass
class BlobSpec:
    """One layout entry: where, how concentrated, how strong, which profile."""

    center: tuple[float, float]
    eps: float
    a: float
    profile: str = "gaussian"
    mollify_width: float | None = None
    aspect: float = 1.0

    def __post_init__(self):
        if self.profile not in PROFILES:
            raise ValueError(f"unknown profile {self.profile!r}; expected one of {PROFILES}")


def _offsets(grid: Grid, center) -> tuple[np.ndarray, np.ndarray]:
    cx, cy = float(center[0]), float(center[1])
    if not (0 <= cx < grid.L and 0 <= cy < grid.L):
        raise ValueError(f"center {center} outside domain [0, {grid.L})^2")
    dx = grid.wrap(grid.x - cx)
    dy = grid.wrap(grid.x - cy)
    return dx[None, :], dy[:, None]


def _check_margin(grid: Grid, center, margin: float, what: str):
    cx, cy = float(center[0]), float(center[1])
    near = min(cx, grid.L - cx, cy, grid.L - cy)
    if near < margin:
        raise ValueError(
            f"{what} at {center} lies within {margin:.3g} of the domain boundary"
        )


def _renormalize(values: np.ndarray, a: float, h: float) -> np.ndarray:
    mass = h * h * values.sum()
    if mass == 0.0:
        raise ValueError("generated blob has zero discrete mass (unresolvable)")
    return values * (a / mass)


def gaussian_component(center, eps: float, a: float, grid: Grid) -> ScalarField:
    """Gaussian blob with continuum second-moment radius eps about center.

    Samples (a / sigma^2) G(d / sigma) with sigma = eps / 2 and
    G(xi) = exp(-|xi|^2 / 4) / (4 pi), then renormalizes the grid mass to a.
    """
    if eps <= 0 or a == 0:
        raise ValueError("gaussian_component needs eps > 0 and a != 0")
    sigma = eps / 2.0
    _check_margin(grid, center, 4.0 * sigma, "gaussian blob")
    dx, dy = _offsets(grid, center)
    values = (a / (4.0 * np.pi * sigma * sigma)) * np.exp(
        -(dx * dx + dy * dy) / (4.0 * sigma * sigma)
    )
    return ScalarField(grid, _renormalize(values, a, grid.h))


def _smoothstep(u: np.ndarray) -> np.ndarray:
    """C-infinity ramp: 0 for u <= 0, 1 for u >= 1."""
    out = np.zeros_like(u)
    inside = u >= 1.0
    out[inside] = 1.0
    band = (u > 0.0) & ~inside
    ub = u[band]
    g = np.exp(-1.0 / ub)
    gc = np.exp(-1.0 / (1.0 - ub))
    out[band] = g / (g + gc)
    return out


def disc_component(center, eps: float, a: float, grid: Grid, mollify_width: float) -> ScalarField:
    """Uniform disc of radius eps with a smooth rim of width mollify_width.

    The density a / (pi eps^2) transitions to zero across a band centered on
    the nominal radius, so the second-moment radius matches the sharp disc
    to O((mollify_width / eps)^2) and the support extends at most half the
    rim width beyond eps. mollify_width must lie in (0, eps / 4]; the grid
    mass is renormalized to a.
    """
    if eps <= 0 or a == 0:
        raise ValueError("disc_component needs eps > 0 and a != 0")
    if not 0 < mollify_width <= eps / 4.0:
        raise ValueError(f"mollify_width must lie in (0, eps/4], got {mollify_width}")
    _check_margin(grid, center, 2.0 * eps, "disc blob")
    dx, dy = _offsets(grid, center)
    r = np.hypot(dx, dy)
    ramp = _smoothstep((eps - r) / mollify_width + 0.5)
    values = (a / (np.pi * eps * eps)) * ramp
    return ScalarField(grid, _renormalize(values, a, grid.h))


def stretched_gaussian_component(
    center, eps: float, a: float, grid: Grid, aspect: float
) -> ScalarField:
    """Anisotropic Gaussian blob for elongated vortex regions.

    Axis scales are sigma * sqrt(aspect) and sigma / sqrt(aspect) with
    sigma = eps / 2, so the geometric-mean scale matches the round blob and
    the second-moment radius is eps * sqrt((aspect + 1/aspect) / 2).
    """
    if eps <= 0 or a == 0 or aspect <= 0:
        raise ValueError("stretched_gaussian_component needs eps > 0, a != 0, aspect > 0")
    sigma = eps / 2.0
    sx = sigma * math.sqrt(aspect)
    sy = sigma / math.sqrt(aspect)
    _check_margin(grid, center, 4.0 * max(sx, sy), "stretched gaussian blob")
    dx, dy = _offsets(grid, center)
    values = (a / (4.0 * np.pi * sx * sy)) * np.exp(
        -(dx * dx) / (4.0 * sx * sx) - (dy * dy) / (4.0 * sy * sy)
    )
    return ScalarField(grid, _renormalize(values, a, grid.h))


def lamb_oseen_exact(t: float, nu: float, a: float, center, grid: Grid) -> ScalarField:
    """Self-similar viscous vortex a (nu t)^{-1} G(d / sqrt(nu t)), sampled.

    Unlike the blob generators this is not renormalized: the sampled mass
    already matches a to round-off on adequately resolved grids. nu t = 0
    (an atomic datum) is not representable and raises.
    """
    if nu * t <= 0:
        raise ValueError("lamb_oseen_exact needs nu * t > 0")
    s2 = nu * t
    dx, dy = _offsets(grid, center)
    values = (a / (4.0 * np.pi * s2)) * np.exp(-(dx * dx + dy * dy) / (4.0 * s2))
    return ScalarField(grid, values)


def make_component(spec: BlobSpec, grid: Grid) -> ScalarField:
    if spec.profile == "gaussian":
        return gaussian_component(spec.center, spec.eps, spec.a, grid)
    if spec.profile == "disc":
        width = spec.mollify_width if spec.mollify_width is not None else spec.eps / 8.0
        return disc_component(spec.center, spec.eps, spec.a, grid, width)
    return stretched_gaussian_component(spec.center, spec.eps, spec.a, grid, spec.aspect)


def assemble_configuration(
    layout: Sequence[BlobSpec], grid: Grid
) -> tuple[ComponentSet, float]:
    """Build the N-component initial state; returns (state, min pair distance).

    Requires every pairwise (minimal-image) center distance to exceed twice
    the largest concentration scale and every blob to clear the boundary
    margin of its generator. The distance d is +inf for a single component.
    """
    if not layout:
        raise ValueError("layout must contain at least one blob")
    max_eps = max(spec.eps for spec in layout)
    offenders = []
    d = math.inf
    for i in range(len(layout)):
        for j in range(i + 1, len(layout)):
            pi, pj = layout[i].center, layout[j].center
            dx = grid.wrap(pi[0] - pj[0])
            dy = grid.wrap(pi[1] - pj[1])
            dist = math.hypot(dx, dy)
            d = min(d, dist)
            if dist <= 2.0 * max_eps:
                offenders.append((i, j, dist))
    if offenders:
        raise ValueError(
            "blob pairs closer than twice the largest eps: "
            + ", ".join(f"({i},{j}) at {dist:.4g}" for i, j, dist in offenders)
        )
    omegas = np.stack([make_component(spec, grid).values for spec in layout])
    intensities = np.asarray([spec.a for spec in layout], dtype=np.float64)
    return ComponentSet(grid, omegas, intensities, time=0.0), d


def verify_assumptions(
    components: ComponentSet,
    pv0: PVState,
    eps: float,
    gamma: float,
    beta: float,
    R: float,
    p: float,
) -> dict:
    """Report whether the concentration hypotheses hold and with what margins.

    Per component: the second-moment radius about Y_i against eps, the L^p
    norm against eps^-gamma, and the outer mass at R against eps^beta;
    plus the minimal admissible gamma and the largest admissible beta the
    measured values would allow. Report-only: nothing raises on failure.
    """
    if components.n_components != pv0.n:
        raise ValueError("component/vortex count mismatch")
    log_inv_eps = math.log(1.0 / eps)
    rows = []
    for i, comp in enumerate(components.components):
        a = float(components.intensities[i])
        w2 = w2_to_point(comp, a, pv0.positions[i])
        lp = lp_norm(comp, p)
        m0 = outer_mass(comp, a, pv0.positions[i], R)
        gamma_min = max(math.log(lp) / log_inv_eps, 0.0) if lp > 0 else 0.0
        if m0 <= 0:
            beta_max = None  # no outer mass at all: any beta is admissible
        else:
            beta_max = math.log(m0) / math.log(eps)
        rows.append(
            {
                "i": i,
                "a": a,
                "w2_to_center": w2,
                "w2_bound": eps,
                "w2_pass": bool(w2 <= eps * (1.0 + 1e-9)),
                "lp_norm": lp,
                "lp_bound": eps ** (-gamma),
                "lp_pass": bool(lp <= eps ** (-gamma)),
                "outer_mass": m0,
                "outer_mass_bound": eps ** beta,
                "outer_mass_pass": bool(m0 <= eps ** beta),
                "gamma_min": gamma_min,
                "beta_max": beta_max,
            }
        )
    betas = [r["beta_max"] for r in rows if r["beta_max"] is not None]
    return {
        "eps": eps,
        "gamma": gamma,
        "beta": beta,
        "R": R,
        "p": p,
        "components": rows,
        "gamma_min_required": max(r["gamma_min"] for r in rows),
        "beta_max_admissible": min(betas) if betas else None,
        "all_pass": all(r["w2_pass"] and r["lp_pass"] and r["outer_mass_pass"] for r in rows),
    }
