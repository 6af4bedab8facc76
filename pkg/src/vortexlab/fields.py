"""Periodic square grid, spectral operators, and velocity reconstruction.

Conventions used throughout the package:

  - the domain is the periodic box [0, L)^2 sampled at cell centers
    (i + 1/2) h, h = L / n, with ``values[j, i]`` the sample at
    (x1, x2) = ((i + 1/2) h, (j + 1/2) h);
  - spectral data is the half-complex ``numpy.fft.rfft2`` layout of shape
    (n, n // 2 + 1); wavenumbers are 2 pi k / L for integer k;
  - the Nyquist mode is treated as cosine-only: its entry in the
    first-derivative multipliers is zero, which keeps derivatives of real
    fields real and divergence identities exact;
  - the k = 0 mode is removed before inverting the Laplacian, i.e. the
    velocity solves curl(u) = omega - mean(omega) on the torus.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

SNAPSHOT_MAGIC = b"VRTX"
SNAPSHOT_VERSION = 1
_HEADER = struct.Struct("<4sIIIddd")  # magic, version, n, reserved, L, t, nu


@dataclass(frozen=True)
class Grid:
    """Periodic square computational domain.

    Parameters
    ----------
    L : float
        Domain side length.
    n : int
        Samples per side; must be even and at least 8.
    """

    L: float
    n: int

    def __post_init__(self):
        if self.L <= 0:
            raise ValueError(f"domain size must be positive, got L={self.L}")
        if self.n < 8:
            raise ValueError(f"n must be at least 8, got n={self.n}")
        if self.n % 2 != 0:
            raise ValueError(f"n must be even, got n={self.n}")

    @property
    def h(self) -> float:
        return self.L / self.n

    @cached_property
    def x(self) -> np.ndarray:
        """Cell-center coordinates along one axis."""
        return (np.arange(self.n) + 0.5) * self.h

    @cached_property
    def k1(self) -> np.ndarray:
        """Wavenumbers 2 pi k / L along axis 1 (half spectrum, k = 0..n/2)."""
        return 2.0 * np.pi * np.fft.rfftfreq(self.n, d=self.h)

    @cached_property
    def k2(self) -> np.ndarray:
        """Wavenumbers 2 pi k / L along axis 0 (full spectrum)."""
        return 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.h)

    @cached_property
    def ksq(self) -> np.ndarray:
        return self.k1[None, :] ** 2 + self.k2[:, None] ** 2

    @cached_property
    def inv_ksq(self) -> np.ndarray:
        """1 / |k|^2 with the k = 0 entry set to zero (mean mode removed)."""
        out = np.zeros_like(self.ksq)
        np.divide(1.0, self.ksq, out=out, where=self.ksq > 0)
        return out

    @cached_property
    def k1_deriv(self) -> np.ndarray:
        """First-derivative multipliers along axis 1; Nyquist zeroed."""
        k = self.k1.copy()
        k[-1] = 0.0
        return k[None, :]

    @cached_property
    def k2_deriv(self) -> np.ndarray:
        """First-derivative multipliers along axis 0; Nyquist zeroed."""
        k = self.k2.copy()
        k[self.n // 2] = 0.0
        return k[:, None]

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """2/3-rule mask: modes with |k1| or |k2| index beyond n/3 are dropped."""
        m1 = np.abs(np.fft.rfftfreq(self.n) * self.n)
        m2 = np.abs(np.fft.fftfreq(self.n) * self.n)
        lim = self.n / 3.0
        return (m1[None, :] <= lim) & (m2[:, None] <= lim)

    def to_spectral(self, values: np.ndarray) -> np.ndarray:
        return np.fft.rfft2(values)

    def from_spectral(self, hat: np.ndarray) -> np.ndarray:
        return np.fft.irfft2(hat, s=(self.n, self.n))

    def wrap(self, delta):
        """Minimal-image representative of a displacement on the torus."""
        return delta - self.L * np.floor(delta / self.L + 0.5)


@dataclass
class ScalarField:
    """Real scalar samples (e.g. vorticity) on a Grid."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != (self.grid.n, self.grid.n):
            raise ValueError(
                f"values shape {self.values.shape} does not match grid n={self.grid.n}"
            )

    def copy(self) -> "ScalarField":
        return ScalarField(self.grid, self.values.copy())


@dataclass
class VectorField:
    """Real 2D velocity samples (u1, u2) on a Grid."""

    grid: Grid
    u1: np.ndarray
    u2: np.ndarray

    def __post_init__(self):
        self.u1 = np.asarray(self.u1, dtype=np.float64)
        self.u2 = np.asarray(self.u2, dtype=np.float64)
        shape = (self.grid.n, self.grid.n)
        if self.u1.shape != shape or self.u2.shape != shape:
            raise ValueError("velocity component shape does not match grid")

    def max_speed(self) -> float:
        return max(np.max(np.abs(self.u1)), np.max(np.abs(self.u2)))


def make_grid(L: float, n: int) -> Grid:
    """Build a periodic grid of side L with n (even, >= 8) samples per side."""
    return Grid(float(L), int(n))


def integral(field: ScalarField) -> float:
    """Midpoint-rule integral h^2 * sum(values); exact for the discretization."""
    h = field.grid.h
    return float(h * h * field.values.sum())


def _require_finite(name: str, *arrays: np.ndarray):
    for arr in arrays:
        if not np.all(np.isfinite(arr)):
            raise ValueError(f"{name}: input contains non-finite values")


def biot_savart(omega: ScalarField) -> VectorField:
    """Divergence-free velocity with curl(u) = omega - mean(omega).

    The stream function is obtained by spectral inversion of the Laplacian
    with the zero mode removed, and u = (-d2 psi, d1 psi). The result is
    deterministic for fixed input and satisfies the discrete divergence-free
    identity to round-off.
    """
    _require_finite("biot_savart", omega.values)
    g = omega.grid
    wh = g.to_spectral(omega.values)
    psi_h = -wh * g.inv_ksq
    u1 = g.from_spectral(-1j * g.k2_deriv * psi_h)
    u2 = g.from_spectral(1j * g.k1_deriv * psi_h)
    return VectorField(g, u1, u2)


def curl(u: VectorField) -> ScalarField:
    """Spectral rotation d1 u2 - d2 u1."""
    _require_finite("curl", u.u1, u.u2)
    g = u.grid
    u1h = g.to_spectral(u.u1)
    u2h = g.to_spectral(u.u2)
    return ScalarField(g, g.from_spectral(1j * g.k1_deriv * u2h - 1j * g.k2_deriv * u1h))


def divergence(u: VectorField) -> ScalarField:
    """Spectral divergence d1 u1 + d2 u2."""
    _require_finite("divergence", u.u1, u.u2)
    g = u.grid
    u1h = g.to_spectral(u.u1)
    u2h = g.to_spectral(u.u2)
    return ScalarField(g, g.from_spectral(1j * g.k1_deriv * u1h + 1j * g.k2_deriv * u2h))


def dealias_23(field_hat: np.ndarray, grid: Grid) -> np.ndarray:
    """Zero all modes with |k1| or |k2| index beyond n/3; returns a new array."""
    return field_hat * grid.dealias_mask


def write_snapshot(path, field: ScalarField, t: float, nu: float) -> None:
    """Write one component snapshot in the VRTX binary format.

    Layout: 40-byte header (magic "VRTX", u32 version=1, u32 n, u32 reserved,
    f64 L, f64 t, f64 nu), then n*n little-endian f64 values in row-major
    order (x2-major, x1-minor).
    """
    g = field.grid
    header = _HEADER.pack(SNAPSHOT_MAGIC, SNAPSHOT_VERSION, g.n, 0, g.L, t, nu)
    data = np.ascontiguousarray(field.values, dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(data.tobytes(order="C"))


def read_snapshot(path) -> tuple[ScalarField, float, float]:
    """Read a VRTX snapshot; returns (field, t, nu)."""
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise ValueError(f"{path}: truncated snapshot header")
    magic, version, n, _reserved, L, t, nu = _HEADER.unpack_from(raw)
    if magic != SNAPSHOT_MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}")
    if version != SNAPSHOT_VERSION:
        raise ValueError(f"{path}: unsupported snapshot version {version}")
    expected = _HEADER.size + 8 * n * n
    if len(raw) != expected:
        raise ValueError(f"{path}: expected {expected} bytes, got {len(raw)}")
    values = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size).reshape(n, n)
    return ScalarField(make_grid(L, n), values.copy()), t, nu
