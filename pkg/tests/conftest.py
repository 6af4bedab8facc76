import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def smooth_random_field(grid, rng, amplitude=1.0):
    """Band-limited random field (modes within n/4), mean removed."""
    n = grid.n
    hat = np.zeros((n, n // 2 + 1), dtype=np.complex128)
    m1 = np.abs(np.fft.rfftfreq(n) * n)
    m2 = np.abs(np.fft.fftfreq(n) * n)
    keep = (m1[None, :] <= n / 4) & (m2[:, None] <= n / 4)
    hat[keep] = rng.normal(size=keep.sum()) + 1j * rng.normal(size=keep.sum())
    hat[0, 0] = 0.0
    values = grid.from_spectral(hat)
    return amplitude * values / np.max(np.abs(values))
