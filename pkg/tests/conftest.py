import numpy as np
import pytest

from frakolm.grid import ScalarField, TorusGrid
from frakolm.spectral import band_limit


def gaussian_bump(grid: TorusGrid, kmax=None, width=0.65, center=None):
    """Periodic-sampled Gaussian bump, optionally hard band-limited."""
    if center is None:
        center = (0.4, -0.3, 0.2)[: grid.d]
    xs = grid.coords()
    r2 = sum((x - c) ** 2 for x, c in zip(xs, center))
    u = ScalarField(grid, np.exp(-r2 / width**2))
    if kmax is not None:
        u = band_limit(u, kmax)
    return u


@pytest.fixture
def rng():
    return np.random.default_rng(2024)
