import numpy as np
import pytest

from ijwkb.semiclassics import PhysicalParams


@pytest.fixture
def unit():
    """hbar = m = 1, E = 2, x0 = 0."""
    return PhysicalParams(hbar=1.0, mass=1.0, energy=2.0, x0=0.0)


def central_difference(f, x, h=1e-6):
    return (f(x + h) - f(x - h)) / (2 * h)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
