import numpy as np
import pytest

from twoch._numerics import squared_gradient
from twoch.state import EulerianState, GridSpec, RadonMeasure


def make_state(u, rho, grid, k=0.0, atoms=()):
    density = squared_gradient(u, grid.spacing) + (rho - k) ** 2
    return EulerianState(grid, u, rho, RadonMeasure(grid, density, atoms), c=0.0, k=k)


def peakon_state(n=2001, lo=-20.0, hi=20.0, a=1.0, x0=0.0, k=0.0):
    g = GridSpec(lo, hi, n)
    x = g.nodes
    return make_state(a * np.exp(-np.abs(x - x0)), np.full(n, k), g, k=k)


def smooth_state(n=2001, lo=-20.0, hi=20.0, k=0.5):
    """Gaussian velocity bump with a raised density plateau."""
    g = GridSpec(lo, hi, n)
    x = g.nodes
    u = 0.8 * np.exp(-x**2) * np.sin(x)
    rho = k + 0.5 * (np.tanh(x + 2.0) - np.tanh(x - 2.0))
    return make_state(u, rho, g, k=k)


@pytest.fixture
def peakon():
    return peakon_state()


@pytest.fixture
def smooth():
    return smooth_state()
