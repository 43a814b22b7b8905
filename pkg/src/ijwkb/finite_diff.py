"""Fourth-order finite differences on uniform grids.

Interior points use centered 5-point stencils; the two points at each end
use one-sided stencils of the same order.
"""

import numpy as np

from .errors import GridError

_D1_START = (np.array([-25, 48, -36, 16, -3]), np.array([-3, -10, 18, -6, 1]))
_D2_START = (np.array([45, -154, 214, -156, 61, -10]), np.array([10, -15, -4, 14, -6, 1]))


def uniform_step(grid, min_points=5, rtol=1e-8):
    grid = np.asarray(grid, dtype=float)
    if grid.size < min_points:
        raise GridError(f"grid too coarse: need at least {min_points} points, got {grid.size}")
    steps = np.diff(grid)
    h = (grid[-1] - grid[0]) / (grid.size - 1)
    if np.max(np.abs(steps - h)) > rtol * abs(h):
        raise GridError("finite differences need a uniform grid")
    return h


def d1(values, h):
    """First derivative, O(h^4) everywhere."""
    f = np.asarray(values)
    out = np.empty_like(f, dtype=np.result_type(f, float))
    out[2:-2] = (f[:-4] - 8 * f[1:-3] + 8 * f[3:-1] - f[4:]) / (12 * h)
    for i, w in enumerate(_D1_START):
        out[i] = w @ f[0:5] / (12 * h)
        out[-1 - i] = -(w @ f[::-1][0:5]) / (12 * h)
    return out


def d2(values, h):
    """Second derivative, O(h^4) everywhere."""
    f = np.asarray(values)
    out = np.empty_like(f, dtype=np.result_type(f, float))
    out[2:-2] = (-f[:-4] + 16 * f[1:-3] - 30 * f[2:-2] + 16 * f[3:-1] - f[4:]) / (12 * h * h)
    for i, w in enumerate(_D2_START):
        out[i] = w @ f[0:6] / (12 * h * h)
        out[-1 - i] = w @ f[::-1][0:6] / (12 * h * h)
    return out
