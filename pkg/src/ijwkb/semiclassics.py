"""Classical momentum, wave vector and action.

Branch rule for the momentum: ``p = sqrt(2m(E - U))`` is real and
nonnegative where E >= U and ``+i sqrt(2m(U - E))`` where E < U, so
``Im p >= 0`` everywhere.  The action ``S(x) = int_{x0}^x p`` is continued
through turning points with the same rule (its imaginary part starts to
grow on the forbidden side).  Connection-formula phases are not applied.

Most internal helpers take a ``sign`` argument: ``sign=-1`` builds the
second, counter-propagating solution family from ``-p``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import quadrature
from .errors import GridError, TurningPointError
from .potentials import Potential, turning_points

ACTION_RTOL = 1e-10


@dataclass(frozen=True)
class PhysicalParams:
    hbar: float = 1.0
    mass: float = 1.0
    energy: float = 1.0
    x0: float = 0.0

    def __post_init__(self):
        if not self.hbar > 0:
            raise ValueError("hbar must be positive")
        if not self.mass > 0:
            raise ValueError("mass must be positive")

    def with_x0(self, x0) -> "PhysicalParams":
        return PhysicalParams(self.hbar, self.mass, self.energy, float(x0))

    def with_energy(self, energy) -> "PhysicalParams":
        return PhysicalParams(self.hbar, self.mass, float(energy), self.x0)


@dataclass(frozen=True)
class ComplexField:
    """Samples of a complex function on a strictly increasing grid."""

    grid: np.ndarray
    values: np.ndarray
    label: str = field(default="")

    def __post_init__(self):
        grid = np.array(self.grid, dtype=float, ndmin=1)
        values = np.array(self.values, dtype=complex, ndmin=1)
        if grid.ndim != 1 or values.shape != grid.shape:
            raise GridError(f"{self.label or 'field'}: grid and values lengths differ")
        if np.any(np.diff(grid) <= 0):
            raise GridError(f"{self.label or 'field'}: grid must be strictly increasing")
        grid.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    def __len__(self):
        return self.grid.size

    @property
    def real(self):
        return self.values.real

    @property
    def imag(self):
        return self.values.imag

    def relabel(self, label):
        return ComplexField(self.grid, self.values, label)


def as_grid(grid) -> np.ndarray:
    grid = np.array(grid, dtype=float, ndmin=1)
    if grid.ndim != 1 or grid.size == 0:
        raise GridError("grid must be a non-empty 1-d sequence")
    if np.any(np.diff(grid) <= 0):
        raise GridError("grid must be strictly increasing")
    return grid


def _out(x, values):
    if np.ndim(x) == 0:
        return complex(values)
    return values


def _p(params, spec, x, sign=1):
    diff = 2.0 * params.mass * (params.energy - spec.value(np.asarray(x, dtype=float)))
    diff = np.asarray(diff, dtype=float)
    root = np.sqrt(np.abs(diff))
    return sign * np.where(diff >= 0, root + 0j, 1j * root)


def _dp(params, spec, x, sign=1):
    x = np.asarray(x, dtype=float)
    p = _p(params, spec, x)
    if np.any(p == 0):
        bad = np.atleast_1d(x)[np.atleast_1d(p) == 0][0]
        raise TurningPointError(f"p'(x) is singular at the turning point x={bad}", bad)
    return sign * (-params.mass * np.asarray(spec.derivative(x)) / p)


def _d2p(params, spec, x, sign=1):
    x = np.asarray(x, dtype=float)
    p = _p(params, spec, x)
    if np.any(p == 0):
        bad = np.atleast_1d(x)[np.atleast_1d(p) == 0][0]
        raise TurningPointError(f"p''(x) is singular at the turning point x={bad}", bad)
    m = params.mass
    du = np.asarray(spec.derivative(x))
    d2u = np.asarray(spec.second_derivative(x))
    return sign * (-m * d2u / p - m * m * du * du / p**3)


def momentum(params: PhysicalParams, spec: Potential, x):
    """Classical momentum sqrt(2m(E - U(x))) on the fixed branch (Im p >= 0)."""
    return _out(x, _p(params, spec, x))


def momentum_derivative(params: PhysicalParams, spec: Potential, x):
    """p'(x) = -m U'(x) / p(x).

    Raises:
        TurningPointError: if p(x) = 0.
        DiscontinuityError: at a jump of the potential.
    """
    return _out(x, _dp(params, spec, x))


def momentum_second_derivative(params: PhysicalParams, spec: Potential, x):
    return _out(x, _d2p(params, spec, x))


def wave_vector(params: PhysicalParams, spec: Potential, x):
    return _out(x, _p(params, spec, x) / params.hbar)


def breakpoints(params, spec, lo, hi):
    """Turning points and discontinuities strictly inside (lo, hi).

    Returns ``(points, is_turning)`` sorted ascending.
    """
    if not lo < hi:
        return np.empty(0), np.empty(0, dtype=bool)
    pts = {}
    for xd in spec.discontinuities:
        if lo < xd < hi:
            pts[float(xd)] = False
    for segment_lo, segment_hi in _smooth_intervals(spec, lo, hi):
        for xt in turning_points(spec, params, (segment_lo, segment_hi)):
            if lo < xt < hi:
                pts.setdefault(float(xt), True)
    xs = np.array(sorted(pts))
    return xs, np.array([pts[x] for x in xs], dtype=bool)


def _smooth_intervals(spec, lo, hi):
    cuts = [lo] + [xd for xd in spec.discontinuities if lo < xd < hi] + [hi]
    return list(zip(cuts[:-1], cuts[1:]))


def panel_nodes(params, spec, points):
    """Merge ``points`` with the breakpoints they span.

    Returns ``(nodes, turning)`` where ``turning`` flags nodes that are
    turning points (including given points that happen to be roots).
    """
    points = np.asarray(points, dtype=float)
    lo, hi = float(points.min()), float(points.max())
    bp, is_turning = breakpoints(params, spec, lo, hi)
    nodes = np.unique(np.concatenate([points, bp]))
    turning = np.isin(nodes, bp[is_turning])
    turning |= _p(params, spec, nodes) == 0
    return nodes, turning


def integrate_panels(func, nodes, turning, rtol=ACTION_RTOL):
    """Oriented integrals of ``func(y, idx)`` over consecutive node panels.

    Panels touching a turning point use tanh-sinh, the rest adaptive
    Gauss-Kronrod.  Returns an array of length ``len(nodes) - 1``.
    """
    nodes = np.asarray(nodes, dtype=float)
    lo, hi = nodes[:-1], nodes[1:]
    singular = turning[:-1] | turning[1:]
    out = np.zeros(lo.size, dtype=complex)
    smooth = ~singular
    if smooth.any():
        index = np.nonzero(smooth)[0]
        out[smooth] = quadrature.adaptive_gk(
            lambda y, idx: func(y, index[idx]), lo[smooth], hi[smooth], rtol=rtol)
    for j in np.nonzero(singular)[0]:
        out[j] = quadrature.tanh_sinh(lambda y, idx: func(y, idx + j), lo[j], hi[j], rtol=rtol)
    return out


def action(params: PhysicalParams, spec: Potential, x, rtol=ACTION_RTOL):
    """S(x) = int_{x0}^x p(y) dy, split at turning points and discontinuities."""
    x = float(x)
    if x == params.x0:
        return 0j
    nodes, turning = panel_nodes(params, spec, [params.x0, x])
    panels = integrate_panels(lambda y, idx: _p(params, spec, y), nodes, turning, rtol)
    total = complex(np.sum(panels))
    return total if x > params.x0 else -total


def cumulative_from_x0(panels, nodes, x0):
    """Running sum of panel integrals anchored to zero at node ``x0``."""
    running = np.concatenate([[0j], np.cumsum(panels)])
    i0 = int(np.searchsorted(nodes, x0))
    return running - running[i0]


def action_field(params: PhysicalParams, spec: Potential, grid, rtol=ACTION_RTOL,
                 sign=1) -> ComplexField:
    """Cumulative action on ``grid`` (panel sums between grid points)."""
    grid = as_grid(grid)
    nodes, turning = panel_nodes(params, spec, np.append(grid, params.x0))
    panels = integrate_panels(lambda y, idx: _p(params, spec, y, sign), nodes, turning, rtol)
    running = cumulative_from_x0(panels, nodes, params.x0)
    return ComplexField(grid, running[np.searchsorted(nodes, grid)], "S")


def momentum_field(params, spec, grid, sign=1) -> ComplexField:
    grid = as_grid(grid)
    return ComplexField(grid, _p(params, spec, grid, sign), "p")
