"""Standard and improved JWKB wavefunctions.

Normalization: ``StandardJwkb`` has Psi(x0) = k(x0)^(-1/2), ``ImprovedJwkb``
has Psi(x0) = 1.  Both carry their analytic derivative in ``dpsi`` so they
can be matched against plane waves without finite differences.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import finite_diff
from .corrections import ODE_RTOL, _eta_ode_full
from .errors import GridError, TurningPointError
from .potentials import Potential, turning_points
from .semiclassics import (ACTION_RTOL, ComplexField, PhysicalParams, _dp, _p,
                           action_field, as_grid)


class WaveMethod(str, enum.Enum):
    EXACT = "ExactOracle"
    JWKB = "StandardJwkb"
    IMPROVED = "ImprovedJwkb"


class Direction(str, enum.Enum):
    RIGHT = "RightMoving"
    LEFT = "LeftMoving"

    @property
    def sign(self):
        return 1 if self is Direction.RIGHT else -1


@dataclass(frozen=True)
class WavefunctionSample:
    psi: ComplexField
    method: WaveMethod
    direction: Direction
    params: PhysicalParams
    k: ComplexField
    dpsi: ComplexField | None = None
    eta: ComplexField | None = None

    def __post_init__(self):
        if not np.all(np.isfinite(self.psi.values)):
            raise GridError("wavefunction is not finite on the grid")

    @property
    def grid(self):
        return self.psi.grid


def _reject_turning_points(params, spec, grid):
    lo, hi = min(grid[0], params.x0), max(grid[-1], params.x0)
    if np.any(_p(params, spec, grid) == 0):
        xt = float(grid[np.nonzero(_p(params, spec, grid) == 0)[0][0]])
        raise TurningPointError(f"turning point at x={xt:.12g} on the grid", xt)
    if lo < hi:
        pts = turning_points(spec, params, (lo, hi))
        if pts:
            raise TurningPointError(
                f"turning point at x={pts[0]:.12g} inside the grid span", pts[0])


def psi_jwkb(params: PhysicalParams, spec: Potential, grid,
             direction=Direction.RIGHT, tol_quad=ACTION_RTOL, tol_ode=None) -> WavefunctionSample:
    """Psi = k^(-1/2) exp(+-i S/hbar); the minus sign gives the left mover."""
    grid = as_grid(grid)
    direction = Direction(direction)
    _reject_turning_points(params, spec, grid)
    hbar = params.hbar
    k = _p(params, spec, grid) / hbar
    dk = _dp(params, spec, grid) / hbar
    s = action_field(params, spec, grid, tol_quad).values
    sgn = direction.sign
    psi = k ** -0.5 * np.exp(sgn * 1j * s / hbar)
    dpsi = (sgn * 1j * k - 0.5 * dk / k) * psi
    return WavefunctionSample(ComplexField(grid, psi, "psi_jwkb"), WaveMethod.JWKB,
                              direction, params, ComplexField(grid, k, "k"),
                              ComplexField(grid, dpsi, "dpsi_jwkb"))


def psi_improved(params: PhysicalParams, spec: Potential, grid,
                 direction=Direction.RIGHT, tol_quad=ACTION_RTOL,
                 tol_ode=ODE_RTOL) -> WavefunctionSample:
    """Psi = exp((i/hbar) int_{x0}^x f) with f = +-p + eta.

    The left mover reruns the correction with p -> -p instead of conjugating.
    The integral of f is S (panel quadrature) plus the integral of eta
    carried along by the eta ODE.  ``tol_ode`` is the relative tolerance
    of that ODE, ``tol_quad`` of the action quadrature.
    """
    grid = as_grid(grid)
    direction = Direction(direction)
    _reject_turning_points(params, spec, grid)
    sgn = direction.sign
    hbar = params.hbar
    eta, eta_int = _eta_ode_full(params, spec, grid, 0j, sign=sgn, rtol=tol_ode)
    s = action_field(params, spec, grid, tol_quad, sign=sgn).values
    p = _p(params, spec, grid, sgn)
    psi = np.exp(1j / hbar * (s + eta_int))
    dpsi = 1j / hbar * (p + eta) * psi
    k = _p(params, spec, grid) / hbar
    return WavefunctionSample(ComplexField(grid, psi, "psi_improved"), WaveMethod.IMPROVED,
                              direction, params, ComplexField(grid, k, "k"),
                              ComplexField(grid, dpsi, "dpsi_improved"),
                              ComplexField(grid, eta, "eta"))


def modified_equation_residual(sample: WavefunctionSample, w: ComplexField) -> float:
    """max |Psi'' + (k^2 + W) Psi| / max |k^2 Psi| over interior points.

    The residual is taken in compact three-point form,
    (Psi[n+1] - 2 Psi[n] + Psi[n-1]) / h^2 + (g[n+1] + 10 g[n] + g[n-1]) / 12
    with g = (k^2 + W) Psi, which is 4th-order accurate with a truncation
    constant (kh)^4/240 against (kh)^4/90 for the explicit five-point
    Psi''.  The grid must be uniform with at least 9 points per shortest
    local wavelength.
    """
    grid = sample.grid
    if not np.array_equal(grid, w.grid):
        raise GridError("W and Psi live on different grids")
    h = finite_diff.uniform_step(grid)
    kmax = float(np.max(np.abs(sample.k.values)))
    if kmax > 0 and h > 2.0 * math.pi / kmax / 9.0:
        raise GridError("grid too coarse: fewer than 9 points per local wavelength")
    psi = sample.psi.values
    k2 = sample.k.values ** 2
    g = (k2 + w.values) * psi
    res = (psi[2:] - 2.0 * psi[1:-1] + psi[:-2]) / h**2 + (g[2:] + 10.0 * g[1:-1] + g[:-2]) / 12.0
    scale = np.max(np.abs(k2 * psi))
    return float(np.max(np.abs(res)) / scale)


def rescale_incoming(sample: WavefunctionSample) -> ComplexField:
    """Psi divided by its value at the first grid point."""
    psi = sample.psi.values
    return ComplexField(sample.grid, psi / psi[0], sample.psi.label)
