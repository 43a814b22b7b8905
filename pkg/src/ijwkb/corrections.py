"""Linearized Riccati correction eta(x) and the resummed f(x) = p + eta.

Three independent realizations are provided:

``eta_ode``
    direct integration of  -i hbar eta' - i hbar p' + 2 p eta = 0,
    i.e.  eta' = -p' - (2i/hbar) p eta,  with an embedded RK 4(5) pair.
``eta_integral``
    eta(x) = -int_{x0}^x [p'(y) + C1] exp(2i[S(y) - S(x)]/hbar) dy.
``f_closed``
    f(x) = (2i/hbar) exp(-2i S(x)/hbar) (C2 + int_{x0}^x p^2 exp(2i S/hbar) dy).

Plane-wave behaviour in regions with p' = 0 fixes C1 = 0 and
C2 = hbar p(x0) / (2i) (see ``fix_constants``).

Discontinuous potentials are handled piecewise: the segment holding x0
starts from the prescribed value at x0, every other segment starts with
eta = 0 at its end nearest to x0.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.integrate import solve_ivp

from . import finite_diff, quadrature
from .errors import GridError, SingularRegionError, TurningPointError
from .potentials import Potential, turning_points
from .semiclassics import (ComplexField, PhysicalParams, _dp, _p, as_grid,
                           momentum_field)

ODE_RTOL = 1e-10
ODE_ATOL = 1e-12
INTEGRAL_RTOL = 1e-8
MAX_PANEL_PHASE = math.pi / 4


class CorrectionMethod(str, enum.Enum):
    INTEGRAL = "IntegralForm"
    CLOSED = "ClosedForm"
    ODE = "OdeForm"


@dataclass(frozen=True)
class CorrectionSolution:
    eta: ComplexField
    f: ComplexField
    c1: complex
    c2: complex
    method: CorrectionMethod

    def __post_init__(self):
        if not np.array_equal(self.eta.grid, self.f.grid):
            raise GridError("eta and f must share one grid")

    @property
    def grid(self):
        return self.eta.grid


class Segment(NamedTuple):
    lo: float
    hi: float
    piece: Potential
    start: float        # where the segment's initial value is imposed
    holds_x0: bool
    points: np.ndarray  # grid indices belonging to the segment


def segments(spec: Potential, grid, x0):
    """Split ``grid`` (plus x0) into the smooth pieces of ``spec``.

    Pieces are half-open ``[lo, hi)`` (the last one closed), so a grid point
    sitting on a jump belongs to the piece on its right.  Segments are
    returned ordered outward from the one holding x0, so running quantities
    (e.g. the integral of eta) can be carried across the jumps.
    """
    grid = np.asarray(grid, dtype=float)
    lo = min(grid[0], x0)
    hi = max(grid[-1], x0)
    pieces = spec.pieces()
    out = []
    for n, (piece_lo, piece_hi, piece) in enumerate(pieces):
        last = n == len(pieces) - 1

        def member(x):
            return (x >= piece_lo) & ((x <= piece_hi) if last else (x < piece_hi))

        holds = bool(member(x0))
        points = np.nonzero(member(grid))[0]
        if not holds and points.size == 0:
            continue
        seg_lo, seg_hi = max(lo, piece_lo), min(hi, piece_hi)
        if holds:
            start = x0
        elif seg_lo >= x0:
            start = seg_lo
        else:
            start = seg_hi
        out.append(Segment(seg_lo, seg_hi, piece, start, holds, points))
    home = next(i for i, s in enumerate(out) if s.holds_x0)
    return [out[home]] + out[home + 1:] + out[:home][::-1], home


def _check_no_turning(params, piece, a, b):
    lo, hi = min(a, b), max(a, b)
    if lo == hi:
        return
    for xt in turning_points(piece, params, (lo, hi)):
        if lo < xt < hi or xt == a:
            raise TurningPointError(
                f"turning point at x={xt:.12g} inside the integration span", xt)
    if np.any(_p(params, piece, np.array([lo, hi])) == 0):
        xt = lo if _p(params, piece, lo) == 0 else hi
        raise TurningPointError(f"turning point at x={xt:.12g} on the grid", xt)


# --------------------------------------------------------------------------
# direct ODE
# --------------------------------------------------------------------------

def _ode_leg(params, piece, start, targets, eta0, phi0, sign, rtol, atol):
    """Integrate (eta, int eta) from ``start`` to sorted ``targets`` (one side)."""
    if targets.size == 0:
        return np.empty(0, complex), np.empty(0, complex)
    hbar, mass, energy = params.hbar, params.mass, params.energy
    # scalar fast path: the public evaluate/derivative checks cost more than the math
    u, du = piece._u, piece._du

    def rhs(x, y):
        d = 2.0 * mass * (energy - float(u(x)))
        p = sign * (math.sqrt(d) if d >= 0 else 1j * math.sqrt(-d))
        if p == 0:
            raise TurningPointError(f"eta ODE reached a turning point at x={x:.12g}", x)
        dp = -sign * sign * mass * float(du(x)) / p
        return np.array([-dp - 2j / hbar * p * y[0], y[0]])

    end = targets[-1]
    _check_no_turning(params, piece, start, end)
    if end == start:
        return np.full(targets.size, eta0), np.full(targets.size, phi0)
    sol = solve_ivp(rhs, (start, end), np.array([eta0, phi0], dtype=complex),
                    method="RK45", t_eval=targets, rtol=rtol, atol=atol)
    if sol.status != 0:
        last = float(sol.t[-1]) if sol.t.size else start
        raise SingularRegionError(f"eta ODE failed near x={last:.12g}: {sol.message}", last)
    return sol.y[0], sol.y[1]


def _eta_ode_full(params, spec, grid, eta_at_x0, sign=1, rtol=ODE_RTOL, atol=ODE_ATOL):
    """eta and its running integral (anchored at x0) on ``grid``."""
    grid = as_grid(grid)
    eta = np.zeros(grid.size, dtype=complex)
    phi = np.zeros(grid.size, dtype=complex)
    segs, _ = segments(spec, grid, params.x0)
    # running integral of eta at each segment boundary, carried outward
    carried = {}
    for seg in segs:
        if seg.holds_x0:
            eta0, phi0 = complex(eta_at_x0), 0j
        else:
            eta0, phi0 = 0j, carried.get(seg.start, 0j)
        idx = seg.points
        xs = grid[idx]
        ends = np.array([seg.lo, seg.hi])
        for side in (+1, -1):
            sel = xs > seg.start if side > 0 else xs < seg.start
            at_start = xs == seg.start
            eta[idx[at_start]] = eta0
            phi[idx[at_start]] = phi0
            bound = ends[1] if side > 0 else ends[0]
            tgt = np.sort(xs[sel])[::side]
            # extend to the segment end so the integral of eta can be carried
            extend = bound != seg.start and (tgt.size == 0 or tgt[-1] != bound)
            full = np.append(tgt, bound) if extend else tgt
            e, f = _ode_leg(params, seg.piece, seg.start, full, eta0, phi0, sign, rtol, atol)
            if full.size:
                carried[float(full[-1])] = f[-1]
            order = np.argsort(xs[sel])[::side]
            target_idx = idx[sel][order]
            eta[target_idx] = e[:tgt.size]
            phi[target_idx] = f[:tgt.size]
    return eta, phi


def eta_ode(params: PhysicalParams, spec: Potential, grid, eta_at_x0=0j,
            rtol=ODE_RTOL, atol=ODE_ATOL, sign=1) -> ComplexField:
    """Integrate the linearized correction equation with RK45.

    The initial value is imposed at ``params.x0`` (normally ``grid[0]``) and
    the solution is propagated to both sides.

    Raises:
        TurningPointError: a turning point lies inside the integration span.
        SingularRegionError: the step size underflowed; carries the last
            position reached.
    """
    grid = as_grid(grid)
    eta, _ = _eta_ode_full(params, spec, grid, eta_at_x0, sign, rtol, atol)
    return ComplexField(grid, eta, "eta")


# --------------------------------------------------------------------------
# oscillatory integral forms
# --------------------------------------------------------------------------

def _refine(params, piece, points):
    """Insert nodes so each panel advances the phase 2 S/hbar by <= pi/4.

    Intervals over which p^2 changes by more than a quarter of its smallest
    value (close to a turning point) are cut further.
    """
    out = [points[0]]
    probe = np.linspace(0.0, 1.0, 9)
    for a, b in zip(points[:-1], points[1:]):
        p2 = np.abs(_p(params, piece, a + (b - a) * probe) ** 2)
        n_phase = 2.0 * math.sqrt(p2.max()) * abs(b - a) / params.hbar / MAX_PANEL_PHASE
        n_shape = 4.0 * (p2.max() - p2.min()) / p2.min()
        n = min(max(1, math.ceil(n_phase), math.ceil(n_shape)), 100000)
        out.extend(a + (b - a) * np.arange(1, n + 1) / n)
    return np.array(out)


def _recursion_leg(params, piece, start, targets, v0, integrand, kappa, sign, rtol):
    """March v(b) = v(a) e^{-2i dS/hbar} + kappa int_a^b g e^{2i[S(y)-S(b)]/hbar}.

    ``targets`` are ordered outward from ``start``.
    """
    if targets.size == 0:
        return np.empty(0, complex)
    _check_no_turning(params, piece, start, targets[-1])
    nodes = _refine(params, piece, np.concatenate([[start], targets]))
    a, b = nodes[:-1], nodes[1:]
    hbar = params.hbar

    def p_of(y):
        return _p(params, piece, y, sign)

    d_action = quadrature.adaptive_gk(lambda y, idx: p_of(y), a, b, rtol=1e-13)

    def weighted(y, idx):
        right = b[idx]
        # S(y) - S(b) over a short smooth stretch
        ds = -quadrature.gauss_legendre(p_of, y, right)
        return integrand(y) * np.exp(2j / hbar * ds)

    local = quadrature.adaptive_gk(weighted, a, b, rtol=rtol)
    rot = np.exp(-2j / hbar * d_action)
    values = np.empty(b.size, dtype=complex)
    v = complex(v0)
    for j in range(b.size):
        v = v * rot[j] + kappa * local[j]
        values[j] = v
    # pick the original targets back out of the refined node list
    pos = np.searchsorted(b, targets) if targets[-1] > start else \
        b.size - 1 - np.searchsorted(b[::-1], targets)
    return values[pos]


def _oscillatory(params, spec, grid, start_value, integrand_for, kappa, sign, rtol):
    grid = as_grid(grid)
    out = np.zeros(grid.size, dtype=complex)
    segs, _ = segments(spec, grid, params.x0)
    for seg in segs:
        v0 = start_value(seg)
        idx = seg.points
        xs = grid[idx]
        out[idx[xs == seg.start]] = v0
        g = integrand_for(seg.piece)
        for side in (+1, -1):
            sel = xs > seg.start if side > 0 else xs < seg.start
            order = np.argsort(xs[sel])[::side]
            tgt = xs[sel][order]
            vals = _recursion_leg(params, seg.piece, seg.start, tgt, v0, g, kappa, sign, rtol)
            out[idx[sel][order]] = vals
    return out


def eta_integral(params: PhysicalParams, spec: Potential, grid, c1=0j,
                 rtol=INTEGRAL_RTOL, sign=1) -> ComplexField:
    """eta(x) = -int_{x0}^x [p'(y) + c1] exp(2i[S(y) - S(x)]/hbar) dy.

    Evaluated by phase-limited Gauss-Kronrod panels (at most pi/4 of phase
    per panel) marched outward from x0.
    """
    c1 = complex(c1)

    def integrand_for(piece):
        return lambda y: _dp(params, piece, y, sign) + c1

    values = _oscillatory(params, spec, grid, lambda seg: 0j, integrand_for, -1.0, sign, rtol)
    return ComplexField(as_grid(grid), values, "eta")


def f_closed(params: PhysicalParams, spec: Potential, grid, c2,
             rtol=INTEGRAL_RTOL, sign=1) -> ComplexField:
    """f(x) = (2i/hbar) e^{-2iS(x)/hbar} (c2 + int_{x0}^x p^2 e^{2iS(y)/hbar} dy).

    Segments of a discontinuous potential that do not hold x0 start from
    f = p at their near end (eta = 0 there).
    """
    hbar = params.hbar

    def start_value(seg):
        if seg.holds_x0:
            return 2j / hbar * complex(c2)
        return complex(_p(params, seg.piece, seg.start, sign))

    def integrand_for(piece):
        return lambda y: _p(params, piece, y, sign) ** 2

    values = _oscillatory(params, spec, grid, start_value, integrand_for, 2j / hbar, sign, rtol)
    return ComplexField(as_grid(grid), values, "f")


# --------------------------------------------------------------------------
# constants, assembly and residuals
# --------------------------------------------------------------------------

def fix_constants(params: PhysicalParams, spec: Potential, sign=1) -> tuple[complex, complex]:
    """(C1, C2) = (0, hbar p(x0) / 2i), the choice reproducing plane waves."""
    p0 = complex(_p(params, spec, params.x0, sign))
    return 0j, params.hbar * p0 / 2j


def improved_solution(params: PhysicalParams, spec: Potential, grid,
                      method=CorrectionMethod.ODE, sign=1) -> CorrectionSolution:
    """eta and f = p + eta with constants fixed by ``fix_constants``."""
    grid = as_grid(grid)
    method = CorrectionMethod(method)
    c1, c2 = fix_constants(params, spec, sign)
    p = momentum_field(params, spec, grid, sign).values
    if method is CorrectionMethod.ODE:
        eta = eta_ode(params, spec, grid, 0j, sign=sign)
        f = ComplexField(grid, p + eta.values, "f")
    elif method is CorrectionMethod.INTEGRAL:
        eta = eta_integral(params, spec, grid, c1, sign=sign)
        f = ComplexField(grid, p + eta.values, "f")
    else:
        f = f_closed(params, spec, grid, c2, sign=sign)
        eta = ComplexField(grid, f.values - p, "eta")
    return CorrectionSolution(eta, f, c1, c2, method)


def equivalence_residual(sol_a: CorrectionSolution, sol_b: CorrectionSolution) -> float:
    """max |f_a - f_b| / (1 + |f_a|) over the shared grid."""
    if not np.array_equal(sol_a.grid, sol_b.grid):
        raise GridError("solutions live on different grids")
    fa, fb = sol_a.f.values, sol_b.f.values
    return float(np.max(np.abs(fa - fb) / (1.0 + np.abs(fa))))


class RiccatiCheck(NamedTuple):
    residual: ComplexField
    eta_squared: ComplexField


def riccati_residual(params: PhysicalParams, spec: Potential, f: ComplexField,
                     sign=1) -> RiccatiCheck:
    """r = -i hbar f' + f^2 - p^2 with a 4th-order f'.

    For the linearized solution f' = -(2i/hbar) p eta holds exactly, so r
    should reproduce eta^2 = (f - p)^2, returned alongside.
    """
    h = finite_diff.uniform_step(f.grid)
    p = _p(params, spec, f.grid, sign)
    df = finite_diff.d1(f.values, h)
    r = -1j * params.hbar * df + f.values**2 - p**2
    return RiccatiCheck(ComplexField(f.grid, r, "riccati_residual"),
                        ComplexField(f.grid, (f.values - p) ** 2, "eta_squared"))


def linearized_residual(params: PhysicalParams, spec: Potential, eta: ComplexField,
                        sign=1) -> ComplexField:
    """-i hbar eta' - i hbar p' + 2 p eta with a 4th-order eta'."""
    h = finite_diff.uniform_step(eta.grid)
    p = _p(params, spec, eta.grid, sign)
    dp = _dp(params, spec, eta.grid, sign)
    deta = finite_diff.d1(eta.values, h)
    hbar = params.hbar
    return ComplexField(eta.grid, -1j * hbar * deta - 1j * hbar * dp + 2 * p * eta.values,
                        "linearized_residual")
