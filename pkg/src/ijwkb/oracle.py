"""Exact reference solutions of the stationary Schroedinger equation.

``numerov_solve`` integrates Psi'' = (2m/hbar^2)(U - E) Psi with the
three-point Numerov recursion.  ``transmission_numerov`` uses it from the
transmitted side leftward, starting from a pure outgoing wave, and splits
the result into incident and reflected plane waves at the left end.
Piecewise-constant potentials also have closed-form transfer matrices.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import AccuracyError, GridError, PhysicsDomainError
from .potentials import Potential
from .semiclassics import ComplexField, PhysicalParams, as_grid

UNITARITY_TOL = 1e-9
CONVERGENCE_TOL = 1e-8
ASYMPTOTE_TOL = 1e-10


class ScatteringMethod(str, enum.Enum):
    EXACT_ANALYTIC = "ExactAnalytic"
    EXACT_NUMEROV = "ExactNumerov"
    JWKB = "StandardJwkb"
    IMPROVED = "ImprovedJwkb"


@dataclass(frozen=True)
class ScatteringResult:
    transmission: float
    reflection: float
    method: ScatteringMethod
    energy: float
    negative_control: bool = False

    @property
    def unitarity_defect(self) -> float:
        return abs(self.transmission + self.reflection - 1.0)


def _numerov(g, h, psi0, psi1):
    """Recursion for y'' = g y on a uniform grid of spacing h.

    Summed form: with u = (1 - h^2 g / 12) y the recursion reads
    u[n+1] - u[n] = u[n] - u[n-1] + h^2 g[n] y[n]; carrying the difference
    instead of 2u[n] - u[n-1] keeps round-off from growing like 1/(k h).
    """
    h2 = h * h
    c = [1.0 - h2 * gi / 12.0 for gi in g]
    y = [complex(psi0), complex(psi1)]
    u = c[1] * y[1]
    d = u - c[0] * y[0]
    for n in range(1, len(c) - 1):
        d += h2 * g[n] * y[n]
        u += d
        y.append(u / c[n + 1])
    return np.array(y[:len(c)])


def _g(params, spec, x):
    return 2.0 * params.mass / params.hbar**2 * (np.asarray(spec.value(x)) - params.energy)


def numerov_solve(params: PhysicalParams, spec: Potential, grid, psi0, psi1) -> ComplexField:
    """Integrate from ``grid[0]`` (values psi0, psi1 at the first two points)."""
    grid = as_grid(grid)
    if grid.size < 2:
        raise GridError("Numerov needs at least two grid points")
    h = (grid[-1] - grid[0]) / (grid.size - 1)
    if np.max(np.abs(np.diff(grid) - h)) > 1e-9 * h:
        raise GridError("Numerov needs a uniform grid")
    psi = _numerov(_g(params, spec, grid).tolist(), h, psi0, psi1)
    return ComplexField(grid, psi, "psi_numerov")


def numerov_derivative(y_prev, y, y_next, g_prev, g_next, h):
    """Psi' at the middle point, O(h^4), from Numerov-consistent samples."""
    return ((1.0 - h * h * g_next / 6.0) * y_next
            - (1.0 - h * h * g_prev / 6.0) * y_prev) / (2.0 * h)


def _k(params, u):
    d = 2.0 * params.mass * (params.energy - u)
    return cmath.sqrt(d) / params.hbar if d >= 0 else 1j * math.sqrt(-d) / params.hbar


def _flux_result(k_in, k_out, t, a_inc, a_ref, method, energy, negative_control=False):
    if k_in.imag != 0 or k_in.real <= 0 or k_out.imag != 0 or k_out.real <= 0:
        raise PhysicsDomainError("energy must exceed both asymptotic potential values")
    trans = (k_out.real / k_in.real) * abs(t) ** 2 / abs(a_inc) ** 2
    refl = abs(a_ref) ** 2 / abs(a_inc) ** 2
    return ScatteringResult(float(trans), float(refl), ScatteringMethod(method), float(energy),
                            negative_control)


def plane_wave_split(psi, dpsi, k):
    """Amplitudes (A, B) of A e^{ik(x-a)} + B e^{-ik(x-a)} from Psi(a), Psi'(a)."""
    return 0.5 * (psi + dpsi / (1j * k)), 0.5 * (psi - dpsi / (1j * k))


def piecewise_constant_transfer(params: PhysicalParams, levels, interfaces,
                                negative_control=False) -> ScatteringResult:
    """Exact T, R for plateaus ``levels`` separated at ``interfaces``.

    Value and derivative continuity at every interface, reflected wave kept
    on the incident side.  ``negative_control`` drops the reflected wave and
    matches only Psi on the incident side (a deliberately wrong treatment).
    """
    ks = [_k(params, u) for u in levels]
    if any(k == 0 for k in ks):
        raise PhysicsDomainError("energy equals a plateau value (k = 0)")
    # coefficients (A_j, B_j) of A e^{ik x} + B e^{-ik x} on each plateau
    m = np.eye(2, dtype=complex)
    for j, x in enumerate(interfaces):
        left = np.array([[cmath.exp(1j * ks[j] * x), cmath.exp(-1j * ks[j] * x)],
                         [1j * ks[j] * cmath.exp(1j * ks[j] * x),
                          -1j * ks[j] * cmath.exp(-1j * ks[j] * x)]])
        right = np.array([[cmath.exp(1j * ks[j + 1] * x), cmath.exp(-1j * ks[j + 1] * x)],
                          [1j * ks[j + 1] * cmath.exp(1j * ks[j + 1] * x),
                           -1j * ks[j + 1] * cmath.exp(-1j * ks[j + 1] * x)]])
        m = m @ np.linalg.solve(left, right)
    if negative_control:
        # incident wave only: Psi continuity alone fixes t
        if len(interfaces) != 1:
            raise PhysicsDomainError("negative control is defined for a single step")
        x = interfaces[0]
        t = cmath.exp(1j * ks[0] * x) / cmath.exp(1j * ks[1] * x)
        return _flux_result(ks[0], ks[-1], t, 1.0, 0.0, ScatteringMethod.EXACT_ANALYTIC,
                            params.energy, negative_control=True)
    a_inc, a_ref = m[0, 0], m[1, 0]
    return _flux_result(ks[0], ks[-1], 1.0, a_inc, a_ref, ScatteringMethod.EXACT_ANALYTIC,
                        params.energy)


def step_exact(params: PhysicalParams, u_left, u_right) -> ScatteringResult:
    """Step at x = 0: T = 4 k1 k2 / (k1 + k2)^2, R = ((k1 - k2)/(k1 + k2))^2."""
    if not params.energy > max(u_left, u_right):
        raise PhysicsDomainError("step_exact needs E above both plateaus (evanescent side)")
    return piecewise_constant_transfer(params, [u_left, u_right], [0.0])


def rectangular_exact(params: PhysicalParams, u0, width) -> ScatteringResult:
    """Above-barrier rectangular barrier of height u0 on [0, width]."""
    if not params.energy > u0:
        raise PhysicsDomainError("rectangular_exact needs E > u0")
    if not params.energy > 0:
        raise PhysicsDomainError("rectangular_exact needs E > 0")
    return piecewise_constant_transfer(params, [0.0, u0, 0.0], [0.0, float(width)])


def rectangular_formula(params: PhysicalParams, u0, width) -> float:
    """T = [1 + (k1^2 - k2^2)^2 sin^2(k2 w) / (4 k1^2 k2^2)]^-1."""
    k1 = _k(params, 0.0).real
    k2 = _k(params, u0).real
    return 1.0 / (1.0 + (k1 * k1 - k2 * k2) ** 2 * math.sin(k2 * width) ** 2
                  / (4.0 * k1 * k1 * k2 * k2))


def exact_piecewise(params: PhysicalParams, spec: Potential, negative_control=False):
    """Closed-form transfer for the piecewise-constant catalog families."""
    pieces = spec.pieces()
    levels = [float(piece.value(0.0)) for _, _, piece in pieces]
    interfaces = [hi for _, hi, _ in pieces[:-1]]
    return piecewise_constant_transfer(params, levels, interfaces, negative_control)


def check_asymptotes(params, spec, a, b):
    """Raise unless U equals its asymptotic values at both domain ends."""
    asym = spec.asymptotes
    if asym is None:
        raise PhysicsDomainError(f"{spec.family}: no constant asymptote; cannot scatter")
    ua, ub = float(spec.value(a)), float(spec.value(b))
    if abs(ua - asym[0]) > ASYMPTOTE_TOL or abs(ub - asym[1]) > ASYMPTOTE_TOL:
        raise PhysicsDomainError(
            f"asymptote not reached on [{a}, {b}]: U(a)={ua:.3e}, U(b)={ub:.3e}")
    if not (params.energy > ua and params.energy > ub):
        raise PhysicsDomainError("energy must exceed both asymptotic potential values")
    return ua, ub


def _scattering_pieces(spec, a, b):
    out = []
    for lo, hi, piece in spec.pieces():
        lo, hi = max(lo, a), min(hi, b)
        if lo < hi:
            out.append((lo, hi, piece))
    return out


def _march(params, piece, x_from, x_to, y0, d0, h_target):
    """Carry (Psi, Psi') from x_from to x_to across one smooth piece.

    The second node comes from a 4th-order Taylor step of the ODE, the rest
    from the Numerov recursion; Psi' at the end uses one node past x_to,
    evaluated on the piece's own formula.
    """
    span = x_to - x_from
    s = 1.0 if span > 0 else -1.0
    steps = max(4, math.ceil(abs(span) / h_target))
    h = abs(span) / steps
    xs = x_from + s * h * np.arange(steps + 2)
    xs[steps] = x_to
    coef = 2.0 * params.mass / params.hbar**2
    g = coef * (np.asarray(piece.value(np.clip(xs, *piece.domain))) - params.energy)
    # derivatives along t = s x
    g_t = s * coef * float(piece.derivative(x_from))
    g_tt = coef * float(piece.second_derivative(x_from))
    y0 = complex(y0)
    d_t = s * complex(d0)
    y2 = g[0] * y0
    y3 = g_t * y0 + g[0] * d_t
    y4 = g_tt * y0 + 2 * g_t * d_t + g[0] * y2
    y1 = y0 + h * d_t + h * h / 2 * y2 + h**3 / 6 * y3 + h**4 / 24 * y4
    ys = _numerov(g.tolist(), h, y0, y1)
    d_end = s * numerov_derivative(ys[steps - 1], ys[steps], ys[steps + 1],
                                   g[steps - 1], g[steps + 1], h)
    return ys[steps], d_end


def numerov_cauchy(params: PhysicalParams, spec: Potential, grid, psi0, dpsi0,
                   kh_max=2e-3) -> ComplexField:
    """Exact Psi on ``grid`` from Psi(grid[0]), Psi'(grid[0]).

    Each gap between output points is subdivided so that k h <= ``kh_max``;
    jumps of a piecewise potential are crossed with Psi and Psi' continuous.
    """
    grid = as_grid(grid)
    xs = np.linspace(grid[0], grid[-1], 2001)
    kmax = float(np.max(np.sqrt(np.abs(2 * params.mass * (params.energy - spec.value(xs))))))
    h_target = kh_max * params.hbar / max(kmax, 1e-12)
    stops = sorted(set(grid.tolist()) | {x for x in spec.discontinuities
                                         if grid[0] < x < grid[-1]})
    pieces = spec.pieces()
    out = {float(grid[0]): complex(psi0)}
    y, d = complex(psi0), complex(dpsi0)
    for x_from, x_to in zip(stops[:-1], stops[1:]):
        mid = 0.5 * (x_from + x_to)
        piece = next(pc for lo, hi, pc in pieces if lo <= mid <= hi)
        y, d = _march(params, piece, x_from, x_to, y, d, h_target)
        out[float(x_to)] = y
    return ComplexField(grid, np.array([out[float(x)] for x in grid]), "psi_exact")


def _numerov_transmission_once(params, spec, a, b, h_target):
    ua, ub = check_asymptotes(params, spec, a, b)
    k_in, k_out = _k(params, ua), _k(params, ub)
    psi, dpsi = 1.0 + 0j, 1j * k_out      # outgoing t e^{ik(x-b)}, t = 1
    for lo, hi, piece in reversed(_scattering_pieces(spec, a, b)):
        psi, dpsi = _march(params, piece, hi, lo, psi, dpsi, h_target)
    a_inc, a_ref = plane_wave_split(psi, dpsi, k_in)
    return _flux_result(k_in, k_out, 1.0, a_inc, a_ref, ScatteringMethod.EXACT_NUMEROV,
                        params.energy)


def transmission_numerov(params: PhysicalParams, spec: Potential, domain,
                         h0=None, tol=CONVERGENCE_TOL, max_halvings=8) -> ScatteringResult:
    """Exact T, R by Numerov with step halving until T changes by < ``tol``.

    Raises:
        PhysicsDomainError: asymptote not reached or energy below it.
        AccuracyError: no convergence within ``max_halvings``.
    """
    a, b = map(float, domain)
    if not a < b:
        raise ValueError("domain must satisfy a < b")
    check_asymptotes(params, spec, a, b)
    if h0 is None:
        xs = np.linspace(a, b, 2001)
        kmax = float(np.max(np.sqrt(np.abs(2 * params.mass * (params.energy - spec.value(xs))))))
        h0 = 0.05 * params.hbar / max(kmax, 1e-12)
    prev = _numerov_transmission_once(params, spec, a, b, h0)
    h = h0
    for _ in range(max_halvings):
        h *= 0.5
        cur = _numerov_transmission_once(params, spec, a, b, h)
        if abs(cur.transmission - prev.transmission) < tol:
            return cur
        prev = cur
    raise AccuracyError("Numerov transmission did not converge under step halving",
                        estimate=abs(cur.transmission - prev.transmission))
