"""Above-barrier transmission from standard and improved JWKB solutions.

Each smooth piece of the potential inside the scattering domain carries the
superposition c+ Psi_right + c- Psi_left of the chosen method.  Psi and
Psi' are continuous at every joint, including the two outer joints where
the solution meets plane waves:

    e^{ik1(x-a)} + r e^{-ik1(x-a)}   on the incident side,
    t e^{ik2(x-b)}                   on the transmitted side.

The per-piece bases are normalized at their anchor point (see ``anchor``):
unit amplitude for the improved method, k^-1/2 for standard JWKB.  The
flux ratio does not depend on the normalization, but the improved basis
itself depends on where eta starts from zero.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import PhysicsDomainError
from .oracle import (ScatteringMethod, ScatteringResult, _flux_result, _k, check_asymptotes,
                     exact_piecewise, transmission_numerov)
from .potentials import Potential
from .semiclassics import PhysicalParams
from .wavefunctions import Direction, psi_improved, psi_jwkb

_BUILDERS = {ScatteringMethod.JWKB: psi_jwkb, ScatteringMethod.IMPROVED: psi_improved}


def _plane_matrix(k):
    """Columns e^{+ikx}, e^{-ikx} (value, derivative) at the reference point."""
    return np.array([[1.0, 1.0], [1j * k, -1j * k]], dtype=complex)


def anchor(spec, lo, hi):
    """Point where the correction starts from zero inside [lo, hi].

    The centre of the potential's core when the segment holds it, else the
    segment midpoint.  Starting mid-barrier halves the worst-case
    accumulation of |p'| in the eta bound and keeps symmetric barriers
    exactly unitary.
    """
    core = spec.core
    if core is not None:
        centre = 0.5 * (core[0] + core[1])
        if lo <= centre <= hi:
            return centre
    return 0.5 * (lo + hi)


def _segment_matrices(params, piece, lo, hi, method, x0, tols):
    """2x2 [[Psi+, Psi-], [Psi+', Psi-']] at lo and at hi."""
    build = _BUILDERS[method]
    local = params.with_x0(x0)
    grid = np.array([lo, hi])
    right = build(local, piece, grid, Direction.RIGHT, **tols)
    left = build(local, piece, grid, Direction.LEFT, **tols)
    ml = np.array([[right.psi.values[0], left.psi.values[0]],
                   [right.dpsi.values[0], left.dpsi.values[0]]])
    mr = np.array([[right.psi.values[1], left.psi.values[1]],
                   [right.dpsi.values[1], left.dpsi.values[1]]])
    return ml, mr


def _domain_pieces(spec, a, b):
    out = []
    for lo, hi, piece in spec.pieces():
        lo, hi = max(lo, a), min(hi, b)
        if lo < hi:
            out.append((lo, hi, piece))
    return out


def transmission_semiclassical(params: PhysicalParams, spec: Potential, domain, method,
                               negative_control=False, **tols) -> ScatteringResult:
    """T and R by matching the method's solutions to plane waves.

    ``negative_control`` reproduces a known-wrong treatment: the reflected
    wave is dropped on the incident side and only Psi is matched there.
    Results carry ``negative_control=True``.  ``tols`` (``tol_quad``,
    ``tol_ode``) are passed on to the wavefunction builders.

    Raises:
        PhysicsDomainError: turning point in the domain, or U not constant
            at the domain ends.
    """
    method = ScatteringMethod(method)
    if method not in _BUILDERS:
        raise ValueError(f"not a semiclassical method: {method.value}")
    a, b = map(float, domain)
    if not a < b:
        raise ValueError("domain must satisfy a < b")
    ua, ub = check_asymptotes(params, spec, a, b)
    k_in, k_out = _k(params, ua), _k(params, ub)
    xs = np.linspace(a, b, 4001)
    if np.any(np.asarray(spec.value(xs)) >= params.energy):
        raise PhysicsDomainError("energy is not above the barrier on the domain")
    # Q maps the transmitted-side plane-wave amplitudes to incident-side ones
    pieces = _domain_pieces(spec, a, b)
    if negative_control and len(pieces) > 1 and pieces[0][2].is_piecewise_constant:
        # the flawed match happens where the incident plateau ends
        pieces = pieces[1:]
    chain = np.eye(2, dtype=complex)
    for lo, hi, piece in pieces:
        ml, mr = _segment_matrices(params, piece, lo, hi, method, anchor(spec, lo, hi),
                                   tols)
        chain = chain @ ml @ np.linalg.inv(mr)
    w = chain @ _plane_matrix(k_out)
    if negative_control:
        # |incident wave| = 1 wherever Psi alone is matched
        t = 1.0 / w[0, 0]
        return _flux_result(k_in, k_out, t, 1.0, 0.0, method, params.energy,
                            negative_control=True)
    q = np.linalg.solve(_plane_matrix(k_in), w)
    return _flux_result(k_in, k_out, 1.0, q[0, 0], q[1, 0], method, params.energy)


def default_domain(spec: Potential, params: PhysicalParams):
    """Asymptotic cutoff of the potential widened by one local wavelength per side.

    Clipped to the potential's domain (a tabulated potential ends at its knots).
    """
    core = spec.core
    asym = spec.asymptotes
    if core is None or asym is None:
        raise PhysicsDomainError(f"{spec.family}: no asymptotic region for scattering")
    ka, kb = _k(params, asym[0]), _k(params, asym[1])
    if ka.imag or kb.imag or ka == 0 or kb == 0:
        raise PhysicsDomainError("energy must exceed both asymptotic potential values")
    lo, hi = spec.domain
    return (max(lo, core[0] - 2 * math.pi / ka.real), min(hi, core[1] + 2 * math.pi / kb.real))


def transmission_exact(params: PhysicalParams, spec: Potential, domain=None,
                       negative_control=False) -> ScatteringResult:
    """Closed form for piecewise-constant potentials, Numerov otherwise."""
    if spec.is_piecewise_constant:
        if domain is not None:
            check_asymptotes(params, spec, *domain)
        return exact_piecewise(params, spec, negative_control)
    if negative_control:
        raise PhysicsDomainError("negative control is defined for piecewise-constant potentials")
    return transmission_numerov(params, spec, domain or default_domain(spec, params))


@dataclass(frozen=True)
class ComparisonRow:
    energy: float
    t_exact: float
    t_jwkb: float
    t_improved: float

    @property
    def err_jwkb(self):
        return abs(self.t_jwkb - self.t_exact)

    @property
    def err_improved(self):
        return abs(self.t_improved - self.t_exact)

    @property
    def improved_better(self):
        return self.err_improved <= self.err_jwkb


@dataclass(frozen=True)
class MethodComparison:
    energies: tuple
    rows: tuple
    negative_control: bool = False

    COLUMNS = ("energy", "t_exact", "t_jwkb", "t_improved", "err_jwkb", "err_improved")

    def table(self) -> np.ndarray:
        return np.array([[r.energy, r.t_exact, r.t_jwkb, r.t_improved, r.err_jwkb,
                          r.err_improved] for r in self.rows], dtype=float).reshape(-1, 6)

    def fraction_improved_better(self) -> float:
        return float(np.mean([r.improved_better for r in self.rows])) if self.rows else 0.0


def _row(params, spec, energy, domain, negative_control, tols):
    p = params.with_energy(energy)
    dom = domain or default_domain(spec, p)
    exact = transmission_exact(p, spec, dom)
    t_j = transmission_semiclassical(p, spec, dom, ScatteringMethod.JWKB, negative_control,
                                     **tols)
    t_i = transmission_semiclassical(p, spec, dom, ScatteringMethod.IMPROVED, negative_control,
                                     **tols)
    return ComparisonRow(energy, exact.transmission, t_j.transmission, t_i.transmission)


def compare_methods(params: PhysicalParams, spec: Potential, energies, domain=None,
                    negative_control=False, workers=1, **tols) -> MethodComparison:
    """T by the exact oracle and both semiclassical methods at every energy.

    With ``negative_control`` the semiclassical columns use the flawed
    incident-side match while the exact column stays correct.  ``workers``
    > 1 spreads the energies over processes; rows come back in input order
    and are identical to a serial run.
    """
    energies = tuple(float(e) for e in energies)
    if not energies:
        raise ValueError("empty energy grid")
    args = [(params, spec, e, domain, negative_control, tols) for e in energies]
    if workers > 1 and len(energies) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_row, *zip(*args)))
    else:
        rows = [_row(*a) for a in args]
    return MethodComparison(energies, tuple(rows), negative_control)
