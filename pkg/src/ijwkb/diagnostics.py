"""Checks of the analytic identities behind the JWKB and improved methods.

* JWKB error function in three algebraically equal forms,
  3k'^2/(4k^2) - k''/(2k) = -{S, x}/2 = T''/T with T = k^(-1/2);
* the improved error function eta^2 / hbar^2;
* probability current J and the divergence formula
  dJ/dx = i (eta^2 - conj(eta)^2) |Psi|^2 / (2 m hbar);
* the bound |eta(x)| <= int_{x0}^x |p'|;
* the approach to a turning point, where W_JWKB blows up while eta stays
  finite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.optimize import brentq

from . import finite_diff
from .corrections import _eta_ode_full
from .errors import (JwkbError, MethodMismatchError, PhysicsDomainError,
                     TurningPointError)
from .potentials import Potential
from .semiclassics import (ComplexField, PhysicalParams, _d2p, _dp, _p, as_grid,
                           integrate_panels, panel_nodes, cumulative_from_x0)
from .wavefunctions import WaveMethod, WavefunctionSample, psi_improved, psi_jwkb

MIN_EPSILON = 1e-6


class WJwkbForms(NamedTuple):
    direct: ComplexField
    schwarzian: ComplexField
    t_ratio: ComplexField


def w_forms_from_derivatives(k, dk, d2k):
    """The chain 3k'^2/(4k^2) - k''/(2k) = -{S, x}/2 = T''/T, term by term.

    Returns the three expressions ``(direct, schwarzian, t_ratio)`` exactly
    as written in that chain.  The Schwarzian is scale invariant, so any
    multiple of (k, k', k'') may be passed for it.
    """
    k, dk, d2k = (np.asarray(a, dtype=complex) for a in (k, dk, d2k))
    direct = 3.0 * dk**2 / (4.0 * k**2) - d2k / (2.0 * k)
    schwarz = d2k / k - 1.5 * (dk / k) ** 2
    t = k ** -0.5
    # T' = -k^(-3/2) k' / 2
    d2t = 0.75 * k ** -2.5 * dk**2 - 0.5 * k ** -1.5 * d2k
    return direct, -0.5 * schwarz, d2t / t


def w_jwkb(params: PhysicalParams, spec: Potential, grid) -> WJwkbForms:
    """Error function W of the JWKB wave in Psi'' + (k^2 + W) Psi = 0.

    Psi = T exp(iS/hbar) with T = k^(-1/2) gives Psi'' = (T''/T - k^2) Psi,
    so W = -T''/T = {S, x}/2 = k''/(2k) - 3k'^2/(4k^2): each returned form is
    the negative of the corresponding ``w_forms_from_derivatives`` term.  All
    come from analytic derivatives; the direct and T''/T forms use k = p/hbar,
    the Schwarzian form uses S' = p, S'' = p', S''' = p'' directly.
    """
    grid = as_grid(grid)
    p = _p(params, spec, grid)
    if np.any(p == 0):
        xt = float(grid[np.nonzero(p == 0)[0][0]])
        raise TurningPointError(f"W_JWKB is singular at the turning point x={xt:.12g}", xt)
    dp = _dp(params, spec, grid)
    d2p = _d2p(params, spec, grid)
    hbar = params.hbar
    direct, _, t_ratio = w_forms_from_derivatives(p / hbar, dp / hbar, d2p / hbar)
    _, schwarzian, _ = w_forms_from_derivatives(p, dp, d2p)
    return WJwkbForms(ComplexField(grid, -direct, "w_jwkb_direct"),
                      ComplexField(grid, -schwarzian, "w_jwkb_schwarzian"),
                      ComplexField(grid, -t_ratio, "w_jwkb_t_ratio"))


def w_form_disagreement(forms: WJwkbForms) -> float:
    """Largest pairwise relative difference between the three forms."""
    a, b, c = (f.values for f in forms)
    worst = 0.0
    for x, y in ((a, b), (a, c), (b, c)):
        scale = np.maximum(np.abs(x), np.abs(y))
        diff = np.abs(x - y)
        rel = np.where(scale > 0, diff / np.where(scale > 0, scale, 1.0), 0.0)
        worst = max(worst, float(np.max(rel)))
    return worst


def w_improved(eta: ComplexField, params: PhysicalParams) -> ComplexField:
    return ComplexField(eta.grid, eta.values**2 / params.hbar**2, "w_improved")


def probability_current(sample: WavefunctionSample) -> ComplexField:
    """J = -(i hbar / 2m)(Psi* Psi' - Psi'* Psi), Psi' by 4th-order differences."""
    h = finite_diff.uniform_step(sample.grid)
    psi = sample.psi.values
    dpsi = finite_diff.d1(psi, h)
    prm = sample.params
    j = -1j * prm.hbar / (2 * prm.mass) * (np.conj(psi) * dpsi - np.conj(dpsi) * psi)
    return ComplexField(sample.grid, j, "current")


# points dropped at each end: there the one-sided stencils of two nested
# derivatives (Psi' then dJ/dx) lose an order
INTERIOR = 4


def interior(values):
    return np.asarray(values)[INTERIOR:-INTERIOR]


def discretization_floor(current: ComplexField, k_max, h) -> float:
    """A-priori size of the differencing error in dJ/dx.

    Truncation max|J| k (k h)^4 of the 4th-order stencils plus round-off
    of two nested difference quotients.
    """
    j = float(np.max(np.abs(current.values)))
    eps = np.finfo(float).eps
    return j * k_max * (k_max * h) ** 4 + 1e3 * eps * j / h


def current_divergence_check(sample: WavefunctionSample, eta: ComplexField,
                             params: PhysicalParams):
    """``(lhs, rhs)`` with lhs = dJ/dx (differences) and rhs from eta.

    rhs = i (eta^2 - conj(eta)^2) |Psi|^2 / (2 m hbar).
    """
    if sample.method is not WaveMethod.IMPROVED:
        raise MethodMismatchError("current divergence formula needs an ImprovedJwkb sample")
    h = finite_diff.uniform_step(sample.grid)
    current = probability_current(sample)
    lhs = finite_diff.d1(current.values, h)
    e = eta.values
    rhs = 1j * (e**2 - np.conj(e) ** 2) * np.abs(sample.psi.values) ** 2 \
        / (2 * params.mass * params.hbar)
    return (ComplexField(sample.grid, lhs, "current_divergence_lhs"),
            ComplexField(sample.grid, rhs, "current_divergence_rhs"))


def _sign_changes(func, lo, hi, spec, samples=4001):
    cuts = [lo] + [x for x in spec.discontinuities if lo < x < hi] + [hi]
    out = []
    for a, b in zip(cuts[:-1], cuts[1:]):
        if not b > a:
            continue
        xs = np.linspace(a, b, samples)[1:-1]
        vals = np.asarray(func(xs), dtype=float)
        for i in np.nonzero(vals[:-1] * vals[1:] < 0)[0]:
            out.append(brentq(func, xs[i], xs[i + 1], xtol=1e-14))
    return np.array(out, dtype=float)


def integrated_abs_dp(params: PhysicalParams, spec: Potential, points, rtol=1e-10,
                      singular=()):
    """int_{x0}^x |p'(y)| dy at each of ``points`` (nonnegative either side of x0).

    ``singular`` lists extra nodes to treat as turning points (tanh-sinh).
    """
    points = np.asarray(points, dtype=float)
    span = np.concatenate([points, [params.x0], singular])
    # |p'| has kinks where U' changes sign; relative panel tests never settle there
    extrema = _sign_changes(spec.derivative, span.min(), span.max(), spec)
    nodes, turning = panel_nodes(params, spec, np.concatenate([span, extrema]))
    turning |= np.isin(nodes, np.asarray(singular, dtype=float))
    panels = integrate_panels(lambda y, idx: np.abs(_dp(params, spec, y)), nodes, turning, rtol)
    running = cumulative_from_x0(panels, nodes, params.x0).real
    return np.abs(running[np.searchsorted(nodes, points)])


def eta_bound_margin(eta: ComplexField, params: PhysicalParams, spec: Potential,
                     rtol=1e-10) -> ComplexField:
    """margin(x) = int_{x0}^x |p'| - |eta(x)|; real-valued content."""
    bound = integrated_abs_dp(params, spec, eta.grid, rtol)
    return ComplexField(eta.grid, bound - np.abs(eta.values), "eta_bound_margin")


@dataclass(frozen=True)
class TurningPointRow:
    epsilon: float
    abs_eta: float
    abs_w_jwkb: float
    error: str = ""


@dataclass(frozen=True)
class TurningPointStudy:
    turning_point: float
    side: int
    rows: tuple
    bound: float  # int |p'| from x0 up to the turning point

    def fitted_exponent(self) -> float:
        """Log-log slope of |W_JWKB| against epsilon over the valid rows."""
        ok = [r for r in self.rows if not r.error and r.abs_w_jwkb > 0]
        if len(ok) < 2:
            return math.nan
        eps = np.log([r.epsilon for r in ok])
        w = np.log([r.abs_w_jwkb for r in ok])
        return float(np.polyfit(eps, w, 1)[0])

    def max_abs_eta(self) -> float:
        vals = [r.abs_eta for r in self.rows if not r.error]
        return max(vals) if vals else math.nan


def geometric_epsilons(start=1e-1, stop=1e-5, per_decade=2):
    decades = math.log10(start / stop)
    n = int(round(decades * per_decade)) + 1
    return list(np.geomspace(start, stop, n))


def turning_point_study(params: PhysicalParams, spec: Potential, x_t,
                        epsilons) -> TurningPointStudy:
    """Probe eta and W_JWKB at x_t -+ eps from the classically allowed side.

    eta comes from the ODE started at ``params.x0`` (which must lie on the
    allowed side).  A failing ODE is recorded in the row, not raised.
    """
    x_t = float(x_t)
    eps = np.asarray(epsilons, dtype=float)
    if eps.size == 0 or np.any(np.diff(eps) >= 0) or eps.min() < MIN_EPSILON:
        raise ValueError(f"epsilons must be decreasing and >= {MIN_EPSILON}")
    energy = params.energy
    if abs(spec.value(x_t) - energy) > 1e-8 * (1.0 + abs(energy)):
        raise PhysicsDomainError(f"x={x_t:.12g} is not a turning point (U != E)")
    slope = spec.derivative(x_t)
    if slope == 0:
        raise PhysicsDomainError("degenerate turning point (U' = 0)")
    side = -1 if slope > 0 else 1
    if (params.x0 - x_t) * side <= 0:
        raise PhysicsDomainError("x0 must lie on the classically allowed side of x_t")
    xs = x_t + side * eps
    order = np.argsort(xs)
    grid = xs[order]
    rows = [None] * eps.size
    w = w_jwkb(params, spec, grid).direct.values
    try:
        eta_sorted, _ = _eta_ode_full(params, spec, grid, 0j)
        eta = np.empty_like(eta_sorted)
        eta[order] = eta_sorted
        errors = [""] * eps.size
    except JwkbError:
        eta = np.full(eps.size, np.nan, dtype=complex)
        errors = []
        for i, x in enumerate(xs):
            try:
                eta[i] = _eta_ode_full(params, spec, np.array([x]), 0j)[0][0]
                errors.append("")
            except JwkbError as exc:
                errors.append(str(exc))
    w_by_eps = np.empty(eps.size)
    w_by_eps[order] = np.abs(w)
    for i in range(eps.size):
        rows[i] = TurningPointRow(float(eps[i]), float(abs(eta[i])), float(w_by_eps[i]),
                                  errors[i])
    bound = float(integrated_abs_dp(params, spec, [x_t], singular=[x_t])[0])
    return TurningPointStudy(x_t, side, tuple(rows), bound)


@dataclass(frozen=True)
class DiagnosticsReport:
    w_jwkb_forms: WJwkbForms
    w_improved: ComplexField
    current: ComplexField
    current_divergence_lhs: ComplexField
    current_divergence_rhs: ComplexField
    eta_bound_margin: ComplexField
    turning_point_table: tuple = field(default=())
    study: TurningPointStudy | None = None

    def fields(self):
        """Per-grid fields keyed by file stem."""
        f = self.w_jwkb_forms
        return {
            "w_jwkb_direct": f.direct,
            "w_jwkb_schwarzian": f.schwarzian,
            "w_jwkb_t_ratio": f.t_ratio,
            "w_improved": self.w_improved,
            "current": self.current,
            "current_divergence_lhs": self.current_divergence_lhs,
            "current_divergence_rhs": self.current_divergence_rhs,
            "eta_bound_margin": self.eta_bound_margin,
        }

    def summary(self) -> dict:
        lhs, rhs = self.current_divergence_lhs.values, self.current_divergence_rhs.values
        scale = float(np.max(np.abs(rhs)))
        margin = self.eta_bound_margin.values.real
        out = {
            "w_jwkb_form_disagreement": w_form_disagreement(self.w_jwkb_forms),
            "w_jwkb_max_abs": float(np.max(np.abs(self.w_jwkb_forms.direct.values))),
            "w_improved_max_abs": float(np.max(np.abs(self.w_improved.values))),
            "current_divergence_max_diff": float(np.max(np.abs(interior(lhs - rhs)))),
            "current_divergence_rhs_scale": scale,
            "eta_bound_margin_min": float(np.min(margin)),
            "turning_point": None,
            "turning_point_fitted_exponent": None,
            "turning_point_max_abs_eta": None,
            "turning_point_eta_bound": None,
        }
        if self.study is not None:
            out.update({
                "turning_point": self.study.turning_point,
                "turning_point_fitted_exponent": self.study.fitted_exponent(),
                "turning_point_max_abs_eta": self.study.max_abs_eta(),
                "turning_point_eta_bound": self.study.bound,
            })
        return out


def diagnose(params: PhysicalParams, spec: Potential, grid, x_t=None,
             epsilons=None, **tols) -> DiagnosticsReport:
    """Build the full report on ``grid``; add a turning-point study if ``x_t``."""
    grid = as_grid(grid)
    forms = w_jwkb(params, spec, grid)
    sample = psi_improved(params, spec, grid, **tols)
    lhs, rhs = current_divergence_check(sample, sample.eta, params)
    study = None
    if x_t is not None:
        study = turning_point_study(params, spec, x_t, epsilons or geometric_epsilons())
    return DiagnosticsReport(
        w_jwkb_forms=forms,
        w_improved=w_improved(sample.eta, params),
        current=probability_current(sample),
        current_divergence_lhs=lhs,
        current_divergence_rhs=rhs,
        eta_bound_margin=eta_bound_margin(sample.eta, params, spec),
        turning_point_table=study.rows if study else (),
        study=study,
    )


def jwkb_current(params, spec, grid) -> ComplexField:
    """Probability current of the standard right-moving JWKB wave."""
    return probability_current(psi_jwkb(params, spec, grid))
