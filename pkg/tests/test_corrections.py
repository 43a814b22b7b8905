import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ijwkb.corrections import (CorrectionMethod, eta_integral, eta_ode, equivalence_residual,
                               f_closed, fix_constants, improved_solution, linearized_residual,
                               riccati_residual)
from ijwkb.diagnostics import eta_bound_margin
from ijwkb.errors import TurningPointError
from ijwkb.potentials import Constant, Eckart, Gaussian, LinearRamp, Step
from ijwkb.semiclassics import ComplexField, PhysicalParams, momentum_field


def test_eta_vanishes_for_constant_potential(unit):
    grid = np.linspace(0, 5, 51)
    assert np.all(eta_integral(unit, Constant(0.0), grid).values == 0)
    assert np.all(eta_ode(unit, Constant(0.0), grid).values == 0)


def test_eta_integral_with_c1_closed_form(unit):
    grid = np.linspace(0, math.pi / 2, 41)
    got = eta_integral(unit, Constant(0.0), grid, c1=1.0).values
    expected = (np.exp(-4j * grid) - 1) / 4j
    np.testing.assert_allclose(got, expected, atol=1e-9)
    assert abs(got[-1]) < 1e-9


def test_eta_ode_homogeneous_solution(unit):
    # eta' = -(2i/hbar) p eta with p = 2
    grid = np.linspace(0, 3, 31)
    got = eta_ode(unit, Constant(0.0), grid, eta_at_x0=1.0).values
    np.testing.assert_allclose(got, np.exp(-4j * grid), atol=1e-8)
    np.testing.assert_allclose(np.abs(got), 1.0, atol=1e-8)


@pytest.mark.parametrize("spec,energy,span", [(Eckart(1, 1), 2.0, (-8, 8)),
                                              (Gaussian(1, 0, 1), 3.0, (-6, 6))])
def test_ode_and_integral_agree(spec, energy, span):
    params = PhysicalParams(1.0, 1.0, energy, span[0])
    grid = np.linspace(*span, 401)
    a = eta_ode(params, spec, grid).values
    b = eta_integral(params, spec, grid).values
    assert np.max(np.abs(a - b)) <= 1e-6


def test_eta_from_interior_x0(unit):
    grid = np.linspace(-6, 6, 241)
    spec = Eckart(1, 1)
    a = eta_ode(unit, spec, grid).values
    b = eta_integral(unit, spec, grid).values
    assert a[120] == 0 and np.max(np.abs(a - b)) <= 1e-6


def test_f_closed_with_fixed_constant_is_momentum(unit):
    grid = np.linspace(0, 4, 41)
    _, c2 = fix_constants(unit, Constant(0.0))
    np.testing.assert_allclose(f_closed(unit, Constant(0.0), grid, c2).values, 2.0, atol=1e-9)


def test_f_closed_without_constant_has_spurious_term(unit):
    grid = np.linspace(0, 4, 41)
    got = f_closed(unit, Constant(0.0), grid, 0.0).values
    np.testing.assert_allclose(got, 2.0 * (1 - np.exp(-4j * grid)), atol=1e-8)


def test_f_closed_matches_integral_form_on_eckart():
    params = PhysicalParams(1.0, 1.0, 2.0, -8.0)
    spec = Eckart(1, 1)
    grid = np.linspace(-8, 8, 401)
    _, c2 = fix_constants(params, spec)
    f = f_closed(params, spec, grid, c2).values
    p = momentum_field(params, spec, grid).values
    eta = eta_integral(params, spec, grid).values
    assert np.max(np.abs(f - p - eta)) <= 1e-6


def test_fix_constants_examples(unit):
    assert fix_constants(unit, Constant(0.0)) == (0, pytest.approx(-1j))
    at_turning = PhysicalParams(2.0, 1.0, 1.0, 1.0)
    assert fix_constants(at_turning, LinearRamp(1.0, 0.0)) == (0, 0)
    assert abs(fix_constants(unit, Eckart(1, 1).__class__(0.0, 1.0))[1]) == pytest.approx(1.0)


def test_equivalence_residual(unit):
    grid = np.linspace(0, 3, 31)
    ode = improved_solution(unit, Constant(0.0), grid, CorrectionMethod.ODE)
    closed = improved_solution(unit, Constant(0.0), grid, CorrectionMethod.CLOSED)
    assert equivalence_residual(ode, ode) == 0
    assert equivalence_residual(ode, closed) <= 1e-9


def test_equivalence_residual_scales_with_one_plus_f(unit):
    grid = np.array([0.0, 1.0])
    a = improved_solution(unit, Constant(0.0), grid)
    shifted = ComplexField(grid, a.f.values + 2.0)
    b = type(a)(a.eta, shifted, a.c1, a.c2, a.method)
    assert equivalence_residual(a, b) == pytest.approx(2.0 / 3.0)


@pytest.mark.parametrize("spec", [Eckart(1.0, 1.0), Gaussian(1.0, 0.0, 1.0),
                                  Gaussian(0.6, 0.5, 0.4)])
def test_three_realizations_agree(spec):
    params = PhysicalParams(1.0, 1.0, 2.0, -6.0)
    grid = np.linspace(-6, 6, 301)
    sols = [improved_solution(params, spec, grid, m) for m in CorrectionMethod]
    for i in range(3):
        for j in range(i + 1, 3):
            assert equivalence_residual(sols[i], sols[j]) <= 1e-6


def test_riccati_residual_is_eta_squared():
    params = PhysicalParams(1.0, 1.0, 2.0, -8.0)
    spec = Eckart(1, 1)
    grid = np.linspace(-8, 8, 4001)
    sol = improved_solution(params, spec, grid)
    check = riccati_residual(params, spec, sol.f)
    inner = slice(4, -4)
    r, e2 = check.residual.values[inner], check.eta_squared.values[inner]
    assert np.max(np.abs(r - e2)) <= 1e-5 * np.max(np.abs(e2))


def test_riccati_residual_examples(unit):
    grid = np.linspace(0, 1, 101)
    p = momentum_field(unit, Constant(0.0), grid)
    assert np.max(np.abs(riccati_residual(unit, Constant(0.0), p).residual.values)) < 1e-12
    ramp = LinearRamp(1.0, 0.0)
    pr = momentum_field(unit, ramp, grid)
    r = riccati_residual(unit, ramp, pr).residual.values
    dp = -1.0 / pr.values
    np.testing.assert_allclose(r[4:-4], -1j * dp[4:-4], atol=1e-8)


@settings(max_examples=25, deadline=None)
@given(u0=st.floats(0.2, 1.5), width=st.floats(0.5, 2.0), centre=st.floats(-1, 1),
       margin=st.floats(0.3, 3.0), gaussian=st.booleans())
def test_eta_bound_and_linearized_residual(u0, width, centre, margin, gaussian):
    spec = Gaussian(u0, centre, width) if gaussian else Eckart(u0, width)
    params = PhysicalParams(1.0, 1.0, u0 + margin, -6.0)
    grid = np.linspace(-6, 6, 1201)
    eta = eta_ode(params, spec, grid)
    assert np.min(eta_bound_margin(eta, params, spec).values) >= -1e-8
    res = linearized_residual(params, spec, eta).values[4:-4]
    pmax = np.max(np.abs(momentum_field(params, spec, grid).values))
    assert np.max(np.abs(res)) <= 1e-5 * pmax**2


def test_turning_point_rejected(unit):
    grid = np.linspace(0, 3, 31)
    with pytest.raises(TurningPointError):
        eta_integral(unit, LinearRamp(1.0, 0.0), grid)
    with pytest.raises(TurningPointError):
        f_closed(unit, LinearRamp(1.0, 0.0), grid, 0.0)


def test_eta_is_zero_on_every_plateau_of_a_step():
    params = PhysicalParams(1.0, 1.0, 2.0, -2.0)
    step = Step(0.0, 1.0, 0.0)
    grid = np.linspace(-2, 2, 41)
    for method in CorrectionMethod:
        sol = improved_solution(params, step, grid, method)
        assert np.max(np.abs(sol.eta.values)) <= 1e-9
