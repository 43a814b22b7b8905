import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from ijwkb.errors import GridError, TurningPointError
from ijwkb.potentials import Constant, Eckart, Gaussian, LinearRamp, Step
from ijwkb.semiclassics import (ComplexField, PhysicalParams, action, action_field, momentum,
                                momentum_derivative, momentum_second_derivative, wave_vector)

from conftest import central_difference


def test_momentum_examples(unit):
    assert momentum(unit, Constant(0.0), 0.3) == 2
    assert momentum(PhysicalParams(1, 1, 0.5, 0), Constant(1.0), 0.0) == 1j
    assert momentum(unit, Eckart(1, 1), 0.0) == pytest.approx(math.sqrt(2), rel=1e-15)


def test_wave_vector_scales_with_hbar():
    p = PhysicalParams(2.0, 1.0, 2.0, 0.0)
    assert wave_vector(p, Constant(0.0), 1.0) == pytest.approx(1.0)


def test_momentum_derivative(unit):
    assert momentum_derivative(unit, Constant(0.4), 1.0) == 0
    eck = Eckart(1, 1)
    expected = -eck.derivative(1.0) / momentum(unit, eck, 1.0)
    assert momentum_derivative(unit, eck, 1.0) == pytest.approx(expected, rel=1e-14)
    fd = central_difference(lambda x: momentum(unit, eck, x).real, 1.0)
    assert momentum_derivative(unit, eck, 1.0).real == pytest.approx(fd, abs=1e-8)
    # p' = -1/2 at x = 0 on a unit ramp with E = 2, p(0) = 2
    assert momentum_derivative(unit, LinearRamp(1.0, 0.0), 0.0) == pytest.approx(-0.5)


def test_momentum_second_derivative_against_fd(unit):
    g = Gaussian(1, 0, 1)
    fd = central_difference(lambda x: momentum_derivative(unit, g, x).real, 0.7, h=1e-5)
    assert momentum_second_derivative(unit, g, 0.7).real == pytest.approx(fd, abs=1e-7)


def test_momentum_derivative_singular_at_turning_point(unit):
    with pytest.raises(TurningPointError):
        momentum_derivative(unit, LinearRamp(1.0, 0.0), 2.0)


@settings(max_examples=200, deadline=None)
@given(x=st.floats(-5, 5), energy=st.floats(0.05, 3.0))
def test_branch_rule(x, energy):
    p = PhysicalParams(1.0, 1.0, energy, 0.0)
    spec = Eckart(1.0, 1.0)
    val = momentum(p, spec, x)
    assert val.imag >= 0
    if energy > spec.value(x):
        assert val.imag == 0 and val.real > 0


def test_action_examples(unit):
    assert action(unit.with_x0(0.0), Constant(0.0), 3.0) == pytest.approx(6.0, rel=1e-14)
    assert action(unit.with_x0(1.3), Eckart(), 1.3) == 0
    assert action(unit, Constant(0.0), -1.0) == pytest.approx(-2.0, rel=1e-14)


def test_action_on_ramp_closed_form(unit):
    # int_0^1 sqrt(2(2-y)) dy = (2 sqrt2 / 3)(2^(3/2) - 1)
    expected = 2 * math.sqrt(2) / 3 * (2**1.5 - 1)
    got = action(unit, LinearRamp(1.0, 0.0), 1.0)
    assert got.real == pytest.approx(expected, rel=1e-12)
    assert expected == pytest.approx(1.7238576, abs=1e-7)


def test_action_through_turning_point(unit):
    # past x = 2 the ramp is forbidden and the action picks up an imaginary part
    ramp = LinearRamp(1.0, 0.0)
    got = action(unit, ramp, 3.0)
    re = integrate.quad(lambda y: math.sqrt(2 * (2 - y)), 0, 2)[0]
    im = integrate.quad(lambda y: math.sqrt(2 * (y - 2)), 2, 3)[0]
    assert got == pytest.approx(complex(re, im), rel=1e-9)


def test_action_across_step(unit):
    step = Step(0.0, 1.0, 1.0)
    assert action(unit, step, 2.0) == pytest.approx(2.0 + math.sqrt(2.0), rel=1e-13)


def test_action_field_examples(unit):
    assert action_field(unit, Constant(0.0), [0.0]).values[0] == 0
    field = action_field(unit, Constant(0.0), [0.0, 1.0, 2.0])
    np.testing.assert_allclose(field.values, [0, 2, 4], rtol=1e-14)


def test_action_field_matches_pointwise(unit):
    spec = Eckart(1, 1)
    grid = np.linspace(-8, 8, 2001)
    field = action_field(unit, spec, grid)
    picks = np.arange(0, grid.size, 97)
    pointwise = np.array([action(unit, spec, grid[i]) for i in picks])
    assert np.max(np.abs(field.values[picks] - pointwise)) <= 1e-10 * np.max(np.abs(pointwise))


@settings(max_examples=40, deadline=None)
@given(a=st.floats(-6, 6), b=st.floats(-6, 6))
def test_action_is_additive(a, b):
    params = PhysicalParams(1.0, 1.0, 2.5, 0.0)
    spec = Gaussian(1.0, 0.3, 0.8)
    segment = action(params.with_x0(a), spec, b)
    total = action(params, spec, b)
    assert abs(action(params, spec, a) + segment - total) <= 1e-10 * (1 + abs(total))


def test_action_derivative_is_momentum(unit):
    spec = Eckart(1, 1)
    grid = np.linspace(-4, 4, 801)
    s = action_field(unit, spec, grid).values
    h = grid[1] - grid[0]
    ds = (s[2:] - s[:-2]) / (2 * h)
    p = np.array([momentum(unit, spec, x) for x in grid[1:-1]])
    assert np.max(np.abs(ds - p) / np.abs(p)) <= 1e-4
    # fourth-order stencil tightens to the stated 1e-6
    ds4 = (s[:-4] - 8 * s[1:-3] + 8 * s[3:-1] - s[4:]) / (12 * h)
    assert np.max(np.abs(ds4 - p[1:-1]) / np.abs(p[1:-1])) <= 1e-6


def test_params_validation():
    with pytest.raises(ValueError):
        PhysicalParams(0.0, 1.0)
    with pytest.raises(ValueError):
        PhysicalParams(1.0, -1.0)
    p = PhysicalParams(1.0, 2.0, 3.0, 4.0)
    assert p.with_energy(5.0).energy == 5.0 and p.with_x0(1.0).x0 == 1.0


def test_complex_field_validation():
    with pytest.raises(GridError):
        ComplexField([0.0, 1.0], [1.0])
    with pytest.raises(GridError):
        ComplexField([1.0, 0.0], [1.0, 2.0])
    field = ComplexField([0.0, 1.0], [1.0, 2j])
    assert len(field) == 2
    with pytest.raises(ValueError):
        field.values[0] = 3.0
