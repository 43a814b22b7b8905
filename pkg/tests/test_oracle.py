import math

import numpy as np
import pytest
from scipy.special import airy

from ijwkb import oracle
from ijwkb.errors import AccuracyError, GridError, PhysicsDomainError
from ijwkb.oracle import (ScatteringMethod, numerov_cauchy, numerov_derivative, numerov_solve,
                          rectangular_exact, rectangular_formula, step_exact,
                          transmission_numerov)
from ijwkb.potentials import (Constant, Eckart, Gaussian, LinearRamp, RectangularBarrier, Step,
                              Tabulated)
from ijwkb.semiclassics import PhysicalParams


def _plane_error(h, wavelengths=10):
    params = PhysicalParams(1.0, 1.0, 2.0, 0.0)
    n = int(round(wavelengths * math.pi / h)) + 1
    grid = np.arange(n) * h
    psi = numerov_solve(params, Constant(0.0), grid, 1.0, np.exp(2j * h)).values
    return float(np.max(np.abs(psi - np.exp(2j * grid))))


def test_numerov_plane_wave():
    assert _plane_error(1e-3) <= 1e-9


def test_numerov_global_order():
    errs = [_plane_error(h) for h in (0.04, 0.02, 0.01)]
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(np.abs(orders - 4.0) <= 0.3)


def test_numerov_against_airy(rng):
    # psi'' = 2 (x - 2) psi is Ai(2^(1/3) (x - 2))
    params = PhysicalParams(1.0, 1.0, 2.0, 0.0)
    grid = np.linspace(-6.0, 3.0, 9001)
    z = 2 ** (1 / 3) * (grid - 2.0)
    ai = airy(z)[0]
    psi = numerov_solve(params, LinearRamp(1.0, 0.0), grid, ai[0], ai[1]).values
    picks = rng.choice(grid.size, 20, replace=False)
    assert np.max(np.abs(psi[picks] - ai[picks])) <= 1e-7


def test_numerov_flux_constant_on_eckart():
    params = PhysicalParams(1.0, 1.0, 4.0, 0.0)
    spec = Eckart(1, 1)
    grid = np.linspace(-10, 10, 20001)
    h = grid[1] - grid[0]
    k = math.sqrt(8.0)
    psi = numerov_solve(params, spec, grid, np.exp(1j * k * grid[0]),
                        np.exp(1j * k * grid[1])).values
    g = -2.0 * (4.0 - spec.value(grid))
    dpsi = numerov_derivative(psi[:-2], psi[1:-1], psi[2:], g[:-2], g[2:], h)
    flux = (np.conj(psi[1:-1]) * dpsi).imag
    assert np.ptp(flux) <= 1e-8


def test_numerov_rejects_nonuniform_grid(unit):
    with pytest.raises(GridError):
        numerov_solve(unit, Constant(0.0), [0.0, 0.1, 0.3], 1.0, 1.0)


def test_numerov_cauchy_across_step():
    params = PhysicalParams(1.0, 1.0, 2.0, 0.0)
    grid = np.linspace(-2, 2, 41)
    k1, k2 = 2.0, 1.0
    r = (k1 - k2) / (k1 + k2)
    t = 2 * k1 / (k1 + k2)
    x0 = grid[0]
    psi = numerov_cauchy(params, Step(0.0, 1.5, 0.0), grid,
                         np.exp(1j * k1 * x0) + r * np.exp(-1j * k1 * x0),
                         1j * k1 * (np.exp(1j * k1 * x0) - r * np.exp(-1j * k1 * x0))).values
    expected = np.where(grid < 0, np.exp(1j * k1 * grid) + r * np.exp(-1j * k1 * grid),
                        t * np.exp(1j * k2 * grid))
    assert np.max(np.abs(psi - expected)) <= 1e-9


def test_step_exact_examples():
    res = step_exact(PhysicalParams(1.0, 1.0, 2.0, 0.0), 0.0, 1.5)
    assert res.transmission == pytest.approx(8 / 9, abs=1e-12)
    assert res.reflection == pytest.approx(1 / 9, abs=1e-12)
    assert res.method is ScatteringMethod.EXACT_ANALYTIC
    flat = step_exact(PhysicalParams(1.0, 1.0, 2.0, 0.0), 0.5, 0.5)
    assert flat.transmission == pytest.approx(1.0) and flat.reflection == pytest.approx(0.0)
    near = step_exact(PhysicalParams(1.0, 1.0, 1.5 + 1e-10, 0.0), 0.0, 1.5)
    assert near.transmission < 1e-4
    with pytest.raises(PhysicsDomainError):
        step_exact(PhysicalParams(1.0, 1.0, 1.0, 0.0), 0.0, 1.5)


def test_rectangular_exact_examples():
    params = PhysicalParams(1.0, 1.0, 2.0, 0.0)
    res = rectangular_exact(params, 1.0, 1.0)
    expected = 1.0 / (1.0 + 4.0 * math.sin(math.sqrt(2.0)) ** 2 / 32.0)
    assert res.transmission == pytest.approx(expected, abs=1e-12)
    assert res.transmission == pytest.approx(0.89130, abs=5e-6)
    assert rectangular_formula(params, 1.0, 1.0) == pytest.approx(expected, abs=1e-14)
    # k2 w = pi is a resonance
    width = math.pi / math.sqrt(2.0)
    assert rectangular_exact(params, 1.0, width).transmission == pytest.approx(1.0, abs=1e-12)
    assert rectangular_exact(params, 0.0, 1.0).transmission == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(PhysicsDomainError):
        rectangular_exact(params, 2.0, 1.0)


def test_numerov_transmission_matches_closed_forms():
    params = PhysicalParams(1.0, 1.0, 2.0, 0.0)
    step = transmission_numerov(params, Step(0.0, 1.5, 0.0), (-3.0, 3.0))
    assert step.transmission == pytest.approx(8 / 9, abs=1e-8)
    rect = transmission_numerov(params, RectangularBarrier(1.0, 0.0, 1.0), (-2.0, 3.0))
    assert rect.transmission == pytest.approx(rectangular_formula(params, 1.0, 1.0), abs=1e-8)
    for res in (step, rect):
        assert res.unitarity_defect <= 1e-9


def _eckart_closed_form(u0, a, energy):
    # sech^2 barrier, hbar = m = 1
    k = math.sqrt(2 * energy)
    num = math.sinh(math.pi * k * a) ** 2
    root = 8 * u0 * a * a - 1
    den_term = math.cosh(0.5 * math.pi * math.sqrt(root)) ** 2 if root > 0 else \
        math.cos(0.5 * math.pi * math.sqrt(-root)) ** 2
    return num / (num + den_term)


@pytest.mark.parametrize("energy", [1.2, 2.0, 4.0])
def test_numerov_transmission_on_eckart(energy):
    params = PhysicalParams(1.0, 1.0, energy, 0.0)
    res = transmission_numerov(params, Eckart(1.0, 1.0), (-14.0, 14.0))
    assert res.transmission == pytest.approx(_eckart_closed_form(1.0, 1.0, energy), abs=1e-8)
    assert res.unitarity_defect <= 1e-9


def test_reciprocity():
    params = PhysicalParams(1.0, 1.0, 2.5, 0.0)
    a = transmission_numerov(params, Step(0.0, 1.5, 0.0), (-2, 2))
    b = transmission_numerov(params, Step(1.5, 0.0, 0.0), (-2, 2))
    assert a.transmission == pytest.approx(b.transmission, abs=1e-8)
    xs = np.linspace(-4, 4, 41)
    knots = tuple(zip(xs, 0.5 + 0.5 * np.tanh(2 * xs)))
    mirrored = tuple(zip(xs, 0.5 - 0.5 * np.tanh(2 * xs)))
    ta = transmission_numerov(params, Tabulated(knots), (-4, 4)).transmission
    tb = transmission_numerov(params, Tabulated(mirrored), (-4, 4)).transmission
    assert ta == pytest.approx(tb, abs=1e-8)


def test_unitarity_on_smooth_catalog():
    for spec in (Eckart(1.0, 0.7), Gaussian(1.0, 0.3, 0.8)):
        for energy in (1.5, 3.0):
            p = PhysicalParams(1.0, 1.0, energy, 0.0)
            lo, hi = spec.core
            res = transmission_numerov(p, spec, (lo - 1, hi + 1))
            assert 0 <= res.transmission <= 1 + 1e-9
            assert res.unitarity_defect <= 1e-9


def test_transmission_numerov_errors():
    params = PhysicalParams(1.0, 1.0, 2.0, 0.0)
    with pytest.raises(PhysicsDomainError):
        transmission_numerov(params, LinearRamp(0.1, 0.0), (-1, 1))
    with pytest.raises(PhysicsDomainError):
        transmission_numerov(params, Eckart(1.0, 1.0), (-3, 3))
    with pytest.raises(PhysicsDomainError):
        transmission_numerov(params.with_energy(0.5), Step(0.0, 1.0, 0.0), (-2, 2))
    with pytest.raises(AccuracyError):
        transmission_numerov(params, Eckart(1.0, 1.0), (-14, 14), h0=0.5, max_halvings=1,
                             tol=1e-14)


def test_plane_wave_split():
    k = 1.7
    x = 0.3
    psi = 2 * np.exp(1j * k * x) + 0.5j * np.exp(-1j * k * x)
    dpsi = 1j * k * (2 * np.exp(1j * k * x) - 0.5j * np.exp(-1j * k * x))
    a, b = oracle.plane_wave_split(psi, dpsi, k)
    assert a == pytest.approx(2 * np.exp(1j * k * x)) and b == pytest.approx(0.5j * np.exp(-1j * k * x))
