"""Catalog of one-dimensional potentials U(x) with exact derivatives.

Every family exposes ``value``, ``derivative`` and ``second_derivative``
(vectorized over numpy arrays), the positions of its discontinuities and a
decomposition into smooth ``pieces`` so downstream grids can be split at the
jumps.  Potentials are immutable and can be built from a JSON document::

    {"family": "eckart", "u0": 1.0, "width": 1.0}

Family keys and their fields:

===============  ===============================
``constant``     ``u0``
``step``         ``u_left``, ``u_right``, ``x_step``
``rectangular``  ``u0``, ``x_left``, ``x_right``
``eckart``       ``u0``, ``width``   (u0 sech^2(x/width))
``gaussian``     ``u0``, ``center``, ``width`` (u0 exp(-(x-c)^2/(2 width^2)))
``linear_ramp``  ``slope``, ``intercept``
``tabulated``    ``knots``: list of ``[x, u]`` pairs
===============  ===============================
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import ClassVar

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import bisect

from .errors import DiscontinuityError, DomainError

# uniform pre-scan resolution for turning-point brackets
SCAN_INTERVALS = 4096
# |x| >= CUTOFF_WIDTHS * width puts sech^2 and Gaussian tails below ~1e-10
CUTOFF_WIDTHS = 12.0


def _out(x, values):
    values = np.asarray(values, dtype=float)
    if np.ndim(x) == 0:
        return float(values)
    return values


class Potential:
    """Base class; subclasses are frozen dataclasses."""

    family: ClassVar[str] = ""
    discontinuities: ClassVar[tuple] = ()

    # --- to be provided by subclasses -------------------------------------
    def _u(self, x):
        raise NotImplementedError

    def _du(self, x):
        raise NotImplementedError

    def _d2u(self, x):
        raise NotImplementedError

    # --- public API -------------------------------------------------------
    @property
    def domain(self) -> tuple[float, float]:
        return (-math.inf, math.inf)

    def _check(self, x):
        x = np.asarray(x, dtype=float)
        lo, hi = self.domain
        if not np.all(np.isfinite(x)) or np.any(x < lo) or np.any(x > hi):
            raise DomainError(
                f"{self.family}: position outside domain [{lo}, {hi}]")
        return x

    def _check_smooth(self, x):
        x = self._check(x)
        for xd in self.discontinuities:
            if np.any(x == xd):
                raise DiscontinuityError(
                    f"{self.family}: derivative requested at discontinuity x={xd}")
        return x

    def value(self, x):
        """U(x)."""
        return _out(x, self._u(self._check(x)))

    def derivative(self, x):
        """U'(x); raises DiscontinuityError at a jump."""
        return _out(x, self._du(self._check_smooth(x)))

    def second_derivative(self, x):
        """U''(x); raises DiscontinuityError at a jump."""
        return _out(x, self._d2u(self._check_smooth(x)))

    __call__ = value

    def pieces(self) -> list[tuple[float, float, "Potential"]]:
        """Smooth pieces ``(lo, hi, potential)`` covering the domain.

        Each piece potential is smooth on the whole real line so it may be
        evaluated slightly past its own interval (one Numerov step, say).
        """
        lo, hi = self.domain
        return [(lo, hi, self)]

    @property
    def asymptotes(self) -> tuple[float, float] | None:
        """Limits of U at the left and right ends, or None if U is unbounded."""
        return None

    @property
    def core(self) -> tuple[float, float] | None:
        """Interval outside which U equals its asymptotes to ~1e-10."""
        return None

    @property
    def is_piecewise_constant(self) -> bool:
        return False

    def to_dict(self) -> dict:
        out = {"family": self.family}
        for name in self.__dataclass_fields__:
            val = getattr(self, name)
            if name == "knots":
                val = [list(k) for k in val]
            out[name] = val
        return out


@dataclass(frozen=True)
class Constant(Potential):
    u0: float = 0.0
    family: ClassVar[str] = "constant"

    def _u(self, x):
        return np.full_like(x, self.u0, dtype=float)

    def _du(self, x):
        return np.zeros_like(x, dtype=float)

    _d2u = _du

    @property
    def asymptotes(self):
        return (self.u0, self.u0)

    @property
    def is_piecewise_constant(self):
        return True


@dataclass(frozen=True)
class Step(Potential):
    """u_left for x < x_step, u_right for x >= x_step."""

    u_left: float = 0.0
    u_right: float = 1.0
    x_step: float = 0.0
    family: ClassVar[str] = "step"

    @property
    def discontinuities(self):
        return (self.x_step,)

    def _u(self, x):
        return np.where(x < self.x_step, self.u_left, self.u_right).astype(float)

    def _du(self, x):
        return np.zeros_like(x, dtype=float)

    _d2u = _du

    def pieces(self):
        return [(-math.inf, self.x_step, Constant(self.u_left)),
                (self.x_step, math.inf, Constant(self.u_right))]

    @property
    def asymptotes(self):
        return (self.u_left, self.u_right)

    @property
    def core(self):
        return (self.x_step, self.x_step)

    @property
    def is_piecewise_constant(self):
        return True


@dataclass(frozen=True)
class RectangularBarrier(Potential):
    """u0 on [x_left, x_right), zero elsewhere."""

    u0: float = 1.0
    x_left: float = 0.0
    x_right: float = 1.0
    family: ClassVar[str] = "rectangular"

    def __post_init__(self):
        if not self.x_left < self.x_right:
            raise ValueError("rectangular barrier needs x_left < x_right")

    @property
    def discontinuities(self):
        return (self.x_left, self.x_right)

    def _u(self, x):
        inside = (x >= self.x_left) & (x < self.x_right)
        return np.where(inside, self.u0, 0.0).astype(float)

    def _du(self, x):
        return np.zeros_like(x, dtype=float)

    _d2u = _du

    def pieces(self):
        return [(-math.inf, self.x_left, Constant(0.0)),
                (self.x_left, self.x_right, Constant(self.u0)),
                (self.x_right, math.inf, Constant(0.0))]

    @property
    def asymptotes(self):
        return (0.0, 0.0)

    @property
    def core(self):
        return (self.x_left, self.x_right)

    @property
    def is_piecewise_constant(self):
        return True


@dataclass(frozen=True)
class Eckart(Potential):
    """Symmetric Eckart barrier u0 sech^2(x/width)."""

    u0: float = 1.0
    width: float = 1.0
    family: ClassVar[str] = "eckart"

    def __post_init__(self):
        if self.width <= 0:
            raise ValueError("width must be positive")

    def _u(self, x):
        return self.u0 / np.cosh(x / self.width) ** 2

    def _du(self, x):
        s = x / self.width
        return -2.0 * self.u0 / self.width * np.tanh(s) / np.cosh(s) ** 2

    def _d2u(self, x):
        s = x / self.width
        sech2 = 1.0 / np.cosh(s) ** 2
        th = np.tanh(s)
        return -2.0 * self.u0 / self.width**2 * (sech2 * sech2 - 2.0 * sech2 * th * th)

    @property
    def asymptotes(self):
        return (0.0, 0.0)

    @property
    def core(self):
        return (-CUTOFF_WIDTHS * self.width, CUTOFF_WIDTHS * self.width)


@dataclass(frozen=True)
class Gaussian(Potential):
    """u0 exp(-(x - center)^2 / (2 width^2))."""

    u0: float = 1.0
    center: float = 0.0
    width: float = 1.0
    family: ClassVar[str] = "gaussian"

    def __post_init__(self):
        if self.width <= 0:
            raise ValueError("width must be positive")

    def _u(self, x):
        z = (x - self.center) / self.width
        return self.u0 * np.exp(-0.5 * z * z)

    def _du(self, x):
        z = (x - self.center) / self.width
        return -self.u0 * z / self.width * np.exp(-0.5 * z * z)

    def _d2u(self, x):
        z = (x - self.center) / self.width
        return self.u0 * (z * z - 1.0) / self.width**2 * np.exp(-0.5 * z * z)

    @property
    def asymptotes(self):
        return (0.0, 0.0)

    @property
    def core(self):
        half = CUTOFF_WIDTHS * self.width
        return (self.center - half, self.center + half)


@dataclass(frozen=True)
class LinearRamp(Potential):
    slope: float = 1.0
    intercept: float = 0.0
    family: ClassVar[str] = "linear_ramp"

    def _u(self, x):
        return self.slope * x + self.intercept

    def _du(self, x):
        return np.full_like(x, self.slope, dtype=float)

    def _d2u(self, x):
        return np.zeros_like(x, dtype=float)

    @property
    def asymptotes(self):
        return (self.intercept, self.intercept) if self.slope == 0 else None


@dataclass(frozen=True)
class Tabulated(Potential):
    """Natural cubic spline through ``knots`` (strictly increasing in x)."""

    knots: tuple = ()
    family: ClassVar[str] = "tabulated"
    _spline: CubicSpline = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        knots = tuple((float(x), float(u)) for x, u in self.knots)
        if len(knots) < 3:
            raise ValueError("tabulated potential needs at least 3 knots")
        xs = np.array([k[0] for k in knots])
        if np.any(np.diff(xs) <= 0):
            raise ValueError("tabulated knots must be strictly increasing in x")
        object.__setattr__(self, "knots", knots)
        us = np.array([k[1] for k in knots])
        object.__setattr__(self, "_spline", CubicSpline(xs, us, bc_type="natural"))

    @property
    def domain(self):
        return (self.knots[0][0], self.knots[-1][0])

    def _u(self, x):
        return self._spline(x)

    def _du(self, x):
        return self._spline(x, 1)

    def _d2u(self, x):
        return self._spline(x, 2)

    @property
    def asymptotes(self):
        return (self.knots[0][1], self.knots[-1][1])

    @property
    def core(self):
        return self.domain

    def to_dict(self):
        return {"family": self.family, "knots": [list(k) for k in self.knots]}


FAMILIES = {
    cls.family: cls
    for cls in (Constant, Step, RectangularBarrier, Eckart, Gaussian, LinearRamp, Tabulated)
}
_ALIASES = {"rectangular_barrier": "rectangular", "ramp": "linear_ramp", "linear": "linear_ramp"}


def from_dict(doc: dict) -> Potential:
    """Build a potential from its JSON document."""
    doc = dict(doc)
    try:
        name = str(doc.pop("family")).lower()
    except KeyError:
        raise ValueError("potential document lacks 'family'") from None
    name = _ALIASES.get(name, name)
    if name not in FAMILIES:
        raise ValueError(f"unknown potential family {name!r}; "
                         f"expected one of {sorted(FAMILIES)}")
    cls = FAMILIES[name]
    allowed = set(cls.__dataclass_fields__) - {"_spline"}
    unknown = set(doc) - allowed
    if unknown:
        raise ValueError(f"unexpected keys for {name}: {sorted(unknown)}")
    if name != "tabulated":
        doc = {k: float(v) for k, v in doc.items()}
    return cls(**doc)


def evaluate(spec: Potential, x):
    return spec.value(x)


def derivative(spec: Potential, x):
    return spec.derivative(x)


def second_derivative(spec: Potential, x):
    return spec.second_derivative(x)


def turning_points(spec: Potential, params, interval) -> list[float]:
    """All roots of U(x) = E in ``interval``, sorted ascending.

    A uniform pre-scan with ``SCAN_INTERVALS`` cells brackets sign changes
    of U - E which are then refined by bisection to an absolute tolerance of
    1e-12 (b - a).  Sign changes caused by a jump of a discontinuous family
    are not roots and are dropped.  Tangential roots that do not change sign
    between scan nodes are not detected.
    """
    a, b = map(float, interval)
    if not a < b:
        raise ValueError("interval must satisfy a < b")
    energy = float(params.energy)
    xs = np.linspace(a, b, SCAN_INTERVALS + 1)
    g = spec.value(xs) - energy
    xtol = 1e-12 * (b - a)
    accept = 1e-10 * (1.0 + abs(energy))

    def h(x):
        return float(spec.value(x)) - energy

    roots = [float(x) for x in xs[g == 0.0]]
    for i in np.nonzero(g[:-1] * g[1:] < 0.0)[0]:
        root = bisect(h, xs[i], xs[i + 1], xtol=xtol)
        if abs(h(root)) <= accept:
            roots.append(root)
    return sorted(set(roots))
