"""Exception hierarchy shared by all modules."""


class JwkbError(Exception):
    """Base class for every error raised by this package."""


class DomainError(JwkbError, ValueError):
    """Position outside the declared domain of a potential."""


class DiscontinuityError(JwkbError, ValueError):
    """Derivative requested exactly at a potential discontinuity."""


class TurningPointError(JwkbError, ValueError):
    """A classical turning point (p = 0) lies where the method cannot handle it."""

    def __init__(self, message, position=None):
        super().__init__(message)
        self.position = position


class SingularRegionError(JwkbError, RuntimeError):
    """ODE integration stalled near a singular point of the equation."""

    def __init__(self, message, last_good=None):
        super().__init__(message)
        self.last_good = last_good


class AccuracyError(JwkbError, RuntimeError):
    """Quadrature or refinement did not reach the requested tolerance."""

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class GridError(JwkbError, ValueError):
    """Grid is malformed, mismatched, non-uniform or too coarse."""


class MethodMismatchError(JwkbError, ValueError):
    """An operation received a sample produced by the wrong method."""


class PhysicsDomainError(JwkbError, ValueError):
    """Energy or configuration outside the supported physical regime."""
