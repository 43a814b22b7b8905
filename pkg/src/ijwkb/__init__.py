"""Standard and improved (linearized Riccati) JWKB approximations in 1D.

Submodules: ``potentials``, ``semiclassics``, ``corrections``,
``wavefunctions``, ``diagnostics``, ``oracle``, ``scattering`` and ``cli``.
"""

from .potentials import from_dict
from .semiclassics import ComplexField, PhysicalParams

__version__ = "0.1.0"
__all__ = ["ComplexField", "PhysicalParams", "from_dict", "__version__"]
