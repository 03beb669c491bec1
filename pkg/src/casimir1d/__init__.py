"""Thermal Casimir-Polder free energies of damped oscillators coupled to a (1+1)-dimensional field."""

__version__ = "0.1.0"

from .errors import BranchError, DegeneracyError, DomainError, ResonanceError, ToleranceError
from .params import Geometry, OscillatorParams, ThermalParams

__all__ = [
    "BranchError",
    "DegeneracyError",
    "DomainError",
    "Geometry",
    "OscillatorParams",
    "ResonanceError",
    "ThermalParams",
    "ToleranceError",
    "__version__",
]
