"""Certified computation of an unconditional bound for Ramanujan's prime counting inequality."""

from .errors import CertificationError, DomainError
from .numerics import CertReal, PrecisionContext

__version__ = "0.1.0"

__all__ = ["CertReal", "CertificationError", "DomainError", "PrecisionContext", "__version__"]
