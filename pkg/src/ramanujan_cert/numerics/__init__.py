"""Certified numerics: intervals, Taylor models, quadrature, asymptotic sums, bisection."""

from .interval import (
    CertReal,
    PrecisionContext,
    as_cert,
    digits_to_prec,
    e,
    euler_gamma,
    exp,
    ln2,
    log,
    pi,
    power,
    sqrt,
)
from .taylor import Series
from .quadrature import integrate_adaptive
from .asymptotic import sum_asymptotic
from .roots import find_root_bisect

__all__ = [
    "CertReal",
    "PrecisionContext",
    "Series",
    "as_cert",
    "digits_to_prec",
    "e",
    "euler_gamma",
    "exp",
    "find_root_bisect",
    "integrate_adaptive",
    "ln2",
    "log",
    "pi",
    "power",
    "sqrt",
    "sum_asymptotic",
]
