"""Outward-rounded interval arithmetic on top of mpmath's ``libmp`` layer.

Every :class:`CertReal` carries its own binary precision, so nothing here
touches mpmath's global context and all operations are safe to run from
several threads at once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction

import mpmath
from mpmath import libmp
from mpmath.libmp import (
    finf,
    fninf,
    fnan,
    fzero,
    round_ceiling,
    round_floor,
    round_nearest,
)

from ..errors import DomainError

_FLOOR = round_floor
_CEIL = round_ceiling

DEFAULT_DIGITS = 60


def digits_to_prec(digits: int) -> int:
    """Binary working precision used for ``digits`` significant decimals."""
    return int(math.ceil(digits * 3.3219280948873626)) + 12


@dataclass(frozen=True)
class PrecisionContext:
    """Working precision plus the default budgets of the adaptive routines.

    ``default_tolerance`` defaults to ``10**-(digits // 2)``; the remaining
    half of the digits absorbs cancellation in the u-space rescalings.
    """

    digits: int = DEFAULT_DIGITS
    max_quadrature_depth: int = 80
    default_tolerance: float | None = None

    def __post_init__(self):
        if self.digits < 40:
            raise DomainError(f"digits must be >= 40, got {self.digits}")
        if self.max_quadrature_depth <= 0:
            raise DomainError("max_quadrature_depth must be positive")
        if self.default_tolerance is None:
            object.__setattr__(self, "default_tolerance", Fraction(1, 10 ** (self.digits // 2)))
        elif not self.default_tolerance > 0:
            raise DomainError("default_tolerance must be positive")

    @property
    def prec(self) -> int:
        return digits_to_prec(self.digits)

    def real(self, value, hi=None) -> "CertReal":
        return CertReal(value, hi, prec=self.prec)

    def pi(self) -> "CertReal":
        return pi(self.prec)

    def e(self) -> "CertReal":
        return e(self.prec)

    def ln2(self) -> "CertReal":
        return ln2(self.prec)


def _raw(value, prec: int, rnd):
    """Convert a Python/mpmath scalar to a raw mpf, rounded in direction ``rnd``."""
    if isinstance(value, tuple):
        return value
    if isinstance(value, bool):
        value = int(value)
    if isinstance(value, int):
        return libmp.from_int(value, prec, rnd)
    if isinstance(value, Fraction):
        return libmp.from_rational(value.numerator, value.denominator, prec, rnd)
    if isinstance(value, float):
        if math.isnan(value) or math.isinf(value):
            raise DomainError(f"non-finite float {value!r}")
        return libmp.from_float(value)
    if isinstance(value, mpmath.mpf):
        return value._mpf_
    if isinstance(value, Decimal):
        value = str(value)
    if isinstance(value, str):
        return libmp.from_str(value.strip(), prec, rnd)
    raise TypeError(f"cannot convert {type(value).__name__} to CertReal")


def _finite(x) -> bool:
    return x not in (finf, fninf, fnan)


class CertReal:
    """A closed interval ``[lo, hi]`` with outward-rounded arithmetic.

    Comparison operators are *certain* comparisons: ``a < b`` is true only
    when every point of ``a`` is below every point of ``b``. ``not (a < b)``
    therefore does not imply ``a >= b``.
    """

    __slots__ = ("_lo", "_hi", "prec")

    def __init__(self, lo, hi=None, prec: int | None = None):
        if prec is None:
            prec = lo.prec if isinstance(lo, CertReal) else digits_to_prec(DEFAULT_DIGITS)
        self.prec = prec
        if hi is None:
            hi = lo
        self._lo = lo._lo if isinstance(lo, CertReal) else _raw(lo, prec, _FLOOR)
        self._hi = hi._hi if isinstance(hi, CertReal) else _raw(hi, prec, _CEIL)
        if not (_finite(self._lo) and _finite(self._hi)):
            raise DomainError("interval endpoints must be finite")
        if libmp.mpf_gt(self._lo, self._hi):
            raise DomainError(f"empty interval [{self.lo}, {self.hi}]")

    @classmethod
    def _make(cls, lo, hi, prec):
        if not (_finite(lo) and _finite(hi)):
            raise DomainError("operation produced a non-finite enclosure")
        obj = object.__new__(cls)
        obj._lo = lo
        obj._hi = hi
        obj.prec = prec
        return obj

    @classmethod
    def hull(cls, *values: "CertReal") -> "CertReal":
        lo = min((v._lo for v in values), key=mpmath.mp.make_mpf)
        hi = max((v._hi for v in values), key=mpmath.mp.make_mpf)
        return cls._make(lo, hi, max(v.prec for v in values))

    # ----------------------------------------------------------------- views
    @property
    def lo(self) -> mpmath.mpf:
        return mpmath.mp.make_mpf(self._lo)

    @property
    def hi(self) -> mpmath.mpf:
        return mpmath.mp.make_mpf(self._hi)

    @property
    def mid(self) -> mpmath.mpf:
        return mpmath.mp.make_mpf(libmp.mpf_shift(libmp.mpf_add(self._lo, self._hi, 0), -1))

    @property
    def width(self) -> mpmath.mpf:
        return mpmath.mp.make_mpf(libmp.mpf_sub(self._hi, self._lo, 0))

    def mag(self) -> mpmath.mpf:
        """Largest absolute value in the interval."""
        return max(abs(self.lo), abs(self.hi))

    def mig(self) -> mpmath.mpf:
        """Smallest absolute value in the interval."""
        if self.contains(0):
            return mpmath.mpf(0)
        return min(abs(self.lo), abs(self.hi))

    def is_point(self) -> bool:
        return self._lo == self._hi

    def contains(self, value) -> bool:
        if isinstance(value, CertReal):
            return libmp.mpf_le(self._lo, value._lo) and libmp.mpf_ge(self._hi, value._hi)
        lo = _raw(value, self.prec + 64, _FLOOR)
        hi = _raw(value, self.prec + 64, _CEIL)
        return libmp.mpf_le(self._lo, lo) and libmp.mpf_ge(self._hi, hi)

    def subset_of(self, other: "CertReal") -> bool:
        return other.contains(self)

    def intersect(self, other: "CertReal") -> "CertReal":
        other = self._coerce(other)
        lo = self._lo if libmp.mpf_ge(self._lo, other._lo) else other._lo
        hi = self._hi if libmp.mpf_le(self._hi, other._hi) else other._hi
        if libmp.mpf_gt(lo, hi):
            raise DomainError("disjoint enclosures")
        return CertReal._make(lo, hi, max(self.prec, other.prec))

    def lower(self) -> "CertReal":
        return CertReal._make(self._lo, self._lo, self.prec)

    def upper(self) -> "CertReal":
        return CertReal._make(self._hi, self._hi, self.prec)

    def with_prec(self, prec: int) -> "CertReal":
        return CertReal._make(self._lo, self._hi, prec)

    def __float__(self) -> float:
        return float(self.mid)

    def __repr__(self) -> str:
        return f"CertReal([{libmp.to_str(self._lo, 20)}, {libmp.to_str(self._hi, 20)}])"

    def __str__(self) -> str:
        return self.format(15)

    def format(self, digits: int = 15) -> str:
        lo, hi = self.to_decimal_pair(digits, outward=True)
        return f"[{lo}, {hi}]"

    # ------------------------------------------------------------ arithmetic
    def _coerce(self, other) -> "CertReal":
        if isinstance(other, CertReal):
            return other
        return CertReal(other, prec=self.prec)

    def __add__(self, other):
        if not isinstance(other, CertReal):
            if _is_scalar(other):
                other = CertReal(other, prec=self.prec)
            else:
                return NotImplemented
        p = max(self.prec, other.prec)
        lo, hi = libmp.mpi_add((self._lo, self._hi), (other._lo, other._hi), p)
        return CertReal._make(lo, hi, p)

    __radd__ = __add__

    def __sub__(self, other):
        if not isinstance(other, CertReal):
            if _is_scalar(other):
                other = CertReal(other, prec=self.prec)
            else:
                return NotImplemented
        p = max(self.prec, other.prec)
        lo, hi = libmp.mpi_sub((self._lo, self._hi), (other._lo, other._hi), p)
        return CertReal._make(lo, hi, p)

    def __rsub__(self, other):
        if not _is_scalar(other):
            return NotImplemented
        return CertReal(other, prec=self.prec) - self

    def __neg__(self):
        return CertReal._make(libmp.mpf_neg(self._hi), libmp.mpf_neg(self._lo), self.prec)

    def __pos__(self):
        return self

    def __abs__(self):
        lo, hi = libmp.mpi_abs((self._lo, self._hi), self.prec)
        return CertReal._make(lo, hi, self.prec)

    def __mul__(self, other):
        if not isinstance(other, CertReal):
            if _is_scalar(other):
                other = CertReal(other, prec=self.prec)
            else:
                return NotImplemented
        p = max(self.prec, other.prec)
        lo, hi = libmp.mpi_mul((self._lo, self._hi), (other._lo, other._hi), p)
        return CertReal._make(lo, hi, p)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, CertReal):
            if _is_scalar(other):
                other = CertReal(other, prec=self.prec)
            else:
                return NotImplemented
        if other.contains(0):
            raise DomainError("division by an interval containing zero")
        p = max(self.prec, other.prec)
        lo, hi = libmp.mpi_div((self._lo, self._hi), (other._lo, other._hi), p)
        return CertReal._make(lo, hi, p)

    def __rtruediv__(self, other):
        if not _is_scalar(other):
            return NotImplemented
        return CertReal(other, prec=self.prec) / self

    def __pow__(self, exponent):
        if isinstance(exponent, int) and not isinstance(exponent, bool):
            if exponent < 0 and self.contains(0):
                raise DomainError("negative power of an interval containing zero")
            lo, hi = libmp.mpi_pow_int((self._lo, self._hi), exponent, self.prec)
            return CertReal._make(lo, hi, self.prec)
        return power(self, exponent)

    def square(self) -> "CertReal":
        return self ** 2

    # ----------------------------------------------------- certain ordering
    def __lt__(self, other):
        other = self._coerce(other)
        return libmp.mpf_lt(self._hi, other._lo)

    def __le__(self, other):
        other = self._coerce(other)
        return libmp.mpf_le(self._hi, other._lo)

    def __gt__(self, other):
        other = self._coerce(other)
        return libmp.mpf_gt(self._lo, other._hi)

    def __ge__(self, other):
        other = self._coerce(other)
        return libmp.mpf_ge(self._lo, other._hi)

    def __eq__(self, other):
        if not isinstance(other, CertReal):
            if not _is_scalar(other):
                return NotImplemented
            other = CertReal(other, prec=self.prec + 64)
        return self._lo == other._lo and self._hi == other._hi

    def __hash__(self):
        return hash((self._lo, self._hi))

    def sign(self) -> int | None:
        """+1 or -1 when the sign is certain, 0 for the exact point zero, else None."""
        if libmp.mpf_gt(self._lo, fzero):
            return 1
        if libmp.mpf_lt(self._hi, fzero):
            return -1
        if self._lo == fzero and self._hi == fzero:
            return 0
        return None

    # -------------------------------------------------------- decimal I/O
    def to_decimal_pair(self, digits: int, outward: bool = False) -> tuple[str, str]:
        """Decimal strings for the endpoints with ``digits`` significant digits.

        With ``outward=True`` the lower endpoint is rounded down and the upper
        one up. Otherwise both are rounded to nearest, which reproduces the
        decimals exactly for intervals produced by :meth:`snap_decimal` or
        :meth:`from_decimal_pair` at the same number of digits.
        """
        if outward:
            return _to_decimal(self._lo, digits, "floor"), _to_decimal(self._hi, digits, "ceil")
        return _to_decimal(self._lo, digits, "nearest"), _to_decimal(self._hi, digits, "nearest")

    def snap_decimal(self, digits: int) -> "CertReal":
        """Widen outward so both endpoints are ``digits``-significant decimals."""
        lo, hi = self.to_decimal_pair(digits, outward=True)
        return CertReal.from_decimal_pair(lo, hi, self.prec)

    @classmethod
    def from_decimal_pair(cls, lo: str, hi: str, prec: int) -> "CertReal":
        return cls(lo, hi, prec=prec)


def _is_scalar(value) -> bool:
    return isinstance(value, (int, float, Fraction, str, mpmath.mpf, Decimal)) and not isinstance(value, bool)


def _to_decimal(x, digits: int, mode: str) -> str:
    sign, man, exp, bc = x
    if man == 0:
        return "0"
    num = -int(man) if sign else int(man)
    # value = num * 2**exp; choose a power of ten so the scaled integer has `digits` digits
    e10 = math.floor((exp + bc - 1) * 0.30102999566398120)
    for _ in range(3):
        shift = digits - 1 - e10
        n, d = num, 1
        if exp >= 0:
            n <<= exp
        else:
            d <<= -exp
        if shift >= 0:
            n *= 10 ** shift
        else:
            d *= 10 ** (-shift)
        if mode == "floor":
            q = n // d
        elif mode == "ceil":
            q = -((-n) // d)
        else:
            q = (2 * n + d) // (2 * d)
        ndig = len(str(abs(q)))
        if ndig == digits or (ndig == digits + 1 and abs(q) == 10 ** digits):
            break
        e10 += ndig - digits
    if q == 0:
        return "0"
    while q % 10 == 0:
        q //= 10
        shift -= 1
    # string construction is exact; Decimal arithmetic would round to context
    return str(Decimal(f"{q}E{-shift}"))


# ---------------------------------------------------------------- constants
def _const(fn, prec: int) -> CertReal:
    return CertReal._make(fn(prec, _FLOOR), fn(prec, _CEIL), prec)


def pi(prec: int) -> CertReal:
    return _const(libmp.mpf_pi, prec)


def e(prec: int) -> CertReal:
    return _const(libmp.mpf_e, prec)


def ln2(prec: int) -> CertReal:
    return _const(libmp.mpf_ln2, prec)


def euler_gamma(prec: int) -> CertReal:
    return _const(libmp.mpf_euler, prec)


# ------------------------------------------------------ elementary functions
def as_cert(value, prec: int | None = None) -> CertReal:
    if isinstance(value, CertReal):
        return value
    return CertReal(value, prec=prec)


def exp(x):
    if not isinstance(x, CertReal):
        if hasattr(x, "exp"):
            return x.exp()
        x = as_cert(x)
    lo, hi = libmp.mpi_exp((x._lo, x._hi), x.prec)
    return CertReal._make(lo, hi, x.prec)


def log(x):
    if not isinstance(x, CertReal):
        if hasattr(x, "log"):
            return x.log()
        x = as_cert(x)
    if not libmp.mpf_gt(x._lo, fzero):
        raise DomainError(f"log of an interval reaching {x.lo}")
    lo, hi = libmp.mpi_log((x._lo, x._hi), x.prec)
    return CertReal._make(lo, hi, x.prec)


def sqrt(x):
    if not isinstance(x, CertReal):
        if hasattr(x, "sqrt"):
            return x.sqrt()
        x = as_cert(x)
    if libmp.mpf_lt(x._lo, fzero):
        raise DomainError(f"sqrt of an interval reaching {x.lo}")
    lo, hi = libmp.mpi_sqrt((x._lo, x._hi), x.prec)
    return CertReal._make(lo, hi, x.prec)


def power(x, p):
    """``x**p`` for a real exponent ``p`` and a positive base."""
    if not isinstance(x, CertReal):
        if hasattr(x, "power"):
            return x.power(p)
        x = as_cert(x)
    if isinstance(p, int) and not isinstance(p, bool):
        return x ** p
    if not libmp.mpf_gt(x._lo, fzero):
        raise DomainError("real power of a non-positive interval")
    return exp(log(x) * as_cert(p, x.prec))
