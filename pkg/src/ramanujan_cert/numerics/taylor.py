"""Truncated Taylor series with interval coefficients.

``Series`` objects flow through the same integrand code as plain
:class:`CertReal` values: the elementary functions in
:mod:`.interval` dispatch on them.  Coefficient ``k`` is the normalized
derivative ``f^(k)(t0) / k!``.  When the expansion point is itself an
interval, coefficient ``k`` encloses ``f^(k)(xi) / k!`` for every ``xi`` in
it, which is what the quadrature remainder needs.
"""

from __future__ import annotations

from fractions import Fraction

from mpmath import libmp
from mpmath.libmp import fzero, round_ceiling, round_floor

from ..errors import DomainError
from .interval import CertReal, _is_scalar, _raw

_ZERO = (fzero, fzero)


def _pair(value, prec):
    if isinstance(value, CertReal):
        return (value._lo, value._hi)
    return (_raw(value, prec, round_floor), _raw(value, prec, round_ceiling))


def _int_pair(k):
    v = libmp.from_int(k)
    return (v, v)


def _check(pair):
    lo, hi = pair
    if lo in (libmp.finf, libmp.fninf, libmp.fnan) or hi in (libmp.finf, libmp.fninf, libmp.fnan):
        raise DomainError("series coefficient is not finite")
    return pair


class Series:
    __slots__ = ("c", "prec")

    def __init__(self, coeffs, prec: int):
        self.c = list(coeffs)
        self.prec = prec

    @classmethod
    def variable(cls, point: CertReal, order: int) -> "Series":
        coeffs = [_pair(point, point.prec)]
        if order >= 1:
            coeffs.append(_int_pair(1))
        coeffs.extend([_ZERO] * (order - 1))
        return cls(coeffs, point.prec)

    @property
    def order(self) -> int:
        return len(self.c) - 1

    def coeff(self, k: int) -> CertReal:
        lo, hi = self.c[k]
        return CertReal._make(lo, hi, self.prec)

    def _lift(self, other) -> "Series":
        if isinstance(other, Series):
            return other
        if isinstance(other, CertReal) or _is_scalar(other):
            return Series([_pair(other, self.prec)] + [_ZERO] * self.order, self.prec)
        return NotImplemented

    # ----------------------------------------------------------------- ring
    def __add__(self, other):
        if not isinstance(other, Series):
            if not (isinstance(other, CertReal) or _is_scalar(other)):
                return NotImplemented
            c = list(self.c)
            c[0] = libmp.mpi_add(c[0], _pair(other, self.prec), self.prec)
            return Series(c, self.prec)
        p = self.prec
        return Series([libmp.mpi_add(a, b, p) for a, b in zip(self.c, other.c)], p)

    __radd__ = __add__

    def __neg__(self):
        return Series([libmp.mpi_neg(a) for a in self.c], self.prec)

    def __sub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        p = self.prec
        return Series([libmp.mpi_sub(a, b, p) for a, b in zip(self.c, other.c)], p)

    def __rsub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return other - self

    def __mul__(self, other):
        p = self.prec
        if not isinstance(other, Series):
            if not (isinstance(other, CertReal) or _is_scalar(other)):
                return NotImplemented
            s = _pair(other, p)
            return Series([libmp.mpi_mul(a, s, p) for a in self.c], p)
        a, b = self.c, other.c
        n = len(a)
        out = []
        for k in range(n):
            acc = _ZERO
            for j in range(k + 1):
                acc = libmp.mpi_add(acc, libmp.mpi_mul(a[j], b[k - j], p), p)
            out.append(acc)
        return Series(out, p)

    __rmul__ = __mul__

    def __truediv__(self, other):
        p = self.prec
        if not isinstance(other, Series):
            if not (isinstance(other, CertReal) or _is_scalar(other)):
                return NotImplemented
            s = _pair(other, p)
            if libmp.mpf_le(s[0], fzero) and libmp.mpf_ge(s[1], fzero):
                raise DomainError("series division by an interval containing zero")
            return Series([_check(libmp.mpi_div(a, s, p)) for a in self.c], p)
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        lifted = self._lift(other)
        if lifted is NotImplemented:
            return lifted
        return lifted * self.reciprocal()

    def reciprocal(self) -> "Series":
        p = self.prec
        b = self.c
        b0 = b[0]
        if libmp.mpf_le(b0[0], fzero) and libmp.mpf_ge(b0[1], fzero):
            raise DomainError("series reciprocal of an interval containing zero")
        q = [_check(libmp.mpi_div(_int_pair(1), b0, p))]
        for k in range(1, len(b)):
            acc = _ZERO
            for j in range(1, k + 1):
                acc = libmp.mpi_add(acc, libmp.mpi_mul(b[j], q[k - j], p), p)
            q.append(_check(libmp.mpi_div(libmp.mpi_neg(acc), b0, p)))
        return Series(q, p)

    def __pow__(self, exponent):
        if isinstance(exponent, int) and not isinstance(exponent, bool):
            if exponent < 0:
                return (self ** (-exponent)).reciprocal()
            result = self._lift(1)
            base = self
            while exponent:
                if exponent & 1:
                    result = result * base
                exponent >>= 1
                if exponent:
                    base = base * base
            return result
        return self.power(exponent)

    # ------------------------------------------------- elementary functions
    def exp(self) -> "Series":
        p = self.prec
        a = self.c
        out = [_check(libmp.mpi_exp(a[0], p))]
        for k in range(1, len(a)):
            acc = _ZERO
            for j in range(1, k + 1):
                term = libmp.mpi_mul(a[j], out[k - j], p)
                if j != 1:
                    term = libmp.mpi_mul(term, _int_pair(j), p)
                acc = libmp.mpi_add(acc, term, p)
            out.append(libmp.mpi_div(acc, _int_pair(k), p))
        return Series(out, p)

    def log(self) -> "Series":
        p = self.prec
        a = self.c
        a0 = a[0]
        if not libmp.mpf_gt(a0[0], fzero):
            raise DomainError("series log of an interval reaching zero")
        out = [libmp.mpi_log(a0, p)]
        for k in range(1, len(a)):
            acc = _ZERO
            for j in range(1, k):
                term = libmp.mpi_mul(libmp.mpi_mul(out[j], a[k - j], p), _int_pair(j), p)
                acc = libmp.mpi_add(acc, term, p)
            acc = libmp.mpi_div(acc, _int_pair(k), p)
            out.append(libmp.mpi_div(libmp.mpi_sub(a[k], acc, p), a0, p))
        return Series(out, p)

    def power(self, exponent) -> "Series":
        """Real power; the constant coefficient must be positive."""
        if isinstance(exponent, int) and not isinstance(exponent, bool):
            return self ** exponent
        p = self.prec
        a = self.c
        a0 = a[0]
        if not libmp.mpf_gt(a0[0], fzero):
            raise DomainError("series power of an interval reaching zero")
        r = _pair(exponent, p)
        r1 = libmp.mpi_add(r, _int_pair(1), p)
        y0 = libmp.mpi_exp(libmp.mpi_mul(r, libmp.mpi_log(a0, p), p), p)
        out = [y0]
        for k in range(1, len(a)):
            acc = _ZERO
            for j in range(1, k + 1):
                w = libmp.mpi_sub(libmp.mpi_mul(r1, _int_pair(j), p), _int_pair(k), p)
                acc = libmp.mpi_add(acc, libmp.mpi_mul(w, libmp.mpi_mul(a[j], out[k - j], p), p), p)
            out.append(libmp.mpi_div(acc, libmp.mpi_mul(_int_pair(k), a0, p), p))
        return Series(out, p)

    def sqrt(self) -> "Series":
        return self.power(Fraction(1, 2))
