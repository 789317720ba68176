"""Bisection with certified sign decisions."""

from __future__ import annotations

from typing import Callable

from mpmath import libmp

from ..errors import NoSignChange
from .interval import CertReal, PrecisionContext, as_cert


def _sign(f, x: CertReal):
    value = f(x)
    return as_cert(value, x.prec).sign()


def find_root_bisect(f: Callable, lo, hi, tol=None, ctx: PrecisionContext | None = None) -> CertReal:
    """Enclosure ``[a, b]`` with certified ``sign f(a) != sign f(b)``.

    Bisection points are exact binary midpoints, so runs at different
    precisions walk the same grid. When the sign at a midpoint cannot be
    certified the bracket is returned as is; its width then reflects the
    precision of ``f`` rather than ``tol``.
    """
    ctx = ctx or PrecisionContext()
    tol = ctx.default_tolerance if tol is None else tol
    prec = ctx.prec
    lo = as_cert(lo, prec).lower()
    hi = as_cert(hi, prec).upper()
    s_lo, s_hi = _sign(f, lo), _sign(f, hi)
    if s_lo == 0:
        return lo
    if s_hi == 0:
        return hi
    if s_lo is None or s_hi is None or s_lo == s_hi:
        raise NoSignChange(f"no certified sign change on [{lo.format(12)}, {hi.format(12)}]")
    a, b = lo._lo, hi._hi
    tol_raw = CertReal(tol, prec=prec)._lo
    while libmp.mpf_gt(libmp.mpf_sub(b, a, 0), tol_raw):
        m = libmp.mpf_shift(libmp.mpf_add(a, b, 0), -1)
        s_m = _sign(f, CertReal._make(m, m, prec))
        if s_m is None:
            break
        if s_m == 0:
            return CertReal._make(m, m, prec)
        if s_m == s_lo:
            a = m
        else:
            b = m
    return CertReal._make(a, b, prec)
