"""Certified adaptive quadrature by interval Taylor models.

Each panel ``[c - h, c + h]`` is integrated from the Taylor expansion of
the integrand at the midpoint ``c`` (odd order ``N``, so only the even
coefficients contribute) plus a Lagrange remainder whose coefficient is
enclosed by expanding the integrand over the whole panel:

    int f = sum_{k even < N} 2 f_k(c) h^(k+1)/(k+1) + F_{N+1}(panel) * 2 h^(N+2)/(N+2)

``N + 1`` is even, so ``t^(N+1) >= 0`` and the remainder integral is the
plain product above.  Panels are split by largest enclosure width until
the total width meets the tolerance.
"""

from __future__ import annotations

import heapq
from typing import Callable

from mpmath import libmp

from ..errors import DomainError, NonConvergence
from .interval import CertReal, PrecisionContext
from .taylor import Series

DEFAULT_ORDER = 23


def _panel(f, a, b, order: int, prec: int) -> CertReal:
    """Enclosure of the integral of ``f`` over the exact binary panel ``[a, b]``."""
    c_raw = libmp.mpf_shift(libmp.mpf_add(a, b, 0), -1)
    h_raw = libmp.mpf_shift(libmp.mpf_sub(b, a, 0), -1)
    c = CertReal._make(c_raw, c_raw, prec)
    h = CertReal._make(h_raw, h_raw, prec)
    box = CertReal._make(a, b, prec)

    at_mid = _as_series(f(Series.variable(c, order)), order, prec)
    over_box = _as_series(f(Series.variable(box, order + 1)), order + 1, prec)

    total = CertReal(0, prec=prec)
    hk1 = h
    for k in range(0, order, 2):
        total = total + at_mid.coeff(k) * hk1 * 2 / (k + 1)
        hk1 = hk1 * h * h
    # hk1 == h**(order + 2) here because order is odd
    remainder = over_box.coeff(order + 1) * hk1 * 2 / (order + 2)
    return total + remainder


def _as_series(value, order: int, prec: int) -> Series:
    if isinstance(value, Series):
        return value
    if isinstance(value, CertReal) or isinstance(value, (int, float)):
        # constant integrand
        return Series.variable(CertReal(0, prec=prec), order) * 0 + value
    raise DomainError(f"integrand returned {type(value).__name__}, expected an enclosure")


def _endpoint_sliver(f, x: CertReal, prec: int) -> CertReal:
    """Integral over a sub-interval of the endpoint enclosure ``x``: in ``[0, w] * f(x)``."""
    if x.is_point():
        return CertReal(0, prec=prec)
    fx = f(x)
    if not isinstance(fx, CertReal):
        fx = CertReal(fx, prec=prec)
    return CertReal(0, x.width, prec=prec) * fx


def integrate_adaptive(
    f: Callable,
    lo: CertReal,
    hi: CertReal,
    tol=None,
    ctx: PrecisionContext | None = None,
    order: int = DEFAULT_ORDER,
) -> CertReal:
    """Certified enclosure of ``int_lo^hi f(t) dt``.

    ``f`` must be built from arithmetic and the elementary functions of
    :mod:`ramanujan_cert.numerics` so that it accepts :class:`Series` as
    well as :class:`CertReal` arguments. The result has width at most
    ``tol * max(1, |result|)``, or twice the width forced by interval
    limits when that is larger.
    """
    ctx = ctx or PrecisionContext()
    prec = max(ctx.prec, lo.prec, hi.prec)
    tol = ctx.default_tolerance if tol is None else tol
    if order % 2 == 0:
        order += 1
    if not lo.is_point() or not hi.is_point():
        if libmp.mpf_gt(lo._hi, hi._lo):
            raise DomainError("integration limits overlap")
    a0, b0 = lo._hi, hi._lo
    if libmp.mpf_gt(a0, b0):
        raise DomainError("integration requires lo <= hi")

    # int_l^h = int_a0^b0 + int_l^a0 + int_b0^h for l in lo, h in hi
    edges = _endpoint_sliver(f, lo, prec) + _endpoint_sliver(f, hi, prec)
    if a0 == b0:
        return edges

    tol_c = CertReal(tol, prec=prec)
    counter = 0
    first = _panel(f, a0, b0, order, prec)
    heap = [(-float(first.width), counter, a0, b0, 0, first)]
    while True:
        interior = CertReal(0, prec=prec)
        for item in heap:
            interior = interior + item[5]
        total = edges + interior
        target = tol_c * max(1, total.mig())
        if total.width <= target.lo:
            return total
        # slivers wider than the target cannot be refined away; match them instead
        if edges.width >= target.lo and interior.width <= edges.width:
            return total
        _, _, a, b, depth, _ = heapq.heappop(heap)
        if depth >= ctx.max_quadrature_depth:
            raise NonConvergence(
                f"quadrature depth budget {ctx.max_quadrature_depth} exhausted "
                f"(width {float(total.width):.3e}, target {float(target.lo):.3e})"
            )
        m = libmp.mpf_shift(libmp.mpf_add(a, b, 0), -1)
        for lo_, hi_ in ((a, m), (m, b)):
            piece = _panel(f, lo_, hi_, order, prec)
            counter += 1
            heapq.heappush(heap, (-float(piece.width), counter, lo_, hi_, depth + 1, piece))
