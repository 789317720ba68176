"""Envelope constants for ``pi(x)`` around its five-term expansion.

With ``u = log x``, ``u1 = log x1`` and ``g(u) = (u/u1)^6 e^(u1 - u)``:

    m(u) = 120 - a(u) + C0^ g(u) + (720 - a(u1)) D(u)
    M(u) = 120 + a(u) + C1^ g(u) + (720 + a(u1)) D(u)

where ``Ck^ = Ck u1^6 e^-u1`` and ``D(u) = E^(u) - E^(u1) g(u)``.  The
constants ``m_a``, ``M_a`` are a certified infimum of ``m`` and supremum of
``M`` over ``u >= u1``.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import mpmath
from mpmath import libmp

from .errors import DomainError, TailUnbounded
from .logint import E_of_x, scaled_E_decreasing_certificate, scaled_E_internal
from .numerics import CertReal, PrecisionContext, as_cert, exp, integrate_adaptive, log
from .theta_bound import U_B4, a_eval, a_monotone_certificate, branch_expression, branches

DEFAULT_WINDOW = 200
DEFAULT_GRID_SPAN = 2000
DEFAULT_GRID_STEP = 1
MAX_REFINEMENTS = 400


@dataclass(frozen=True)
class EnvelopeConstants:
    """Bundle ``(u1, a(x1), C0^, C1^, m_a, M_a)``.

    ``m_a`` is ``[certified lower bound, attained value]`` and ``M_a`` is
    ``[attained value, certified upper bound]``: any number in ``m_a`` is a
    valid lower constant only through its ``lo`` end, and dually for ``M_a``.
    Constants injected from elsewhere carry ``source != "computed"`` and
    may leave the intermediate fields empty.
    """

    u1: CertReal
    a_at_x1: CertReal | None
    scaled_C0: CertReal | None
    scaled_C1: CertReal | None
    m_a: CertReal
    M_a: CertReal
    source: str = "computed"
    checks: dict = field(default_factory=dict)

    @classmethod
    def from_values(cls, u1, m_a, M_a, source: str, prec: int | None = None) -> "EnvelopeConstants":
        u1 = as_cert(u1, prec)
        return cls(u1, None, None, None, as_cert(m_a, u1.prec), as_cert(M_a, u1.prec), source)


@dataclass(frozen=True)
class EnvelopeValue:
    u: CertReal
    m_of_u: CertReal
    M_of_u: CertReal


def _scale(u1: CertReal) -> CertReal:
    """``u1^6 e^-u1`` in log form."""
    return exp(6 * log(u1) - u1)


def _integrand(branch_id: str, u1: CertReal, u1_6: CertReal):
    def f(v):
        return branch_expression(branch_id, v, u1.prec) * exp(v - u1) / (v * v) * u1_6
    return f


def _box(f, lo: CertReal, hi: CertReal) -> CertReal:
    """Enclosure of the integral of ``f`` over ``[lo, hi]`` from one box evaluation."""
    box = CertReal.hull(lo, hi)
    return f(box) * (hi - lo)


def _piece(f, lo: CertReal, hi: CertReal, tol, window, ctx: PrecisionContext) -> CertReal:
    """``int_lo^hi f`` for a positive integrand growing like ``e^v``.

    Only the top ``window`` log-units go through quadrature; the rest is
    enclosed by a single box evaluation once that is below ``tol / 100``.
    """
    limit = (CertReal(tol, prec=hi.prec) / 100).lo
    whole = _box(f, lo, hi)
    if whole.hi <= limit:
        return whole
    w = window
    while True:
        cut = CertReal(math.floor(hi.lo) - w, prec=hi.prec)
        if not cut > lo:
            return integrate_adaptive(f, lo, hi, tol, ctx)
        discarded = _box(f, lo, cut)
        if discarded.hi <= limit:
            return integrate_adaptive(f, cut, hi, tol, ctx) + discarded
        w *= 2


def scaled_a_integral(u1, tol=None, ctx: PrecisionContext | None = None,
                      window: int = DEFAULT_WINDOW) -> CertReal:
    """``S_a = u1^6 e^-u1 int_2^x1 a(t)/log^7 t dt``, split by branch in log space."""
    ctx = ctx or PrecisionContext()
    u1 = as_cert(u1, ctx.prec)
    tol = ctx.default_tolerance if tol is None else tol
    u1_6 = u1 ** 6
    total = CertReal(0, prec=ctx.prec)
    for spec in branches(ctx.prec):
        lo = spec.u_lo
        hi = u1 if spec.u_hi is None else spec.u_hi
        if not lo < u1:
            break
        if hi.hi > u1.lo:
            hi = u1
        total = total + _piece(_integrand(spec.id, u1, u1_6), lo, hi, tol, window, ctx)
    return total


def _subtraction_constant(prec: int) -> CertReal:
    """``2 sum_{k=1}^5 k!/log^(k+1) 2``."""
    l2 = log(CertReal(2, prec=prec))
    return 2 * sum((math.factorial(k) / l2 ** (k + 1) for k in range(1, 6)), CertReal(0, prec=prec))


def scaled_C(u1, sign: str, tol=None, ctx: PrecisionContext | None = None,
             window: int = DEFAULT_WINDOW, a_integral: CertReal | None = None) -> CertReal:
    """``(u1^6 e^-u1) C_sign`` with ``sign`` in ``{"plus", "minus"}`` (C1, C0)."""
    ctx = ctx or PrecisionContext()
    u1 = as_cert(u1, ctx.prec)
    if not u1 >= U_B4:
        raise DomainError(f"scaled_C needs u1 >= {U_B4}")
    if sign not in ("plus", "minus"):
        raise DomainError("sign must be 'plus' or 'minus'")
    scale = _scale(u1)
    e_part = 720 * (scaled_E_internal(u1, None, ctx) - E_of_x(2, None, ctx) * scale)
    s_a = scaled_a_integral(u1, tol, ctx, window) if a_integral is None else a_integral
    tail = _subtraction_constant(ctx.prec) * scale
    return e_part + s_a - tail if sign == "plus" else e_part - s_a - tail


def _g(u: CertReal, u1: CertReal) -> CertReal:
    return (u / u1) ** 6 * exp(u1 - u)


def envelope_at(u, env: EnvelopeConstants, tol=None, ctx: PrecisionContext | None = None,
                e_u1: CertReal | None = None) -> EnvelopeValue:
    ctx = ctx or PrecisionContext()
    u = as_cert(u, ctx.prec)
    if u.lo < env.u1.lo:
        raise DomainError("envelope_at needs u >= u1")
    if env.scaled_C0 is None:
        raise DomainError("these envelope constants carry no intermediate values")
    e1 = scaled_E_internal(env.u1, tol, ctx) if e_u1 is None else e_u1
    g = _g(u, env.u1)
    d = scaled_E_internal(u, tol, ctx) - e1 * g
    a = a_eval(u)
    m = 120 - a + env.scaled_C0 * g + (720 - env.a_at_x1) * d
    big = 120 + a + env.scaled_C1 * g + (720 + env.a_at_x1) * d
    return EnvelopeValue(u, m, big)


class _Scan:
    """Cell bounds for ``m`` and ``M`` from endpoint monotonicity of each term."""

    def __init__(self, u1, a1, c0, c1, e1, tol, ctx):
        self.u1, self.a1, self.c0, self.c1, self.e1 = u1, a1, c0, c1, e1
        self.tol, self.ctx = tol, ctx
        self._cache = {}

    def point(self, u: CertReal):
        key = (u._lo, u._hi)
        if key not in self._cache:
            e = scaled_E_internal(u, self.tol, self.ctx)
            g = _g(u, self.u1)
            self._cache[key] = (a_eval(u), g, e)
        return self._cache[key]

    def values_at(self, u: CertReal):
        a, g, e = self.point(u)
        d = e - self.e1 * g
        m = 120 - a + self.c0 * g + (720 - self.a1) * d
        big = 120 + a + self.c1 * g + (720 + self.a1) * d
        return m, big

    def cell(self, ua: CertReal, ub: CertReal):
        # a, g and E^ all decrease on [ua, ub]
        a_a, g_a, e_a = self.point(ua)
        a_b, g_b, e_b = self.point(ub)
        a = CertReal.hull(a_a, a_b)
        g = CertReal.hull(g_a, g_b)
        # D = E^(u) - E^(u1) g(u) with each piece monotone; D >= 0 on u >= u1
        d_lo = (e_b.lower() - (self.e1 * g_a).upper()).lo
        d_hi = (e_a.upper() - (self.e1 * g_b).lower()).hi
        d = CertReal(max(d_lo, 0), max(d_hi, 0), prec=ua.prec)
        m = 120 - a + self.c0 * g + (720 - self.a1) * d
        big = 120 + a + self.c1 * g + (720 + self.a1) * d
        return m, big


def _extreme(scan: _Scan, grid, tail, pick: int, tol):
    """Certified extreme of ``m`` (``pick = 0``) or ``M`` (``pick = 1``).

    Returns ``(bound, attained)``: for ``m`` a certified lower bound and the
    smallest value attained at a sample point, for ``M`` the reverse.
    """
    sgn = 1 if pick == 0 else -1

    def key(value: CertReal):
        # negate through CertReal: plain mpf arithmetic rounds to 53 bits
        return value.lo if pick == 0 else (-value).lo

    attained = None
    heap = []
    for i, (ua, ub) in enumerate(zip(grid, grid[1:])):
        v = scan.cell(ua, ub)[pick]
        heap.append((key(v), i, ua, ub, v))
    for u in grid:
        v = scan.values_at(u)[pick]
        cand = v.hi if pick == 0 else v.lo
        if attained is None or sgn * cand < sgn * attained:
            attained = cand
    heapq.heapify(heap)
    counter = len(heap)
    tail_bound = tail.lo if pick == 0 else tail.hi
    tol = CertReal(tol).lo
    for _ in range(MAX_REFINEMENTS):
        worst = heap[0][4]
        cell_bound = worst.lo if pick == 0 else worst.hi
        if sgn * tail_bound <= sgn * cell_bound:
            break
        if abs(attained - cell_bound) <= tol * max(1, abs(attained)):
            break
        _, _, ua, ub, _ = heapq.heappop(heap)
        mid = libmp.mpf_shift(libmp.mpf_add(ua._lo, ub._hi, 0), -1)
        um = CertReal._make(mid, mid, ua.prec)
        vm = scan.values_at(um)[pick]
        cand = vm.hi if pick == 0 else vm.lo
        if sgn * cand < sgn * attained:
            attained = cand
        for lo_, hi_ in ((ua, um), (um, ub)):
            v = scan.cell(lo_, hi_)[pick]
            counter += 1
            heapq.heappush(heap, (key(v), counter, lo_, hi_, v))
    # explicit reduction over every cell, independent of heap order
    if pick == 0:
        bound = min([item[4].lo for item in heap] + [tail_bound])
    else:
        bound = max([item[4].hi for item in heap] + [tail_bound])
    return bound, attained


def envelope_constants(u1, tol=None, ctx: PrecisionContext | None = None,
                       grid_span: int = DEFAULT_GRID_SPAN, grid_step: int = DEFAULT_GRID_STEP,
                       window: int = DEFAULT_WINDOW) -> EnvelopeConstants:
    """Certified ``m_a = inf m(u)`` and ``M_a = sup M(u)`` over ``u >= u1``.

    The scan covers ``[u1, u1 + grid_span]`` cell by cell and bisects the
    cells that hold the running optimum; beyond the grid every term is
    bounded by its value at the grid end.
    """
    ctx = ctx or PrecisionContext()
    u1 = as_cert(u1, ctx.prec)
    tol = ctx.default_tolerance if tol is None else tol
    if not u1 >= U_B4:
        raise DomainError(f"envelope constants need u1 >= {U_B4}")
    a1 = a_eval(u1)
    s_a = scaled_a_integral(u1, tol, ctx, window)
    c0 = scaled_C(u1, "minus", tol, ctx, window, a_integral=s_a)
    c1 = scaled_C(u1, "plus", tol, ctx, window, a_integral=s_a)
    e1 = scaled_E_internal(u1, None, ctx)

    checks = {
        "a_decreasing_from_u1": a_monotone_certificate(u1),
        "scaled_E_decreasing_from_u1": scaled_E_decreasing_certificate(u1, ctx),
    }
    if not all(checks.values()):
        raise TailUnbounded(f"monotonicity certificate failed: {checks}")

    grid = [u1 + i * grid_step for i in range(grid_span // grid_step + 1)]
    scan = _Scan(u1, a1, c0, c1, e1, None, ctx)

    # beyond the grid end: 0 <= a <= a(uT), 0 <= g <= g(uT), 0 <= D <= E^(uT)
    u_t = grid[-1]
    a_t, g_t, e_t = scan.point(u_t)
    if not (u_t > 6 and e_t.lo > 0 and a_t.lo > 0):
        raise TailUnbounded("tail terms are not certified monotone beyond the grid")
    a_rng = CertReal(0, a_t.hi, prec=ctx.prec)
    g_rng = CertReal(0, g_t.hi, prec=ctx.prec)
    d_rng = CertReal(0, e_t.hi, prec=ctx.prec)
    m_tail = 120 - a_rng + c0 * g_rng + (720 - a1) * d_rng
    big_tail = 120 + a_rng + c1 * g_rng + (720 + a1) * d_rng
    checks["tail_beyond_grid"] = True

    m_bound, m_att = _extreme(scan, grid, m_tail, 0, tol)
    big_bound, big_att = _extreme(scan, grid, big_tail, 1, tol)
    return EnvelopeConstants(
        u1=u1,
        a_at_x1=a1,
        scaled_C0=c0,
        scaled_C1=c1,
        m_a=CertReal(m_bound, m_att, prec=ctx.prec),
        M_a=CertReal(big_att, big_bound, prec=ctx.prec),
        checks=checks,
    )
