"""Logarithmic integral and the remainder of its six-term expansion.

``E(x) = (li(x) - x sum_{k=0}^{5} k!/log^{k+1} x) / 720`` and its scale-free
form ``E^(u) = E(e^u) u^6 e^-u = sum_{k>=6} k!/(720 u^(k-5))`` (asymptotically).

Remainder of the truncated series for ``E^``.  Write ``c_j = (j+6)!/720``
(so ``E^ = sum_j c_j u^-(j+1)``) and ``F_n(v) = e^v sum_{j<n} c_j v^(-7-j)``.
Repeated integration by parts of ``int dt/log^7 t`` gives, for ``v0 < u``,

    E^(u) - S_n(u) = u^6 e^-u [ (E - F_n)(v0) + c_n int_v0^u e^v v^(-7-n) dv ].

The integral is split at ``t0 = u/2``: on ``[t0, u]`` the integrand is
bounded by a geometric series in ``(n+7)/v`` (the ``T/(1 - (n+7)/t0)``
term below, ``T`` the first omitted term), and on ``[v0, t0]`` by the
length times the larger endpoint value (``e^v v^-m`` is convex, so its max
sits at an endpoint).  ``v0 = 50`` is where ``(E - F_n)(v0)`` is evaluated
exactly through ``Ei``.  With ``n + 7 <= u/4`` the whole remainder lies in
``[0, 2T]`` up to the exponentially small pieces, which is the
first-omitted-term rule made rigorous.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import islice

import mpmath

from .errors import DivergenceAtArgument, DomainError
from .numerics import CertReal, PrecisionContext, as_cert, euler_gamma, exp, log
from .numerics.asymptotic import truncated_sum

V0 = 50
ASYMPTOTIC_U = 400
MIN_SERIES_U = 100
MAX_LI_X = 10**300


@dataclass(frozen=True)
class ScaledE:
    u: CertReal
    value: CertReal


def _tol(ctx: PrecisionContext, tol):
    if tol is not None:
        return tol
    # the scaled remainder is cheap, so resolve it well past the default
    return Fraction(1, 10 ** (ctx.digits - 8))


def ei(u: CertReal) -> CertReal:
    """Exponential integral ``Ei(u)`` for real ``u != 0`` by its entire series.

    ``Ei(u) = gamma + log|u| + sum_{k>=1} u^k/(k k!)``.  Once ``|u|/(K+2) <= 1/2``
    the tail after term ``K`` is at most twice the next term.
    """
    if u.contains(0):
        raise DomainError("Ei is singular at 0")
    mag = float(u.mag())
    # alternating terms for u < 0 grow to about e^|u| before cancelling
    guard = int(1.45 * mag) + 20 if u.hi < 0 else 20
    prec = u.prec + guard
    w = u.with_prec(prec)
    total = euler_gamma(prec) + log(abs(w))
    term = CertReal(1, prec=prec)
    k = 0
    while True:
        k += 1
        term = term * w / k
        piece = term / k
        total = total + piece
        if k + 2 >= 2 * mag and piece.mag() <= mpmath.ldexp(total.mig(), -prec):
            nxt = abs(term * w / (k + 1) / (k + 1)).upper()
            total = total + CertReal(-2 * nxt, 2 * nxt)
            break
    return total.with_prec(u.prec)


def _x_and_u(x, prec):
    if isinstance(x, CertReal):
        xc = x
    else:
        if isinstance(x, bool):
            raise TypeError("x must be a number")
        if x == 0:
            return None, None
        xc = CertReal(x, prec=prec)
    if xc.lo < 0:
        raise DomainError("li is defined here for x > 0 only")
    if xc.contains(1):
        raise DomainError("li(x) is singular at x = 1")
    if xc.hi > MAX_LI_X:
        raise DomainError("x exceeds 1e300; use the scaled forms in log space")
    if xc.hi == 0:
        return None, None
    return xc, log(xc)


def li(x, tol=None, ctx: PrecisionContext | None = None) -> CertReal:
    """Principal-value logarithmic integral ``int_0^x dt/log t``."""
    ctx = ctx or PrecisionContext()
    xc, u = _x_and_u(x, ctx.prec)
    if xc is None:
        return CertReal(0, prec=ctx.prec)
    if u.lo >= ASYMPTOTIC_U:
        head = CertReal(0, prec=ctx.prec)
        for k in range(6):
            head = head + math.factorial(k) / u ** (k + 1)
        tail = 720 * scaled_E_internal(u, tol, ctx) / u ** 6
        return xc * (head + tail)
    return ei(u)


def E_of_x(x, tol=None, ctx: PrecisionContext | None = None) -> CertReal:
    """``E(x)`` for representable ``x`` (``2 <= x <= 1e300``)."""
    ctx = ctx or PrecisionContext()
    xc, u = _x_and_u(x, ctx.prec)
    if xc is None or not xc >= 2:
        raise DomainError("E(x) needs x >= 2")
    head = CertReal(0, prec=ctx.prec)
    for k in range(6):
        head = head + math.factorial(k) / u ** (k + 1)
    return (li(xc, tol, ctx) - xc * head) / 720


@lru_cache(maxsize=16)
def _anchor_parts(prec: int):
    """``E(e^v0) e^-v0`` and ``1/v0`` at ``v0 = 50``, enclosed through ``Ei``."""
    v0 = CertReal(V0, prec=prec + 40)
    head = CertReal(0, prec=prec + 40)
    for k in range(6):
        head = head + math.factorial(k) / v0 ** (k + 1)
    e_scaled = (ei(v0) * exp(-v0) - head) / 720
    return e_scaled.with_prec(prec)


def _scaled_terms():
    """``(k)!/720`` for ``k = 6, 7, ...`` (the coefficient of ``u^-(k-5)``)."""
    c = 1
    j = 0
    while True:
        yield c
        c *= j + 7
        j += 1


def scaled_E_internal(u, tol=None, ctx: PrecisionContext | None = None) -> CertReal:
    """Enclosure of ``E^(u)`` for ``u >= 100`` (the series is certified there)."""
    ctx = ctx or PrecisionContext()
    u = as_cert(u, ctx.prec)
    if not u >= MIN_SERIES_U:
        raise DomainError(f"the scaled remainder series is certified for u >= {MIN_SERIES_U}")
    prec = max(ctx.prec, u.prec)
    tol = _tol(ctx, tol)
    # the remainder bound below needs n + 7 <= u/4; below the smallest term anyway
    cap = int(u.lo) // 4 - 7
    if cap < 1:
        raise DivergenceAtArgument(f"no certified truncation of the series at u = {u.format(10)}")
    summed = truncated_sum(islice(_scaled_terms(), cap + 1), u, tol, start_power=1)
    if summed.first_omitted is None:
        # tolerance not reached within the cap: keep ``cap`` terms
        partial = summed.partial - Fraction(math.factorial(cap + 6), 720) / u ** (cap + 1)
        n, first = cap, (Fraction(math.factorial(cap + 6), 720) / u ** (cap + 1)).upper()
    else:
        partial, n, first = summed.partial, summed.terms_used, summed.first_omitted.upper()
    t0 = u / 2
    c_n = Fraction(math.factorial(n + 6), 720)
    m = 7 + n
    # u^6 e^-u e^v v^-m at the split points, kept in log form
    def scaled_g(v):
        return exp(6 * log(u) - u + v - m * log(v))

    v0 = CertReal(V0, prec=prec)
    near = first / (1 - (n + 7) / t0)
    far = c_n * (t0 - v0) * CertReal.hull(scaled_g(v0), scaled_g(t0))
    b_hi = (near + far).hi

    # (E - F_n)(v0), scaled by u^6 e^-u
    f_sum = CertReal(0, prec=prec)
    c = 1
    for j in range(n):
        f_sum = f_sum + Fraction(c) / v0 ** (7 + j)
        c *= j + 7
    anchor = (_anchor_parts(prec) - f_sum) * exp(6 * log(u) - u + v0)
    return partial + CertReal(0, b_hi, prec=prec) + anchor


def scaled_E(u, tol=None, ctx: PrecisionContext | None = None) -> ScaledE:
    """``E^(u) = E(e^u) u^6 e^-u`` on the large regime ``u >= 673``."""
    ctx = ctx or PrecisionContext()
    u = as_cert(u, ctx.prec)
    if not u >= 673:
        raise DomainError("scaled_E is provided for u >= 673")
    return ScaledE(u, scaled_E_internal(u, tol, ctx))


def scaled_E_diff(u, u1, tol=None, ctx: PrecisionContext | None = None,
                  e_u1: CertReal | None = None) -> CertReal:
    """``(E(x) - E(x1)) log^6 x / x = E^(u) - E^(u1) (u/u1)^6 e^(u1 - u)``."""
    ctx = ctx or PrecisionContext()
    u = as_cert(u, ctx.prec)
    u1 = as_cert(u1, ctx.prec)
    if u.hi < u1.lo:
        raise DomainError("scaled_E_diff needs u >= u1")
    if u == u1 and u.is_point():
        return CertReal(0, prec=ctx.prec)
    e1 = scaled_E_internal(u1, tol, ctx) if e_u1 is None else e_u1
    return scaled_E_internal(u, tol, ctx) - e1 * (u / u1) ** 6 * exp(u1 - u)


def scaled_E_decreasing_certificate(u, ctx: PrecisionContext | None = None) -> bool:
    """Certify that ``E^`` is strictly decreasing on ``[u, inf)``.

    ``d E^/du = E^ (6/u - 1) + 1/u``, negative iff ``E^ > 1/(u - 6)``.  The
    remainder after two terms is non-negative up to the anchor piece, so
    ``E^ >= 1/u + 7/u^2 - |anchor|`` and ``(1/u + 7/u^2)(u - 6) - 1 =
    (u - 42)/u^2``; the check below confirms the margin at ``u``, and the
    margin only grows relative to the anchor piece (``~ u^6 e^-u``) as
    ``u`` increases.
    """
    ctx = ctx or PrecisionContext()
    u = as_cert(u, ctx.prec)
    if not u >= MIN_SERIES_U:
        raise DomainError(f"the certificate is provided for u >= {MIN_SERIES_U}")
    prec = max(ctx.prec, u.prec)
    v0 = CertReal(V0, prec=prec)
    anchor = abs(_anchor_parts(prec) * exp(6 * log(u) - u + v0)).upper()
    lower = 1 / u + 7 / u ** 2 - anchor
    return bool(lower > 1 / (u - 6))
