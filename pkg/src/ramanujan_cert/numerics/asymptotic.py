"""Summation of divergent asymptotic series ``sum_k c_k / u^(k + start)``."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from ..errors import DivergenceAtArgument, DomainError, NonConvergence
from .interval import CertReal, PrecisionContext, as_cert

MAX_TERMS = 100_000


@dataclass(frozen=True)
class AsymptoticSum:
    partial: CertReal
    terms_used: int
    first_omitted: CertReal | None

    def enclosure(self, safety: int = 2) -> CertReal:
        if self.first_omitted is None:
            return self.partial
        r = abs(self.first_omitted).upper() * safety
        return self.partial + CertReal(-r, r)


def truncated_sum(coeffs: Iterable, u: CertReal, tol, start_power: int = 0) -> AsymptoticSum:
    """Partial sum stopped at the tolerance or just before the smallest term.

    The first omitted term is either the first one below ``tol`` relative to
    the running sum, or the smallest term of the series when the tolerance
    cannot be met; terms past the smallest one are never used.
    """
    u = as_cert(u)
    if not u > 0:
        raise DomainError("asymptotic sums need u > 0")
    inv_u = 1 / u
    scale = inv_u ** start_power if start_power else CertReal(1, prec=u.prec)
    tol = CertReal(tol, prec=u.prec)

    it = iter(coeffs)
    try:
        current = scale * next(it)
    except StopIteration:
        return AsymptoticSum(CertReal(0, prec=u.prec), 0, None)
    scale = scale * inv_u
    total = CertReal(0, prec=u.prec)
    k = 0
    while True:
        try:
            following = scale * next(it)
        except StopIteration:
            return AsymptoticSum(total + current, k + 1, None)
        scale = scale * inv_u
        if k == 0 and not abs(following).hi < abs(current).lo:
            raise DivergenceAtArgument(
                f"series terms do not decrease at u = {u.format(10)}"
            )
        if abs(following).hi >= abs(current).lo:
            # `current` is (up to rounding) the smallest term
            return AsymptoticSum(total, k, current)
        if abs(current).hi <= (tol * abs(total)).lo and k > 0:
            return AsymptoticSum(total, k, current)
        total = total + current
        current = following
        k += 1
        if k > MAX_TERMS:
            raise NonConvergence("asymptotic series did not reach its smallest term")


def sum_asymptotic(coeffs: Iterable, u, tol=None, start_power: int = 0,
                   ctx: PrecisionContext | None = None) -> CertReal:
    """Enclosure of ``sum_k c_k u^-(k+start_power)`` with the first-omitted-term x 2 rule.

    Only valid where that rule is a proven remainder bound for the series at
    hand; callers document why it holds for their coefficient stream.
    """
    ctx = ctx or PrecisionContext()
    tol = ctx.default_tolerance if tol is None else tol
    return truncated_sum(coeffs, as_cert(u, ctx.prec), tol, start_power).enclosure()
