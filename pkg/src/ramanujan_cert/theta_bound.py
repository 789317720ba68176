"""Piecewise explicit bound ``|theta(x) - x| <= a(x) x / log^5 x``.

Every quantity is a function of ``u = log x``.  The four branches are

    B1  (2 - log 2)/2                                   2 <= x < 599
    B2  log^2 x / (8 pi sqrt x)                        599 <= x < 1.101e26
    B3  sqrt(8/(17 pi)) (log x/6.455)^(1/4) exp(-sqrt(log x/6.455))
                                                    1.101e26 <= x < e^673
    B4  121.0961 (log x/R)^(3/2) exp(-2 sqrt(log x/R)),  R = 5.5666305
                                                           x >= e^673

and ``a(x) = log^5 x * branch(x)``.  Boundaries are half-open, ties go to
the upper branch.  Branch expressions accept :class:`Series` as well as
:class:`CertReal`, so the integrands built from them can be integrated.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .errors import DomainError, OverflowRefusal
from .numerics import CertReal, PrecisionContext, as_cert, exp, ln2, log, pi, power, sqrt

R = Fraction("5.5666305")
B3_SCALE = Fraction("6.455")
B4_COEFF = Fraction("121.0961")
X_599 = 599
X_BIG = 1101 * 10**23
U_B4 = 673
# exp(u) for larger u is not worth materializing as a number
MAX_X_SCALED_U = 700


@dataclass(frozen=True)
class LogPoint:
    """A real argument ``x >= 2`` carried as ``u = log x``."""

    u: CertReal

    def __post_init__(self):
        if not isinstance(self.u, CertReal):
            object.__setattr__(self, "u", as_cert(self.u))
        if self.u.hi < ln2(self.u.prec).lo:
            raise DomainError(f"log x = {self.u.format(12)} is below log 2")

    @classmethod
    def of(cls, x: int, prec: int | None = None) -> "LogPoint":
        prec = prec or PrecisionContext().prec
        return cls(log(CertReal(x, prec=prec)))


@dataclass(frozen=True)
class BranchSpec:
    id: str
    u_lo: CertReal
    u_hi: CertReal | None
    parameters: tuple


@dataclass(frozen=True)
class ThetaBoundValue:
    u: LogPoint
    a: CertReal
    gap_bound: CertReal | None


@lru_cache(maxsize=16)
def branches(prec: int) -> tuple[BranchSpec, ...]:
    l2 = ln2(prec)
    u599 = log(CertReal(X_599, prec=prec))
    ubig = log(CertReal(X_BIG, prec=prec))
    u673 = CertReal(U_B4, prec=prec)
    return (
        BranchSpec("B1", l2, u599, ((2 - l2) / 2,)),
        BranchSpec("B2", u599, ubig, (8 * pi(prec),)),
        BranchSpec("B3", ubig, u673, (sqrt(CertReal(8, prec=prec) / (17 * pi(prec))), B3_SCALE)),
        BranchSpec("B4", u673, None, (B4_COEFF, R)),
    )


def _spec(branch_id: str, prec: int) -> BranchSpec:
    for spec in branches(prec):
        if spec.id == branch_id:
            return spec
    raise DomainError(f"unknown branch {branch_id!r}")


def branch_expression(branch_id: str, u, prec: int | None = None):
    """``a(x)/log^5 x`` of one branch at ``u`` (CertReal or Series), no domain check."""
    prec = prec or u.prec
    params = _spec(branch_id, prec).parameters
    if branch_id == "B1":
        return u * 0 + params[0]
    if branch_id == "B2":
        return u * u * exp(-u / 2) / params[0]
    if branch_id == "B3":
        s = u / CertReal(params[1], prec=prec)
        return power(s, Fraction(1, 4)) * exp(-sqrt(s)) * params[0]
    s = u / CertReal(params[1], prec=prec)
    return power(s, Fraction(3, 2)) * exp(-2 * sqrt(s)) * CertReal(params[0], prec=prec)


def a_branch(branch_id: str, u, prec: int | None = None):
    """``a(x) = u^5 * branch(u)`` for an explicitly chosen branch."""
    return u ** 5 * branch_expression(branch_id, u, prec)


def _as_u(u) -> CertReal:
    if isinstance(u, LogPoint):
        return u.u
    return as_cert(u)


def branches_touching(u: CertReal) -> list[str]:
    """Ids of every branch whose half-open domain meets the enclosure ``u``."""
    hits = []
    for spec in branches(u.prec):
        past_end = spec.u_hi is not None and not (u.lo < spec.u_hi.hi)
        before_start = u.hi < spec.u_lo.lo
        if not (past_end or before_start):
            hits.append(spec.id)
    return hits


def a_eval(u) -> CertReal:
    """Enclosure of ``a(x)`` at ``u = log x``.

    If the enclosure of ``u`` straddles a branch boundary, the hull of the
    candidate branches is returned.
    """
    u = _as_u(u)
    if u.hi < ln2(u.prec).lo:
        raise DomainError(f"a(x) needs x >= 2, got log x = {u.format(12)}")
    ids = branches_touching(u)
    return CertReal.hull(*(a_branch(i, u) for i in ids))


def branch_of_integer(x: int) -> str:
    if x < 2:
        raise DomainError(f"x = {x} is below 2")
    if x < X_599:
        return "B1"
    if x < X_BIG:
        return "B2"
    return "B3_or_B4"


def theta_gap_bound(x, ctx: PrecisionContext | None = None) -> CertReal:
    """Enclosure of ``a(x) x / log^5 x``, the bound on ``|theta(x) - x|``.

    ``x`` is an exact integer, or a :class:`LogPoint` whose ``x`` is
    representable (``log x <= 700``).
    """
    ctx = ctx or PrecisionContext()
    prec = ctx.prec
    if isinstance(x, bool):
        raise TypeError("x must be an integer or a LogPoint")
    if isinstance(x, int):
        branch = branch_of_integer(x)
        xc = CertReal(x, prec=prec)
        u = log(xc)
        if branch == "B3_or_B4":
            ids = branches_touching(u)
            ids = [i for i in ids if i in ("B3", "B4")]
        else:
            ids = [branch]
        if ids == ["B2"]:
            # the branch collapses to sqrt(x) log^2 x / (8 pi)
            return sqrt(xc) * u * u / (8 * pi(prec))
        return CertReal.hull(*(branch_expression(i, u) for i in ids)) * xc
    u = _as_u(x)
    if u.hi > MAX_X_SCALED_U:
        raise OverflowRefusal(
            f"x = exp({u.format(10)}) is too large for the x-scaled bound; stay in log space"
        )
    return a_eval(u) * exp(u) / u ** 5


def theta_bound_value(u) -> ThetaBoundValue:
    point = u if isinstance(u, LogPoint) else LogPoint(as_cert(u))
    a = a_eval(point)
    gap = None if point.u.hi > MAX_X_SCALED_U else a * exp(point.u) / point.u ** 5
    return ThetaBoundValue(point, a, gap)


def a_monotone_certificate(u) -> bool:
    """True iff ``sqrt(u/R) > 6.5`` is certified at ``u``.

    On the B4 branch ``d/du log a = 6.5/u - 1/sqrt(R u)``, which is negative
    exactly when ``sqrt(u/R) > 6.5``.  Since ``sqrt(u/R)`` increases, a true
    result at ``u`` also covers every larger argument.
    """
    u = _as_u(u)
    if not u >= U_B4:
        raise DomainError(f"the monotonicity certificate needs u >= {U_B4}")
    return bool(sqrt(u / CertReal(R, prec=u.prec)) > Fraction(13, 2))
