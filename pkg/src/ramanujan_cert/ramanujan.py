"""Closing inequality for ``pi(x)^2 < (e x/log x) pi(x/e)`` beyond ``e x1``.

For envelope constants ``m_a``, ``M_a`` the difference

    pi(x)^2 - (e x/log x) pi(x/e)  <  x^2/log^6 x * (-1 + (eps_M - eps_m)/log x)

holds for ``x >= e x1``, with

    eps_m = 206 + m_a + 364/u + 381/u^2 + 238/u^3 + 97/u^4 + 30/u^5 + 8/u^6
    eps_M = 72 + 2M_a + (2M_a + 132)/u + (4M_a + 288)/u^2 + (12M_a + 576)/u^3
            + 48M_a/u^4 + M_a^2/u^5

(``u = log x``; a doubled ``+ +`` before ``48M_a/u^4`` in the source display
is read as one plus).  The inequality follows once ``gap(u) = eps_M - eps_m``
stays below ``u`` for all ``u >= u1 + 1``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone

from .envelope import (
    DEFAULT_GRID_SPAN,
    DEFAULT_GRID_STEP,
    DEFAULT_WINDOW,
    EnvelopeConstants,
    envelope_constants,
)
from .errors import (
    CertificationError,
    DomainError,
    NoSignChange,
    TailUnbounded,
    ThresholdAboveAnchor,
)
from .numerics import CertReal, PrecisionContext, as_cert, find_root_bisect
from .theta_bound import U_B4

SCHEMA = "ramanujan-cert/1"
LOWER_DOMAIN_U = 100
PUBLISHED_M_A = "-936.64603213534"
PUBLISHED_BIG_M_A = "1177.56019022252"
DEFAULT_U1 = "3157.442"
EPS_M_READING = "the doubled '+ +' before 48M_a/log^4 x is read as a single plus"


@dataclass(frozen=True)
class EpsilonParams:
    m_a: CertReal
    M_a: CertReal

    @property
    def m_coeffs(self) -> tuple:
        return (206 + self.m_a, 364, 381, 238, 97, 30, 8)

    @property
    def M_coeffs(self) -> tuple:
        big = self.M_a
        return (72 + 2 * big, 2 * big + 132, 4 * big + 288, 12 * big + 576, 48 * big, big * big)

    @classmethod
    def from_envelope(cls, env: EnvelopeConstants) -> "EpsilonParams":
        return cls(env.m_a, env.M_a)


@dataclass(frozen=True)
class AsymptoticCoefficient:
    k: int
    d_k: int


def _poly_inv(coeffs, u: CertReal) -> CertReal:
    """``sum_k c_k u^-k`` by Horner in ``1/u``."""
    inv = 1 / u
    acc = CertReal(0, prec=u.prec)
    for c in reversed(coeffs):
        acc = acc * inv + c
    return acc


def epsilon_m(u, params: EpsilonParams) -> CertReal:
    u = as_cert(u, params.m_a.prec)
    return _poly_inv(params.m_coeffs, u)


def epsilon_M(u, params: EpsilonParams) -> CertReal:
    u = as_cert(u, params.M_a.prec)
    return _poly_inv(params.M_coeffs, u)


def epsilon_gap(u, params: EpsilonParams) -> CertReal:
    """``eps_M(u) - eps_m(u)``, each side evaluated separately."""
    u = as_cert(u, params.M_a.prec)
    if not u > 0:
        raise DomainError("the epsilon gap needs log x > 0")
    return epsilon_M(u, params) - epsilon_m(u, params)


def gap_coefficients(params: EpsilonParams) -> list[CertReal]:
    m, big = params.m_coeffs, params.M_coeffs
    out = []
    for k in range(7):
        mk = m[k] if k < len(m) else 0
        bk = big[k] if k < len(big) else 0
        out.append(as_cert(bk, params.M_a.prec) - mk)
    return out


def decreasing_certificate(u, params: EpsilonParams) -> bool:
    """Certify that ``gap(v) - v`` decreases for every ``v >= u``.

    The derivative is ``-1 - sum_k k c_k v^-(k+1)``; it is negative once the
    terms with negative ``c_k`` sum to less than one, and each such term only
    shrinks as ``v`` grows.
    """
    u = as_cert(u, params.M_a.prec)
    total = CertReal(0, prec=u.prec)
    for k, c in enumerate(gap_coefficients(params)):
        if k == 0 or c.lo >= 0:
            continue
        neg = CertReal(0, -c.lo, prec=u.prec)
        total = total + k * neg / u ** (k + 1)
    return bool(total < 1)


@dataclass(frozen=True)
class ThresholdReport:
    root: CertReal
    decreasing: bool
    at_domain_floor: bool


def _solve(params: EpsilonParams, tol, ctx: PrecisionContext, lower, search_cap: int) -> ThresholdReport:
    prec = ctx.prec

    def f(u):
        return epsilon_gap(u, params) - u

    low = CertReal(lower, prec=prec)
    if f(low) < 0:
        return ThresholdReport(low, decreasing_certificate(low, params), True)
    hi = CertReal(max(2 * lower, 4096), prec=prec)
    while not f(hi) < 0:
        if hi > search_cap:
            raise NoSignChange(f"gap(u) - u stays non-negative up to u = {search_cap}")
        hi = hi * 2
    root = find_root_bisect(f, low, hi, tol, ctx)
    return ThresholdReport(root, decreasing_certificate(root.upper(), params), False)


def threshold_solve(env: EnvelopeConstants, tol=None, ctx: PrecisionContext | None = None,
                    lower: int = LOWER_DOMAIN_U, search_cap: int = 10**7) -> CertReal:
    """Certified ``u*`` with ``gap(u) < u`` for every ``u >= u*.hi``.

    ``u*`` encloses the last sign change of ``gap(u) - u`` above ``lower``;
    past it the function is certified decreasing.  Raises
    :class:`ThresholdAboveAnchor` when ``u*`` may exceed ``u1 + 1``.
    """
    ctx = ctx or PrecisionContext()
    tol = ctx.default_tolerance if tol is None else tol
    report = _solve(EpsilonParams.from_envelope(env), tol, ctx, lower, search_cap)
    if not report.decreasing:
        raise TailUnbounded(f"gap(u) - u is not certified decreasing beyond {report.root.format(15)}")
    anchor = env.u1 + 1
    if not report.root.hi <= anchor.lo:
        raise ThresholdAboveAnchor(
            f"threshold {report.root.format(12)} exceeds u1 + 1 = {anchor.format(12)}",
            threshold=report.root,
        )
    return report.root


def hassani_dk(k: int) -> AsymptoticCoefficient:
    """``d_k = sum_{j=0}^k j! ((k-j)! - C(k, j))`` in exact integers."""
    if isinstance(k, bool) or not isinstance(k, int) or k < 0:
        raise DomainError("k must be a non-negative integer")
    d = sum(math.factorial(j) * (math.factorial(k - j) - math.comb(k, j)) for j in range(k + 1))
    return AsymptoticCoefficient(k, d)


# ---------------------------------------------------------------- certificate
@dataclass(frozen=True)
class Certificate:
    """Record of the full check.

    ``u_threshold`` is the bisection root ``u*``; ``gap_at_statement_u`` and
    ``margin = (u1 + 1) - gap(u1 + 1)`` are evaluated at the statement point
    ``u1 + 1``, which is where the claimed bound ``x >= e x1`` starts.  All
    intervals are snapped outward to ``digits`` significant decimals so the
    serialized form is exact.
    """

    u1: CertReal
    env: EnvelopeConstants
    u_threshold: CertReal | None
    statement_u: CertReal
    gap_at_statement_u: CertReal
    margin: CertReal
    verdict: bool
    failures: tuple
    metadata: dict = field(default_factory=dict)


def _snap(x: CertReal | None, digits: int):
    return None if x is None else x.snap_decimal(digits)


def build_certificate(u1=DEFAULT_U1, ctx: PrecisionContext | None = None, tol=None,
                      env: EnvelopeConstants | None = None) -> Certificate:
    """Run envelope constants, epsilon gap and threshold; collect every check."""
    ctx = ctx or PrecisionContext()
    tol = ctx.default_tolerance if tol is None else tol
    u1c = as_cert(u1, ctx.prec)
    if not u1c >= U_B4:
        raise DomainError(f"u1 must be >= {U_B4}")
    if env is None:
        env = envelope_constants(u1c, tol, ctx)
    params = EpsilonParams.from_envelope(env)
    statement = env.u1 + 1
    gap = epsilon_gap(statement, params)
    margin = statement - gap

    failures = []
    for name, ok in env.checks.items():
        if not ok:
            failures.append(f"envelope check failed: {name}")
    u_star = None
    try:
        u_star = threshold_solve(env, tol, ctx)
    except ThresholdAboveAnchor as exc:
        u_star = exc.threshold
        failures.append(str(exc))
    except CertificationError as exc:
        failures.append(f"{type(exc).__name__}: {exc}")
    if not margin.lo > 0:
        failures.append(f"margin {margin.format(12)} is not certified positive")
    verdict = not failures

    d = ctx.digits
    env_snapped = EnvelopeConstants(
        u1=_snap(env.u1, d),
        a_at_x1=_snap(env.a_at_x1, d),
        scaled_C0=_snap(env.scaled_C0, d),
        scaled_C1=_snap(env.scaled_C1, d),
        m_a=_snap(env.m_a, d),
        M_a=_snap(env.M_a, d),
        source=env.source,
        checks=dict(env.checks),
    )
    metadata = {
        "digits": d,
        "binary_precision": ctx.prec,
        "tolerance": list(CertReal(tol, prec=ctx.prec).to_decimal_pair(d, outward=True)),
        "grid_span": DEFAULT_GRID_SPAN,
        "grid_step": DEFAULT_GRID_STEP,
        "window": DEFAULT_WINDOW,
        "threshold_lower_domain": LOWER_DOMAIN_U,
        "epsilon_M_reading": EPS_M_READING,
        "statement": "pi(x)^2 < (e x / log x) pi(x/e) for every x >= exp(u1 + 1)",
    }
    return Certificate(
        u1=_snap(u1c, d),
        env=env_snapped,
        u_threshold=_snap(u_star, d),
        statement_u=_snap(statement, d),
        gap_at_statement_u=_snap(gap, d),
        margin=_snap(margin, d),
        verdict=verdict,
        failures=tuple(failures),
        metadata=metadata,
    )


def _pair(x: CertReal | None, digits: int):
    if x is None:
        return None
    return list(x.to_decimal_pair(digits, outward=False))


def _int_pair(n: int):
    return [str(n), str(n)]


def certificate_to_dict(cert: Certificate, timestamp: bool = True) -> dict:
    """JSON-ready document; every number is a pair of decimal strings."""
    d = cert.metadata["digits"]
    env = cert.env
    doc = {
        "schema": SCHEMA,
        "verdict": cert.verdict,
        "failures": list(cert.failures),
        "u1": _pair(cert.u1, d),
        "statement_u": _pair(cert.statement_u, d),
        "u_threshold": _pair(cert.u_threshold, d),
        "gap_at_statement_u": _pair(cert.gap_at_statement_u, d),
        "margin": _pair(cert.margin, d),
        "envelope": {
            "source": env.source,
            "u1": _pair(env.u1, d),
            "a_at_x1": _pair(env.a_at_x1, d),
            "scaled_C0": _pair(env.scaled_C0, d),
            "scaled_C1": _pair(env.scaled_C1, d),
            "m_a": _pair(env.m_a, d),
            "M_a": _pair(env.M_a, d),
            "checks": dict(sorted(env.checks.items())),
        },
        "metadata": {
            key: (_int_pair(value) if isinstance(value, int) and not isinstance(value, bool) else value)
            for key, value in sorted(cert.metadata.items())
        },
    }
    if timestamp:
        doc["generated_at"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
    return doc


def comparable(doc: dict) -> dict:
    """The document without its timestamp, for byte-level comparison."""
    return {k: v for k, v in doc.items() if k != "generated_at"}


def _unpair(value, prec: int):
    if value is None:
        return None
    return CertReal.from_decimal_pair(value[0], value[1], prec)


def certificate_from_dict(doc: dict) -> Certificate:
    if doc.get("schema") != SCHEMA:
        raise DomainError(f"unsupported certificate schema {doc.get('schema')!r}")
    meta = {}
    for key, value in doc["metadata"].items():
        if (isinstance(value, list) and len(value) == 2 and value[0] == value[1]
                and value[0].lstrip("-").isdigit()):
            meta[key] = int(value[0])
        else:
            meta[key] = value
    prec = PrecisionContext(digits=meta["digits"]).prec
    e = doc["envelope"]
    env = EnvelopeConstants(
        u1=_unpair(e["u1"], prec),
        a_at_x1=_unpair(e["a_at_x1"], prec),
        scaled_C0=_unpair(e["scaled_C0"], prec),
        scaled_C1=_unpair(e["scaled_C1"], prec),
        m_a=_unpair(e["m_a"], prec),
        M_a=_unpair(e["M_a"], prec),
        source=e["source"],
        checks=dict(e["checks"]),
    )
    return Certificate(
        u1=_unpair(doc["u1"], prec),
        env=env,
        u_threshold=_unpair(doc["u_threshold"], prec),
        statement_u=_unpair(doc["statement_u"], prec),
        gap_at_statement_u=_unpair(doc["gap_at_statement_u"], prec),
        margin=_unpair(doc["margin"], prec),
        verdict=bool(doc["verdict"]),
        failures=tuple(doc["failures"]),
        metadata=meta,
    )


def certificate_to_json(cert: Certificate, timestamp: bool = True) -> str:
    return json.dumps(certificate_to_dict(cert, timestamp), indent=2, sort_keys=True)


def certificate_from_json(text: str) -> Certificate:
    return certificate_from_dict(json.loads(text))


def published_envelope(u1=DEFAULT_U1, ctx: PrecisionContext | None = None) -> EnvelopeConstants:
    """The published ``m_a``, ``M_a`` injected verbatim."""
    ctx = ctx or PrecisionContext()
    return EnvelopeConstants.from_values(u1, PUBLISHED_M_A, PUBLISHED_BIG_M_A, source="published", prec=ctx.prec)
