"""Acceptance criteria, one test each; every test prints a single PASS/FAIL line.

The lines are also collected into an "acceptance criteria" section of the
pytest terminal summary.
"""

import io
import json
import time
from contextlib import contextmanager
from fractions import Fraction

import pytest

from ramanujan_cert.cli import run
from ramanujan_cert.envelope import envelope_constants
from ramanujan_cert.logint import E_of_x, scaled_E
from ramanujan_cert.numerics import CertReal, PrecisionContext, exp, integrate_adaptive, log, pi, sqrt
from ramanujan_cert.ramanujan import (
    EpsilonParams,
    build_certificate,
    epsilon_gap,
    hassani_dk,
    published_envelope,
    threshold_solve,
)
from ramanujan_cert.sieve import PrimeCounter, audit_theta_bound, check_point, scan_range
from ramanujan_cert.theta_bound import a_eval, branch_expression

U1 = "3157.442"
BOUNDARY = 38358837682


@contextmanager
def criterion(log_, number, title):
    notes = []
    t0 = time.perf_counter()
    try:
        yield notes
    except BaseException as exc:
        line = f"criterion {number} FAIL  {title}: {'; '.join(notes + [str(exc).splitlines()[0] if str(exc) else type(exc).__name__])}"
        log_.append(line)
        print(line)
        raise
    line = f"criterion {number} PASS  {title} ({time.perf_counter() - t0:.1f} s): {'; '.join(notes)}"
    log_.append(line)
    print(line)


def cli(*argv):
    out = io.StringIO()
    code = run(list(argv), out=out, err=io.StringIO())
    return code, out.getvalue()


@pytest.fixture(scope="module")
def boundary_counter():
    return PrimeCounter()


def test_criterion_1_a_at_x1(acceptance_log):
    with criterion(acceptance_log, 1, "a(x1) reproduction") as notes:
        t0 = time.perf_counter()
        code, out = cli("constants", "--u1", U1, "--format", "json", "--no-timestamp")
        elapsed = time.perf_counter() - t0
        lo, hi = json.loads(out)["a_at_x1"]
        notes.append(f"a(x1) in [{lo[:16]}, {hi[:16]}]")
        assert code == 0
        # the published 1056.767676... is a truncation, so it names [1056.767676, 1056.767677]
        assert Fraction(lo) >= Fraction("1056.767676") and Fraction(hi) <= Fraction("1056.767677"), \
            "enclosure outside the published digits 1056.767676..."
        assert float(hi) - float(lo) <= 1e-5, "enclosure wider than 1e-5"
        assert elapsed < 1, f"runtime {elapsed:.2f} s"


def test_criterion_2_envelope_constants(acceptance_log, ctx):
    with criterion(acceptance_log, 2, "envelope constants") as notes:
        t0 = time.perf_counter()
        env = envelope_constants(CertReal(U1, prec=ctx.prec), ctx.default_tolerance, ctx)
        elapsed = time.perf_counter() - t0
        m_lo, M_hi = float(env.m_a.lo), float(env.M_a.hi)
        notes.append(f"certified m_a >= {m_lo:.6f} (need >= -936.697)")
        notes.append(f"certified M_a <= {M_hi:.6f} (need <= 1177.611)")
        notes.append(f"{elapsed:.1f} s")
        # the computed pair must carry the main statement by itself
        cert = build_certificate(U1, ctx, env=env)
        notes.append(f"computed pair certifies u* <= 3158.442: {cert.verdict}")
        assert cert.verdict and cert.u_threshold.hi <= 3158.442
        assert elapsed < 120
        assert M_hi <= 1177.561 + 0.05, "M_a bound too large"
        assert m_lo >= -936.647 - 0.05, "m_a bound below -936.697"


def test_criterion_3_end_to_end(acceptance_log, ctx):
    with criterion(acceptance_log, 3, "main statement end to end") as notes:
        t0 = time.perf_counter()
        code, out = cli("certify", "--format", "json", "--no-timestamp")
        doc = json.loads(out)
        notes.append(f"certify verdict {doc['verdict']}, u* <= {doc['u_threshold'][1][:14]}")
        assert code == 0 and doc["verdict"] is True
        assert float(doc["u_threshold"][1]) <= 3158.442
        env = published_envelope(U1, ctx)
        gap = epsilon_gap(env.u1 + 1, EpsilonParams.from_envelope(env))
        margin = env.u1 + 1 - gap
        notes.append(f"published constants: gap {float(gap.mid):.9f}, margin {float(margin.mid):.6g}")
        assert gap.lo > 3158.43 and gap.hi < 3158.442
        assert margin.lo > 0 and margin.hi <= 1e-2
        elapsed = time.perf_counter() - t0
        assert elapsed < 60, f"runtime {elapsed:.1f} s"


def test_criterion_4_dk(acceptance_log):
    with criterion(acceptance_log, 4, "asymptotic coefficients d_k") as notes:
        d4, d5 = hassani_dk(4).d_k, hassani_dk(5).d_k
        notes.append(f"d_4 = {d4}, d_5 = {d5}")
        assert d4 == -1 and d5 == -14


def test_criterion_5_boundary(acceptance_log, boundary_counter):
    with criterion(acceptance_log, 5, "last counterexample boundary") as notes:
        t0 = time.perf_counter()
        below = check_point(BOUNDARY, counter=boundary_counter)
        above = check_point(BOUNDARY + 1, counter=boundary_counter)
        elapsed = time.perf_counter() - t0
        notes.append(f"check({BOUNDARY}) = {below.holds}, check({BOUNDARY + 1}) = {above.holds}")
        notes.append(f"pi = {below.pi_x}/{above.pi_x}, floor(x/e) = {above.floor_x_over_alpha}, "
                     f"pi(floor) = {above.pi_floor}, {elapsed:.0f} s")
        assert below.holds is False and above.holds is True
        # exact values frozen for regression
        assert below.pi_x == above.pi_x == 1644673232
        assert below.floor_x_over_alpha == above.floor_x_over_alpha == 14111427770
        assert below.pi_floor == above.pi_floor == 632207037
        assert elapsed <= 1800


def test_criterion_6_failure_set(acceptance_log, boundary_counter):
    with criterion(acceptance_log, 6, "failure set") as notes:
        small = scan_range(2, 5, counter=boundary_counter)
        beyond = scan_range(BOUNDARY + 1, 38358839000, counter=boundary_counter)
        notes.append(f"scan [2, 5] = {small}, scan [{BOUNDARY + 1}, 38358839000] = {beyond}")
        assert small == [2, 3, 4, 5]
        assert beyond == []


def test_criterion_7_theta_audit(acceptance_log):
    with criterion(acceptance_log, 7, "theta bound audit to 1e7") as notes:
        t0 = time.perf_counter()
        r = audit_theta_bound(10**7, PrimeCounter())
        elapsed = time.perf_counter() - t0
        notes.append(f"max ratio at x = {r.argmax}, width {float(r.max_ratio.width):.1e}; "
                     f"next largest {float(r.rest_ratio.hi):.8f} at x = {r.rest_argmax}")
        assert r.argmax == 2 and r.max_ratio.contains(1) and r.max_ratio.width <= 1e-12
        assert r.rest_ratio.hi < 1
        assert elapsed <= 60


def test_criterion_8_numerics(acceptance_log, ctx):
    with criterion(acceptance_log, 8, "numerics oracles") as notes:
        p = ctx.prec
        lo, hi = log(CertReal(599, prec=p)), log(CertReal(10**6, prec=p))
        r = integrate_adaptive(lambda v: branch_expression("B2", v, p) * exp(v) / (v * v), lo, hi, ctx=ctx)
        closed = (sqrt(CertReal(10**6, prec=p)) - sqrt(CertReal(599, prec=p))) / (4 * pi(p))
        rel = float(abs(r.mid - closed.mid) / closed.mid)
        notes.append(f"B2 quadrature relative error {rel:.1e}")
        assert rel < 1e-12 and not (r < closed) and not (r > closed)

        lo, hi = log(CertReal(10**3, prec=p)), log(CertReal(10**6, prec=p))
        integral = integrate_adaptive(lambda v: exp(v) / v**7, lo, hi, ctx=ctx)
        diff = E_of_x(10**6, ctx=ctx) - E_of_x(10**3, ctx=ctx)
        notes.append("int dt/log^7 t = E(1e6) - E(1e3) within enclosures")
        assert not (integral < diff) and not (integral > diff)

        grid = [CertReal(673, prec=p) + CertReal(k * 3327, prec=p) / 99 for k in range(100)]
        values = [scaled_E(u, ctx=ctx).value for u in grid]
        notes.append("scaled E strictly decreasing on 100 points of [673, 4000]")
        assert all(b.hi < a.lo for a, b in zip(values, values[1:]))


def test_criterion_9_precision_nesting(acceptance_log, ctx, computed_envelope, certificate):
    with criterion(acceptance_log, 9, "precision nesting 80 vs 60 digits") as notes:
        hi_ctx = PrecisionContext(80)
        pairs = []
        pairs.append(("a(x1)", a_eval(CertReal(U1, prec=hi_ctx.prec)), a_eval(CertReal(U1, prec=ctx.prec))))
        env80 = envelope_constants(CertReal(U1, prec=hi_ctx.prec), hi_ctx.default_tolerance, hi_ctx)
        for name in ("scaled_C0", "scaled_C1", "m_a", "M_a"):
            pairs.append((name, getattr(env80, name), getattr(computed_envelope, name)))
        cert80 = build_certificate(U1, hi_ctx, env=env80)
        for name in ("u_threshold", "gap_at_statement_u", "margin"):
            pairs.append((name, getattr(cert80, name), getattr(certificate, name)))
        pub80, pub60 = published_envelope(U1, hi_ctx), published_envelope(U1, ctx)
        for label, e80, e60, c80, c60 in (("published gap", pub80, pub60, hi_ctx, ctx),):
            g80 = epsilon_gap(e80.u1 + 1, EpsilonParams.from_envelope(e80))
            g60 = epsilon_gap(e60.u1 + 1, EpsilonParams.from_envelope(e60))
            pairs.append((label, g80, g60))
            pairs.append(("published root", threshold_solve(e80, ctx=c80), threshold_solve(e60, ctx=c60)))
        bad = [name for name, inner, outer in pairs if not inner.subset_of(outer)]
        notes.append(f"{len(pairs) - len(bad)}/{len(pairs)} enclosures nested")
        notes.append(f"verdicts {cert80.verdict}/{certificate.verdict}")
        assert not bad, f"not nested: {bad}"
        assert cert80.verdict == certificate.verdict
