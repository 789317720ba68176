import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from ramanujan_cert.envelope import EnvelopeConstants, envelope_at, scaled_a_integral, scaled_C
from ramanujan_cert.errors import DomainError
from ramanujan_cert.logint import scaled_E_internal
from ramanujan_cert.numerics import CertReal, exp, integrate_adaptive, ln2, log, pi
from ramanujan_cert.theta_bound import a_eval

U1 = "3157.442"


def oracle_a_over_log5(v):
    x = mpmath.exp(v)
    if x < 599:
        return (2 - mpmath.log(2)) / 2
    if x < mpmath.mpf("1.101e26"):
        return v**2 / (8 * mpmath.pi * mpmath.sqrt(x))
    if v < 673:
        s = v / mpmath.mpf("6.455")
        return mpmath.sqrt(8 / (17 * mpmath.pi)) * s**0.25 * mpmath.exp(-mpmath.sqrt(s))
    s = v / mpmath.mpf("5.5666305")
    return mpmath.mpf("121.0961") * s**1.5 * mpmath.exp(-2 * mpmath.sqrt(s))


def oracle_scaled_a_integral():
    """u1^6 e^-u1 int_2^x1 a(t)/log^7 t dt by mpmath Gauss-Legendre, split at every kink."""
    with mpmath.workdps(40):
        u1 = mpmath.mpf(U1)
        g = lambda v: oracle_a_over_log5(v) / v**2 * mpmath.exp(v - u1) * u1**6
        pts = [mpmath.log(2), mpmath.log(599), mpmath.log(mpmath.mpf("1.101e26")), 673]
        pts += [u1 - d for d in (1000, 300, 100, 30, 10, 3, 1)] + [u1]
        return sum(mpmath.quad(g, [a, b]) for a, b in zip(pts, pts[1:]))


def test_scaled_a_integral_oracle(ctx):
    s = scaled_a_integral(CertReal(U1, prec=ctx.prec), ctx=ctx)
    with mpmath.workdps(60):
        assert abs(s.mid - oracle_scaled_a_integral()) < mpmath.mpf(10) ** -25
        assert s.width < mpmath.mpf(10) ** -25
    # frozen
    assert abs(float(s.mid) - 0.337289040414804) < 1e-14


def test_scaled_C_oracle(ctx):
    u1 = CertReal(U1, prec=ctx.prec)
    c0 = scaled_C(u1, "minus", ctx=ctx)
    c1 = scaled_C(u1, "plus", ctx=ctx)
    with mpmath.workdps(60):
        e1 = mpmath.mpf(scaled_E_internal(u1, ctx=ctx).mid)
        s_a = oracle_scaled_a_integral()
        # the E(2) and log 2 constants are scaled by u1^6 e^-u1 ~ e^-3109 and drop out
        assert abs(c0.mid - (720 * e1 - s_a)) < mpmath.mpf(10) ** -25
        assert abs(c1.mid - (720 * e1 + s_a)) < mpmath.mpf(10) ** -25
    assert abs(float(c0.mid) + 0.108749518621437) < 1e-14
    assert abs(float(c1.mid) - 0.565828562208172) < 1e-14
    with pytest.raises(DomainError):
        scaled_C(u1, "times", ctx=ctx)


def test_envelope_constants_frozen(computed_envelope):
    env = computed_envelope
    assert env.source == "computed"
    assert all(env.checks.values())
    assert abs(float(env.m_a.mid) + 936.876425726204) < 1e-9
    assert abs(float(env.M_a.mid) - 1177.33350476979) < 1e-9
    assert env.m_a.width < 1e-20 and env.M_a.width < 1e-20


def test_m_attained_at_u1(computed_envelope, ctx):
    env = computed_envelope
    at_u1 = envelope_at(env.u1, env, ctx=ctx)
    # the E-difference term vanishes at u1 (up to interval dependency)
    assert abs(at_u1.m_of_u.mid - (120 - env.a_at_x1 + env.scaled_C0).mid) < mpmath.mpf(10) ** -40
    # m_a = [certified lower bound, attained value]; the attained value is m(u1)
    assert not (env.m_a.hi < at_u1.m_of_u.lo)


@settings(max_examples=25)
@given(st.floats(min_value=0, max_value=3000))
def test_envelope_sandwich_property(computed_envelope, ctx, du):
    env = computed_envelope
    v = envelope_at(env.u1 + CertReal(du, prec=ctx.prec), env, ctx=ctx)
    assert v.m_of_u.hi >= env.m_a.lo
    assert v.M_of_u.lo <= env.M_a.hi


def test_published_constants_carry_no_intermediates(ctx):
    env = EnvelopeConstants.from_values(U1, "-936.64603213534", "1177.56019022252", "published", ctx.prec)
    with pytest.raises(DomainError):
        envelope_at(env.u1, env, ctx=ctx)


def _theta_bracket_integral(x, sign, ctx):
    """int_2^x (t + sign b(t))/(t log^2 t) dt with b the theta-gap bound, in u = log t."""
    p = ctx.prec
    c1 = (2 - ln2(p)) / 2
    lo = ln2(p)
    mid = log(CertReal(599, prec=p))
    hi = log(CertReal(x, prec=p))
    b1 = integrate_adaptive(lambda v: (1 + sign * c1) * exp(v) / (v * v), lo, mid, ctx=ctx)
    b2 = integrate_adaptive(lambda v: exp(v) / (v * v) + sign * exp(v / 2) / (8 * pi(p)), mid, hi, ctx=ctx)
    return b1 + b2


@pytest.mark.parametrize("x", [1000, 10**4, 10**5, 10**6])
def test_pi_envelope_soundness(x, counter, ctx):
    # theta within the bound plus pi(x) = theta(x)/log x + int_2^x theta(t)/(t log^2 t) dt
    from ramanujan_cert.theta_bound import theta_gap_bound

    p = ctx.prec
    L = log(CertReal(x, prec=p))
    b = theta_gap_bound(x, ctx)
    lower = (x - b) / L + _theta_bracket_integral(x, -1, ctx)
    upper = (x + b) / L + _theta_bracket_integral(x, +1, ctx)
    pi_x = counter.pi(x)
    assert lower.hi < pi_x < upper.lo
    # the identity itself, with the sieve theta: pi(x) = theta(x)/log x + int theta/(t log^2 t)
    theta_x = counter.theta(x)
    assert (theta_x / L).lo <= pi_x


def test_C_split_is_twice_the_a_integral(ctx):
    u1 = CertReal(U1, prec=ctx.prec)
    s = scaled_a_integral(u1, ctx=ctx)
    diff = scaled_C(u1, "plus", ctx=ctx, a_integral=s) - scaled_C(u1, "minus", ctx=ctx, a_integral=s)
    assert not (diff < 2 * s) and not (diff > 2 * s)
    assert (diff - 2 * s).width < 10 * mpmath.mpf(ctx.default_tolerance.numerator) / ctx.default_tolerance.denominator


@settings(max_examples=20)
@given(st.one_of(st.just(0.0), st.floats(min_value=1e-6, max_value=10**5)))
def test_terms_monotone_beyond_grid_end(computed_envelope, ctx, du):
    from ramanujan_cert.envelope import DEFAULT_GRID_SPAN

    env = computed_envelope
    u_t = env.u1 + DEFAULT_GRID_SPAN
    u = u_t + CertReal(du, prec=ctx.prec)
    g = lambda v: (v / env.u1) ** 6 * exp(env.u1 - v)
    e1 = scaled_E_internal(env.u1, ctx=ctx)
    e_t = scaled_E_internal(u_t, ctx=ctx)
    assert a_eval(u).hi <= a_eval(u_t).hi
    assert g(u).hi <= g(u_t).hi
    d = scaled_E_internal(u, ctx=ctx) - e1 * g(u)
    assert d.hi <= e_t.hi and d.hi >= 0
