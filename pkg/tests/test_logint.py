import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from ramanujan_cert.errors import DomainError
from ramanujan_cert.logint import (
    E_of_x,
    ei,
    li,
    scaled_E,
    scaled_E_decreasing_certificate,
    scaled_E_diff,
    scaled_E_internal,
)
from ramanujan_cert.numerics import CertReal, PrecisionContext, exp, integrate_adaptive, log

CTX = PrecisionContext()
P = CTX.prec


def oracle_scaled_E(u):
    """E(e^u) u^6 e^-u through mpmath's Ei at 1500 digits (the subtraction cancels ~u/2.3 digits)."""
    with mpmath.workdps(1500):
        u = mpmath.mpf(u)
        head = sum(math.factorial(k) / u ** (k + 1) for k in range(6))
        return (mpmath.ei(u) * mpmath.exp(-u) - head) / 720 * u**6


def c(v):
    return CertReal(v, prec=P)


def test_li_oracle_values():
    with mpmath.workdps(80):
        assert li(2, ctx=CTX).contains(mpmath.li(2))
        assert li(10**6, ctx=CTX).contains(mpmath.li(10**6))
        assert li(Fraction(1, 2), ctx=CTX).contains(mpmath.li(mpmath.mpf(1) / 2))
    assert abs(float(li(10**6, ctx=CTX).mid) - 78627.5491594621819) < 1e-9
    assert abs(float(li(2, ctx=CTX).mid) - 1.04516378011749278) < 1e-15


def test_li_zero_and_domain():
    assert li(0, ctx=CTX).contains(0)
    with pytest.raises(DomainError):
        li(1, ctx=CTX)
    with pytest.raises(DomainError):
        li(-3, ctx=CTX)
    with pytest.raises(DomainError):
        li(10**301, ctx=CTX)


def test_li_asymptotic_branch_matches_oracle():
    # x = e^450 goes through the scaled remainder rather than the Ei series
    x = exp(c(450))
    with mpmath.workdps(200):
        assert li(x, ctx=CTX).contains(mpmath.li(mpmath.exp(450)))


@given(st.fractions(min_value=Fraction(-60), max_value=Fraction(200), max_denominator=50))
def test_ei_oracle(u):
    if u == 0:
        return
    with mpmath.workdps(100):
        assert ei(c(u)).contains(mpmath.ei(mpmath.mpf(u.numerator) / u.denominator))


def test_E_of_x():
    with mpmath.workdps(80):
        x = mpmath.mpf(10**6)
        L = mpmath.log(x)
        expected = (mpmath.li(x) - x * sum(math.factorial(k) / L ** (k + 1) for k in range(6))) / 720
    assert E_of_x(10**6, ctx=CTX).contains(expected)
    with pytest.raises(DomainError):
        E_of_x(1.5, ctx=CTX)


@pytest.mark.parametrize("u", ["100", "400", "673", "3157.442", "3158.442", "4000"])
def test_scaled_E_oracle(u):
    v = scaled_E_internal(c(u), ctx=CTX)
    assert v.contains(oracle_scaled_E(u))
    # below u ~ 400 the certified truncation (n + 7 <= u/4 terms) limits the width
    assert v.width < mpmath.mpf(10) ** (-40 if float(u) >= 400 else -15)


def test_scaled_E_frozen_values():
    # frozen from the 1500-digit Ei oracle
    assert abs(float(scaled_E(c("3157.442"), ctx=CTX).value.mid) - 3.17416002490788461846e-4) < 1e-18
    assert abs(float(scaled_E(c(673), ctx=CTX).value.mid) - 1.50152527013348566915e-3) < 1e-17


@settings(max_examples=15)
@given(st.integers(min_value=100, max_value=5000))
def test_scaled_E_oracle_property(u):
    assert scaled_E_internal(c(u), ctx=CTX).contains(oracle_scaled_E(u))


def test_scaled_E_domain():
    with pytest.raises(DomainError):
        scaled_E(c(600), ctx=CTX)
    with pytest.raises(DomainError):
        scaled_E_internal(c(50), ctx=CTX)


def test_scaled_E_diff():
    u, u1 = c("3158.442"), c("3157.442")
    d = scaled_E_diff(u, u1, ctx=CTX)
    with mpmath.workdps(1500):
        expected = oracle_scaled_E("3158.442") - oracle_scaled_E("3157.442") * (
            mpmath.mpf("3158.442") / mpmath.mpf("3157.442")
        ) ** 6 * mpmath.exp(-1)
    assert d.contains(expected)
    assert abs(float(d.mid) - 2.00322387715353e-4) < 1e-15
    assert scaled_E_diff(u1, u1, ctx=CTX).contains(0)
    with pytest.raises(DomainError):
        scaled_E_diff(u1, u, ctx=CTX)


def test_identity_integral_equals_E_difference():
    # int_{x1}^{x2} dt/log^7 t = E(x2) - E(x1), integrated in u = log t
    for x1, x2 in ((10**3, 10**4), (10**4, 10**6), (10**3, 10**6)):
        lo, hi = log(c(x1)), log(c(x2))
        integral = integrate_adaptive(lambda v: exp(v) / v**7, lo, hi, ctx=CTX)
        diff = E_of_x(x2, ctx=CTX) - E_of_x(x1, ctx=CTX)
        assert not (integral < diff) and not (integral > diff)


def test_decreasing_certificate():
    assert scaled_E_decreasing_certificate(c(673), CTX)
    assert scaled_E_decreasing_certificate(c("3157.442"), CTX)
    with pytest.raises(DomainError):
        scaled_E_decreasing_certificate(c(50), CTX)


def test_scaled_E_strictly_decreasing_on_grid():
    grid = [673 + k * (4000 - 673) / 99 for k in range(100)]
    values = [scaled_E(c(Fraction(g)), ctx=CTX).value for g in grid]
    assert all(b.hi < a.lo for a, b in zip(values, values[1:]))


@settings(max_examples=20)
@given(st.integers(min_value=673, max_value=4000), st.fractions(min_value=0, max_value=500, max_denominator=10))
def test_scaled_E_diff_between_zero_and_E_at_u1(u1, du):
    d = scaled_E_diff(c(u1 + du), c(u1), ctx=CTX)
    assert d.hi >= 0 and d.lo >= -mpmath.mpf(10) ** -40
    assert d.lo <= scaled_E_internal(c(u1), ctx=CTX).hi


@settings(max_examples=10)
@given(st.integers(min_value=2, max_value=10**6 - 1), st.integers(min_value=1, max_value=10**6))
def test_li_difference_is_integral(x1, dx):
    x2 = min(x1 + dx, 10**6)
    integral = integrate_adaptive(lambda v: exp(v) / v, log(c(x1)), log(c(x2)), ctx=CTX)
    diff = li(x2, ctx=CTX) - li(x1, ctx=CTX)
    assert not (integral < diff) and not (integral > diff)
