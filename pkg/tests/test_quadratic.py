from fractions import Fraction
import math

import mpmath
import pytest
from hypothesis import given, strategies as st

from tentfarey.quadratic import QuadraticSurd, is_exact, log_abs, squarefree_decomposition

fracs = st.fractions(min_value=-50, max_value=50, max_denominator=40)
radicands = st.sampled_from([2, 3, 5, 6, 7, 13])


def as_mpf(q: QuadraticSurd):
    with mpmath.workdps(60):
        return mpmath.mpf(q.u.numerator) / q.u.denominator + \
            mpmath.mpf(q.v.numerator) / q.v.denominator * mpmath.sqrt(q.D)


@pytest.mark.parametrize("n,expected", [(12, (2, 3)), (50, (5, 2)), (7, (1, 7)), (1, (1, 1)), (72, (6, 2))])
def test_squarefree(n, expected):
    assert squarefree_decomposition(n) == expected


def test_sqrt_of_perfect_square_is_rational():
    assert QuadraticSurd.sqrt_of(Fraction(9, 4)) == Fraction(3, 2)
    s = QuadraticSurd.sqrt_of(8)
    assert isinstance(s, QuadraticSurd) and s.D == 2 and s.v == 2


@given(fracs, fracs, fracs, fracs, radicands)
def test_field_ops_match_high_precision(u1, v1, u2, v2, D):
    a, b = QuadraticSurd(u1, v1, D), QuadraticSurd(u2, v2, D)
    with mpmath.workdps(60):
        for got, want in ((a + b, as_mpf(a) + as_mpf(b)), (a - b, as_mpf(a) - as_mpf(b)),
                          (a * b, as_mpf(a) * as_mpf(b))):
            got_v = got if isinstance(got, Fraction) else as_mpf(got)
            assert abs(got_v - want) < mpmath.mpf(10) ** -40 * (1 + abs(want))
        if b != 0:
            q = a / b
            q_v = q if isinstance(q, Fraction) else as_mpf(q)
            assert abs(q_v - as_mpf(a) / as_mpf(b)) < mpmath.mpf(10) ** -35 * (1 + abs(q_v))


@given(fracs, fracs, radicands)
def test_sign_is_exact(u, v, D):
    q = QuadraticSurd(u, v, D)
    with mpmath.workdps(80):
        val = as_mpf(q)
    expected = 0 if val == 0 else (1 if val > 0 else -1)
    if abs(val) > mpmath.mpf(10) ** -60 or val == 0:
        assert q.sign() == expected


@given(fracs, fracs, radicands)
def test_norm_and_conjugate(u, v, D):
    q = QuadraticSurd(u, v, D)
    prod = q * q.conjugate()
    assert prod == q.norm() or (isinstance(prod, QuadraticSurd) and prod.v == 0 and prod.u == q.norm())


def test_floor_and_ordering():
    s = QuadraticSurd(0, 1, 2)
    assert math.floor(s) == 1
    assert math.floor(-s) == -2
    assert QuadraticSurd(-1, 1, 2) < Fraction(1, 2) < QuadraticSurd(0, 1, 2) / 2 + Fraction(1, 10)


def test_cross_field_equality_is_false():
    assert QuadraticSurd(0, 1, 2) != QuadraticSurd(0, 1, 3)


def test_log_abs_big_and_surd():
    assert log_abs(10 ** 400) == pytest.approx(400 * math.log(10))
    assert log_abs(Fraction(1, 10 ** 400)) == pytest.approx(-400 * math.log(10))
    assert log_abs(QuadraticSurd(-1, 1, 2)) == pytest.approx(math.log(math.sqrt(2) - 1))
    assert is_exact(Fraction(1, 3)) and is_exact(QuadraticSurd(0, 1, 5)) and not is_exact(0.5)


def test_to_mpf_small_difference():
    # (1+sqrt2)^40 - its nearest integer is tiny; the conjugate trick keeps the digits
    q = QuadraticSurd(1, 1, 2) ** 40
    frac_part = q - math.floor(q)
    assert float(frac_part.to_mpf(40)) == pytest.approx(float(as_mpf(frac_part)), rel=1e-10)
