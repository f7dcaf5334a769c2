import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from tentfarey.errors import InputError, NumericalDomainError
from tentfarey.observables import (FunctionObservable, Restriction, SingularPower, bv_norm,
                                   indicator, linear_piecewise, parse_observable, sup_norm,
                                   variation)


def test_singular_power_values():
    v = SingularPower(0.5, 0.5)
    assert v(0.5) == math.inf
    assert v(0.75) == pytest.approx(2)
    assert SingularPower(0.0, 0.3)(1.0) == 1


@given(st.floats(0, 1), st.floats(0.05, 0.95))
def test_singular_power_integral_closed_form(beta, alpha):
    v = SingularPower(beta, alpha)
    # algebraic-weight quadrature handles the endpoint singularity itself
    oracle = 0.0
    if beta > 0:
        oracle += integrate.quad(lambda t: 1.0, 0, beta, weight="alg", wvar=(0, -alpha))[0]
    if beta < 1:
        oracle += integrate.quad(lambda t: 1.0, beta, 1, weight="alg", wvar=(-alpha, 0))[0]
    assert v.integral() == pytest.approx(oracle, rel=1e-6)


def test_integral_examples():
    assert SingularPower(0.5, 0.5).integral() == pytest.approx(2 * math.sqrt(2))
    assert SingularPower(0.0, 0.25).integral() == pytest.approx(1 / 0.75)
    assert SingularPower(0.3, 1e-9).integral() == pytest.approx(1, rel=1e-6)
    with pytest.raises(InputError):
        SingularPower(0.3, 1.0)


def test_variation_examples():
    mono = FunctionObservable(lambda t: t ** 3)
    assert variation(mono, 0.2, 0.7) == pytest.approx(0.7 ** 3 - 0.2 ** 3)
    assert variation(indicator(0.5, 1)) == pytest.approx(1)
    g1 = FunctionObservable(lambda t: 1 - t)
    assert variation(g1, 0.5, 2 / 3) == pytest.approx(1 / 6)
    with pytest.raises(NumericalDomainError):
        variation(SingularPower(0.5, 0.5))


@given(st.lists(st.floats(-5, 5), min_size=6, max_size=6))
def test_piecewise_linear_variation_matches_oracle(vals):
    edges = [0, 0.25, 0.6, 1]
    f = linear_piecewise(edges, vals[0::2], vals[1::2])
    # oracle: sum of |slopes| plus jumps between pieces
    left, right = vals[0::2], vals[1::2]
    oracle = sum(abs(r - l) for l, r in zip(left, right))
    oracle += sum(abs(left[i + 1] - right[i]) for i in range(2))
    assert variation(f) == pytest.approx(oracle, abs=1e-9)
    assert sup_norm(f) <= max(abs(v) for v in vals) + 1e-12


def test_bv_norm_convention():
    assert bv_norm(indicator(0.5, 1)) == pytest.approx(2)


def test_indicator_open_closed():
    f = indicator(0.25, 0.5, closed_right=False)
    assert f(0.5) == 0 and f(0.25) == 1
    g = indicator(0.25, 0.5)
    assert g(0.5) == 1


def test_arithmetic():
    f = FunctionObservable(lambda t: t)
    h = f + indicator(0.5, 1)
    assert h(0.75) == pytest.approx(1.75)
    k = f * f
    assert k.integral() == pytest.approx(1 / 3)


def test_parse_observable():
    v = parse_observable("power:beta=1/3,alpha=0.4")
    assert isinstance(v, SingularPower) and v.beta == pytest.approx(1 / 3) and v.alpha == 0.4
    ind = parse_observable("indicator:[1/2,1]")
    assert isinstance(ind, Restriction) and ind(0.5) == 1 and ind(0.49) == 0
    lin = parse_observable("linear:edges=0;0.5;1,values=0;1;1;0")
    assert lin(0.25) == pytest.approx(0.5) and lin(0.75) == pytest.approx(0.5)
    assert parse_observable("one")(0.3) == 1 and parse_observable("x")(0.3) == 0.3
    for bad in ("power:beta=0.3", "cosine", "linear:edges=0;1,values=1"):
        with pytest.raises(InputError):
            parse_observable(bad)
