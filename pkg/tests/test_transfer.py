from fractions import Fraction
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tentfarey.errors import CapacityError, InputError, UnsupportedError
from tentfarey.maps import compose_branches, invariant_density, measure_mu
from tentfarey.observables import FunctionObservable, SingularPower, indicator, linear_piecewise
from tentfarey.quadratic import QuadraticSurd
from tentfarey.transfer import (ExperimentSeries, cover_sum_diagnostic, format_value, grid_iterate,
                                make_grid, pf_apply_once, pf_iterate, preimage_union,
                                split_decomposition, tail_eval, transfer_hat_apply,
                                transfer_hat_recursive, wandering_rate)

ident = lambda t: np.asarray(t, dtype=float)
one = lambda t: np.ones_like(np.asarray(t, dtype=float))
xs = np.linspace(0.01, 0.99, 13)


def test_single_step_examples():
    assert pf_apply_once(0, one, xs) == pytest.approx(np.ones_like(xs))
    assert pf_apply_once(1, one, xs) == pytest.approx(2 / (1 + xs) ** 2)
    h = lambda t: invariant_density(0.3, t)
    assert pf_apply_once(0.3, h, xs) == pytest.approx(h(xs), abs=1e-14)


def test_iterate_examples():
    assert pf_iterate(0, ident, 2, xs) == pytest.approx(np.full_like(xs, 0.5))
    assert pf_iterate(0, one, 10, xs) == pytest.approx(np.ones_like(xs))
    with pytest.raises(CapacityError):
        pf_iterate(0.5, one, 30, xs)


@settings(max_examples=25, deadline=None)
@given(st.sampled_from([0, 0.35, Fraction(1, 2), 0.8, 1]), st.integers(1, 7))
def test_tree_matches_stepwise_recursion(r, n):
    # route 2: apply the one-step operator n times to a callable, recursively
    f = linear_piecewise([0, 0.4, 1], [1, -2], [0.2, 3])
    g = f._eval
    for _ in range(n):
        g = (lambda prev: (lambda t: pf_apply_once(r, prev, t)))(g)
    assert pf_iterate(r, f, n, xs) == pytest.approx(g(xs), rel=1e-10, abs=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 8))
def test_hat_tree_matches_recursion(n):
    f = lambda t: np.sin(3 * np.asarray(t)) + 2
    pts = np.linspace(0.05, 1, 9)
    assert transfer_hat_apply(f, pts, n) == pytest.approx(transfer_hat_recursive(f, pts, n), rel=1e-11)


def test_hat_is_conjugated_pf():
    f = lambda t: np.cos(np.asarray(t))
    pts = np.linspace(0.1, 1, 7)
    lhs = transfer_hat_apply(f, pts, 3)
    rhs = pf_iterate(1, lambda t: f(t) / np.asarray(t), 3, pts) * pts
    assert lhs == pytest.approx(rhs, rel=1e-11)


def test_grid_matches_exact_tree():
    f = FunctionObservable(lambda t: 1 + np.asarray(t) ** 2)
    pts = np.array([0.2, 0.5, 0.8])
    exact = pf_iterate(0.5, f, 10, pts)
    grid = grid_iterate(0.5, f, [10], pts, N=2 ** 12)[10]
    assert grid == pytest.approx(exact, rel=1e-4)
    g = make_grid(5)
    assert g[0] == 0 and g[-1] == 1 and np.all(np.diff(g) > 0)


def test_grid_refuses_singular():
    with pytest.raises(UnsupportedError):
        grid_iterate(1, SingularPower(0.3, 0.5), [10], xs)


def test_tail_examples():
    sq = QuadraticSurd(-1, 1, 2)
    assert tail_eval(1, sq, 0.5, 2, sq) == math.inf
    val = tail_eval(0, Fraction(1, 3), 0.5, 1, 0)
    assert val == pytest.approx((math.sqrt(3) + math.sqrt(1.5)) / 2, rel=1e-12)


def test_split_sums_to_full_iterate():
    v = SingularPower(1 / 3, 0.4)
    pts = np.array([0.11, 0.47, 0.83])
    bv, tail = split_decomposition(Fraction(1, 2), v, 10, pts)
    full = pf_iterate(Fraction(1, 2), v, 10, pts)
    assert bv + tail == pytest.approx(full, rel=1e-10)
    # far from the orbit, the tail is small for large n
    _, tail16 = split_decomposition(Fraction(1, 2), v, 16, np.array([0.9]))
    assert tail16[0] < 1e-2


def test_wandering_rate_examples():
    assert wandering_rate(1, 1) == pytest.approx(math.log(2))
    assert wandering_rate(1, 100) == pytest.approx(math.log(101))
    assert wandering_rate(0, 1) == pytest.approx(0.5)
    assert preimage_union(1, 3) == [(Fraction(1, 4), Fraction(1))]
    for n in (1, 5, 20):
        assert wandering_rate(1, n, method="pullback") == pytest.approx(math.log(n + 1), rel=1e-13)
    # r < 1: everything but [0, f_0^(n-1)(1/2)] is covered
    gap = compose_branches(Fraction(1, 2), (0,) * 29)(Fraction(1, 2))
    assert wandering_rate(Fraction(1, 2), 30) == pytest.approx(1 - measure_mu(0.5, 0, float(gap)), rel=1e-13)


def test_cover_sum_geometric_bound():
    out = cover_sum_diagnostic(0, Fraction(1, 3), 0.5, 1.0, range(5, 40), eta_K=1 / 3)
    assert math.isfinite(out["geometric_bound"])
    r1 = cover_sum_diagnostic(1, QuadraticSurd(-1, 1, 2), 0.5, 0.1, range(1, 201))
    assert math.isfinite(r1["partial_sum"])


def test_series_formats_are_deterministic():
    s = ExperimentSeries(meta={"k": 1})
    s.add(theorem="t", r=1.0, alpha=0.5, beta="b", x=0.1, n=2, backend="exact", value=math.inf,
          target=0.1 + 0.2, normalized=1 / 3)
    csv1, csv2 = s.to_csv(), s.to_csv()
    assert csv1 == csv2 and "inf" in csv1 and repr(0.1 + 0.2) in csv1
    assert '"inf"' in s.to_json()
    assert format_value(math.inf) == "inf" and format_value(0.5) == "0.5"
