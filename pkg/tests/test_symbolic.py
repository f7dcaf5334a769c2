from fractions import Fraction
import itertools
import warnings

import pytest
from hypothesis import given, settings, strategies as st

from tentfarey.maps import compose_branches, eval_map
from tentfarey.quadratic import QuadraticSurd
from tentfarey.symbolic import (adjacent_words, all_cylinders, code_point, cylinder_interval,
                                derivative_bounds, distortion_constant, distortion_ratio,
                                index_to_word, neighbor_comparability, neighbor_words,
                                word_to_index)

GOLDEN = QuadraticSurd(Fraction(-1, 2), Fraction(1, 2), 5)
exact_rs = st.sampled_from([0, Fraction(1, 5), Fraction(1, 2), Fraction(4, 5), 1])


def test_coding_examples():
    assert code_point(1, Fraction(2, 3), 5) == (1, 0, 1, 0, 0)
    for r in (0, Fraction(1, 3), 1):
        assert code_point(r, Fraction(1, 2), 4) == (0, 1, 0, 0)
    assert code_point(0, Fraction(3, 10), 3) == (0, 1, 1)


def test_float_orbit_warning():
    with pytest.warns(RuntimeWarning):
        code_point(0.3, 0.3, 60)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        code_point(0.3, 0.3, 20)


def test_cylinder_examples():
    for r in (0, Fraction(1, 2), 1):
        assert cylinder_interval(r, (0,)) == (0, Fraction(1, 2))
        assert cylinder_interval(r, (1,)) == (Fraction(1, 2), 1)
    assert cylinder_interval(1, (0, 0)) == (0, Fraction(1, 3))


def test_word_index_roundtrip():
    for n in range(1, 7):
        for i in range(2 ** n):
            assert word_to_index(index_to_word(i, n)) == i
    assert index_to_word(1, 3) == (0, 0, 1)


@pytest.mark.parametrize("r", [0, Fraction(1, 3), Fraction(1, 2), 1])
@pytest.mark.parametrize("n", [1, 3, 6])
def test_cylinders_tile_the_interval(r, n):
    cyl = all_cylinders(r, n)
    assert len(cyl) == 2 ** n
    assert cyl[0][1][0] == 0 and cyl[-1][1][1] == 1
    for (_, (a, b)), (_, (c, d)) in zip(cyl, cyl[1:]):
        assert b == c and a < b


@settings(max_examples=40)
@given(exact_rs, st.integers(1, 8), st.data())
def test_adjacency_matches_sorted_order(r, n, data):
    cyl = all_cylinders(r, n)
    i = data.draw(st.integers(0, len(cyl) - 1))
    left, right = adjacent_words(r, cyl[i][0])
    assert left == (cyl[i - 1][0] if i > 0 else None)
    assert right == (cyl[i + 1][0] if i < len(cyl) - 1 else None)


@settings(max_examples=60)
@given(exact_rs, st.fractions(0, 1, max_denominator=97), st.integers(1, 10))
def test_point_lies_in_its_cylinder(r, beta, n):
    w = code_point(r, beta, n)
    lo, hi = cylinder_interval(r, w)
    assert lo <= beta <= hi
    # and the coding agrees with the orbit letters
    x = beta
    for letter in w:
        assert letter == (0 if x <= Fraction(1, 2) else 1)
        x = eval_map(r, x)


def test_neighbor_examples():
    t = neighbor_words(1, GOLDEN, 2)
    assert (t.minus, t.center, t.plus) == ((0, 1), (1, 1), (1, 0))
    t0 = neighbor_words(Fraction(1, 2), 0, 2)
    assert t0.center == (0, 0) and t0.minus == t0.center
    t1 = neighbor_words(0, Fraction(3, 10), 1)
    assert t1.minus == t1.center == (0,) and t1.plus == (1,)
    assert len(set(t1.words())) == 2


def test_derivative_bounds():
    lo, hi = derivative_bounds(0.5)
    assert lo == pytest.approx(1.5 / 4) and hi == pytest.approx(1 / 1.5)


def test_distortion_shrinks_with_depth():
    r = Fraction(1, 2)
    d2 = distortion_constant(r, 6, 2, samples=100)
    d8 = distortion_constant(r, 6, 8, samples=100)
    assert 1 <= d8 < d2
    assert distortion_ratio(r, (0, 1, 1), ()) >= distortion_ratio(r, (0, 1, 1), (0, 1))


def test_neighbor_comparability_bounded():
    vals = [neighbor_comparability(Fraction(1, 2), n) for n in (2, 5, 8)]
    assert all(1 <= v < 20 for v in vals)
