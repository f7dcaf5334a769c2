"""Symbolic coding of points, cylinders and adjacent cylinders."""
from __future__ import annotations

import itertools
import math
import random
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import InputError
from .maps import (HALF, MobiusMatrix, _check_word, branch_derivative,
                   compose_branches, eval_map, validate_r)
from .quadratic import is_exact

# float orbits of an expanding map lose one bit per iterate or so; past this
# many steps the digits of a float start point are noise
FLOAT_ORBIT_LIMIT = 45

Word = tuple[int, ...]


def word_to_index(word: Sequence[int]) -> int:
    """Binary index with the first letter most significant."""
    idx = 0
    for d in word:
        idx = 2 * idx + d
    return idx


def index_to_word(idx: int, n: int) -> Word:
    return tuple((idx >> (n - 1 - i)) & 1 for i in range(n))


def code_point(r, beta, n: int) -> Word:
    """First n letters of the coding: letter k is 0 iff T_r^{k-1}(beta) <= 1/2.

    Exact inputs (Fraction, QuadraticSurd, or a ContinuedFraction at r = 1)
    give exact codings.  Floats emit a warning past ``FLOAT_ORBIT_LIMIT``.
    """
    r = validate_r(r)
    if n < 0:
        raise InputError("n must be >= 0")
    from .contfrac import ContinuedFraction
    if isinstance(beta, ContinuedFraction):
        if r == 1:
            return beta.farey_coding(n)
        beta = beta.value()
    if not 0 <= beta <= 1:
        raise InputError(f"beta must lie in [0, 1], got {beta}")
    exact = is_exact(beta) and not isinstance(r, float)
    if not exact:
        beta = float(beta)
        if n > FLOAT_ORBIT_LIMIT:
            warnings.warn(f"float orbit over {n} iterates: letters beyond ~{FLOAT_ORBIT_LIMIT} "
                          "are not reliable; pass an exact beta", RuntimeWarning, stacklevel=2)
    out = []
    x = beta
    for _ in range(n):
        out.append(0 if x <= HALF else 1)
        x = eval_map(r, x)
    return tuple(out)


def cylinder_interval(r, word: Sequence[int]) -> tuple:
    """[w]_r = f_{r,w}([0,1]) as an ordered pair of endpoints."""
    M = compose_branches(r, word)
    return _interval_of(M)


def _interval_of(M: MobiusMatrix) -> tuple:
    e0, e1 = M(0), M(1)
    return (e0, e1) if e0 <= e1 else (e1, e0)


@dataclass(frozen=True)
class NeighborTriple:
    minus: Word
    center: Word
    plus: Word

    def words(self) -> tuple[Word, ...]:
        """Distinct words of the triple in order minus, center, plus."""
        out = []
        for w in (self.minus, self.center, self.plus):
            if w not in out:
                out.append(w)
        return tuple(out)


def _same(u, v, exact: bool) -> bool:
    if exact:
        return u == v
    return abs(float(u) - float(v)) <= 1e-12 * max(1.0, abs(float(u)))


def adjacent_words(r, word: Sequence[int]) -> tuple[Word | None, Word | None]:
    """(left, right) neighbours of a cylinder, None where [w] touches 0 or 1.

    Adjacent cylinders of the same length differ from w in exactly one
    letter, so only the n single-letter flips are candidates.
    """
    r = validate_r(r)
    w = _check_word(word)
    lo, hi = cylinder_interval(r, w)
    exact = not isinstance(r, float)
    left = right = None
    for i in range(len(w)):
        cand = w[:i] + (1 - w[i],) + w[i + 1:]
        clo, chi = cylinder_interval(r, cand)
        if left is None and _same(chi, lo, exact) and not _same(clo, lo, exact):
            left = cand
        if right is None and _same(clo, hi, exact) and not _same(chi, hi, exact):
            right = cand
    return left, right


def neighbor_words(r, beta, n: int) -> NeighborTriple:
    """The coding word of beta together with the cylinders just below and above.

    Where no cylinder exists on one side (the centre touches 0 or 1) that
    side repeats the centre word.
    """
    center = code_point(r, beta, n)
    left, right = adjacent_words(r, center)
    return NeighborTriple(left if left is not None else center, center,
                          right if right is not None else center)


def all_cylinders(r, n: int) -> list[tuple[Word, tuple]]:
    """Every length-n word with its cylinder, sorted left to right."""
    out = [(w, cylinder_interval(r, w)) for w in itertools.product((0, 1), repeat=n)]
    out.sort(key=lambda t: (t[1][0], t[1][1]))
    return out


# -- bounded distortion diagnostics -------------------------------------------

def derivative_bounds(r) -> tuple[float, float]:
    """(min, max) of |f'_{r,i}| over [0,1] and both branches: ((2-r)/4, 1/(2-r))."""
    r = validate_r(r)
    vals = [float(branch_derivative(compose_branches(r, (d,)), x))
            for d in (0, 1) for x in (0.0, 1.0)]
    return min(vals), max(vals)


def _derivative_range(M: MobiusMatrix, lo, hi) -> tuple[float, float]:
    # |f'| = |det|/(cx+d)^2 is monotone on any interval without a pole
    a = float(branch_derivative(M, lo))
    b = float(branch_derivative(M, hi))
    return min(a, b), max(a, b)


def distortion_ratio(r, phi: Sequence[int], omega: Sequence[int]) -> float:
    """sup over x, y in [omega] of |f'_phi(x)| / |f'_phi(y)|, exact up to rounding."""
    M = compose_branches(r, phi)
    lo, hi = cylinder_interval(r, omega)
    dmin, dmax = _derivative_range(M, lo, hi)
    return dmax / dmin


def distortion_constant(r, n: int, m: int, samples: int = 200, seed: int = 0) -> float:
    """Largest distortion ratio over sampled phi in {0,1}^n and omega in {0,1}^m.

    A lower estimate of the conditional distortion constant at depth m; it
    should decrease towards 1 as m grows when r < 1.
    """
    rng = random.Random(seed)
    best = 1.0
    for _ in range(samples):
        phi = tuple(rng.randint(0, 1) for _ in range(n))
        omega = tuple(rng.randint(0, 1) for _ in range(m))
        best = max(best, distortion_ratio(r, phi, omega))
    return best


def neighbor_comparability(r, n: int) -> float:
    """max over adjacent words w, v of length n of sup|f'_w| / inf|f'_v| on [0,1]."""
    r = validate_r(r)
    if n > 14:
        raise InputError("exhaustive comparability limited to n <= 14")
    one = Fraction(1) if not isinstance(r, float) else 1.0
    ranges = {}
    for w in itertools.product((0, 1), repeat=n):
        ranges[w] = _derivative_range(compose_branches(r, w), 0 * one, one)
    worst = 1.0
    for w in ranges:
        for v in adjacent_words(r, w):
            if v is not None:
                worst = max(worst, ranges[w][1] / ranges[v][0], ranges[v][1] / ranges[w][0])
    return worst
