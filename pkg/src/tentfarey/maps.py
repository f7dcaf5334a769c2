"""The interpolating family T_r between the tent map (r=0) and the Farey map (r=1).

Inverse branches are Mobius maps.  A word (w1, ..., wn) in {0,1}^n is sent to
the composition f_w1 o ... o f_wn, represented by a 2x2 matrix.  At r = 0 and
r = 1 matrices have integer entries and everything is exact; for a rational r
given as a Fraction entries stay rational; for a float r matrices are
renormalised after every product and the discarded scale is kept in log form.
"""
from __future__ import annotations

import math
import numbers
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import InputError, NumericalDomainError
from .quadratic import QuadraticSurd, is_exact, log_abs

HALF = Fraction(1, 2)


def validate_r(r):
    """Check 0 <= r <= 1 and canonicalise: 0 and 1 become ints, integral Fractions ints."""
    if isinstance(r, bool) or not isinstance(r, numbers.Real):
        raise InputError(f"r must be a real number, got {r!r}")
    if isinstance(r, float) and math.isnan(r):
        raise InputError("r is NaN")
    if not 0 <= r <= 1:
        raise InputError(f"r must lie in [0, 1], got {r}")
    if r == 0:
        return 0
    if r == 1:
        return 1
    if isinstance(r, numbers.Rational):
        return Fraction(r)
    return float(r)


def _check_x(x):
    if isinstance(x, np.ndarray):
        if np.any((x < 0) | (x > 1)) or np.any(np.isnan(x)):
            raise InputError("points must lie in [0, 1]")
        return
    if not 0 <= x <= 1:
        raise InputError(f"x must lie in [0, 1], got {x}")


def eval_map(r, x):
    """T_r(x).  The point 1/2 belongs to the left branch (value 1)."""
    r = validate_r(r)
    if isinstance(x, np.ndarray):
        _check_x(x)
        x = x.astype(float)
        r = float(r)
        left = x <= 0.5
        out = np.empty_like(x)
        xl = x[left]
        out[left] = (2 - r) * xl / (1 - r * xl)
        xr = x[~left]
        out[~left] = (2 - r) * (1 - xr) / (1 - r + r * xr)
        return out
    _check_x(x)
    if isinstance(r, float) and is_exact(x):
        x = float(x)
    if x <= HALF:
        return (2 - r) * x / (1 - r * x)
    return (2 - r) * (1 - x) / (1 - r + r * x)


@dataclass(frozen=True)
class MobiusMatrix:
    """x -> (a x + b) / (c x + d).

    The represented map is insensitive to scaling; ``log_scale`` records the
    factor removed by renormalisation (true matrix = exp(log_scale) * stored),
    and ``log_abs_det`` is log|det| of the true matrix.
    """
    a: object
    b: object
    c: object
    d: object
    log_scale: float = 0.0
    log_abs_det: float = 0.0

    @property
    def entries(self) -> tuple:
        return (self.a, self.b, self.c, self.d)

    @property
    def exact(self) -> bool:
        return all(is_exact(e) for e in self.entries)

    def det(self):
        return self.a * self.d - self.b * self.c

    def __call__(self, x):
        num, den = self.a * x + self.b, self.c * x + self.d
        if isinstance(num, int) and isinstance(den, int):
            return Fraction(num, den)    # keep integer matrices exact
        return num / den

    def __matmul__(self, other: "MobiusMatrix") -> "MobiusMatrix":
        a = self.a * other.a + self.b * other.c
        b = self.a * other.b + self.b * other.d
        c = self.c * other.a + self.d * other.c
        d = self.c * other.b + self.d * other.d
        return MobiusMatrix(a, b, c, d, self.log_scale + other.log_scale,
                            self.log_abs_det + other.log_abs_det)

    def normalized(self) -> "MobiusMatrix":
        if self.exact:
            return self
        m = max(abs(self.a), abs(self.b), abs(self.c), abs(self.d))
        if m == 0 or m == 1:
            return self
        return MobiusMatrix(self.a / m, self.b / m, self.c / m, self.d / m,
                            self.log_scale + math.log(m), self.log_abs_det)

    def derivative(self, x):
        """|d/dx| of the map at x."""
        return branch_derivative(self, x)


def inverse_branch_matrix(r, digit: int) -> MobiusMatrix:
    """Matrix of f_{r,digit}: (1, 0; r, 2-r) or (-(1-r), 2-r; r, 2-r)."""
    r = validate_r(r)
    if digit not in (0, 1):
        raise InputError(f"digit must be 0 or 1, got {digit!r}")
    ld = math.log(2 - float(r))
    if digit == 0:
        return MobiusMatrix(1, 0, r, 2 - r, 0.0, ld)
    return MobiusMatrix(-(1 - r), 2 - r, r, 2 - r, 0.0, ld)


def _check_word(word) -> tuple[int, ...]:
    w = tuple(int(d) for d in word)
    if any(d not in (0, 1) for d in w):
        raise InputError(f"word must consist of 0/1 letters, got {word!r}")
    return w


def compose_branches(r, word: Sequence[int]) -> MobiusMatrix:
    """Matrix of f_{r,w1} o ... o f_{r,wn}; the empty word gives the identity."""
    r = validate_r(r)
    w = _check_word(word)
    M = MobiusMatrix(1, 0, 0, 1)
    mats = (inverse_branch_matrix(r, 0), inverse_branch_matrix(r, 1))
    for dgt in w:
        M = (M @ mats[dgt]).normalized()
    return M


def mobius_eval(M: MobiusMatrix, x):
    return M(x)


def branch_derivative(M: MobiusMatrix, x):
    """|det| / (c x + d)^2 of the true (unscaled) matrix.

    Exact entries and exact x give an exact result.  Otherwise |det| is taken
    from the tracked log-determinant so no cancellation in a d - b c occurs.
    """
    if M.exact and is_exact(x):
        den = M.c * x + M.d
        if den == 0:
            raise NumericalDomainError("pole of the Mobius map")
        return abs(M.det()) / (den * den)
    den = M.c * x + M.d
    if isinstance(den, np.ndarray) or isinstance(x, np.ndarray):
        den = np.abs(np.asarray(den, dtype=float))
        return np.exp(M.log_abs_det - 2 * M.log_scale - 2 * np.log(den))
    return math.exp(M.log_abs_det - 2 * M.log_scale - 2 * log_abs(den))


def invariant_density(r, x):
    """Density h_r of the absolutely continuous invariant measure mu_r.

    h_0 = 1, h_r(x) = (-r/ln(1-r)) / (1 - r + r x), h_1(x) = 1/x (infinite measure).
    """
    r = validate_r(r)
    xa = np.asarray(x, dtype=float)
    if r == 0:
        out = np.ones_like(xa)
    elif r == 1:
        with np.errstate(divide="ignore"):
            out = 1.0 / xa
    else:
        rf = float(r)
        out = (-rf / math.log1p(-rf)) / (1 - rf + rf * xa)
    return out if isinstance(x, np.ndarray) else float(out)


def measure_mu(r, a, b) -> float:
    """mu_r([a, b]) in closed form; mu_1 of an interval touching 0 is +inf."""
    r = validate_r(r)
    a, b = float(a), float(b)
    if not 0 <= a <= b <= 1:
        raise InputError(f"need 0 <= a <= b <= 1, got [{a}, {b}]")
    if a == b:
        return 0.0
    if r == 0:
        return b - a
    if r == 1:
        if a == 0:
            return math.inf
        return math.log(b / a)
    rf = float(r)
    return -math.log((1 - rf + rf * b) / (1 - rf + rf * a)) / math.log1p(-rf)


def fixed_point_nonzero(r, exact: bool = False):
    """The fixed point of T_r in (1/2, 1].

    Written as 1 - 2/(3 + sqrt(9 - 4r)), an algebraically identical and
    cancellation-free form of 1 - (3 - sqrt(9-4r))/(2r) that also covers
    r = 0 (value 2/3).  With ``exact=True`` and rational r a QuadraticSurd
    (or Fraction) is returned.
    """
    r = validate_r(r)
    if exact:
        if isinstance(r, float):
            raise InputError("exact fixed point needs a rational r")
        root = QuadraticSurd.sqrt_of(9 - 4 * Fraction(r))
        return 1 - 2 / (3 + root)
    return 1.0 - 2.0 / (3.0 + math.sqrt(9.0 - 4.0 * float(r)))
