"""Exact arithmetic in real quadratic fields Q(sqrt D).

Elements are stored as u + v*sqrt(D) with Fraction coefficients and D a
squarefree integer > 1.  Signs and comparisons are decided exactly, and
logarithms of tiny elements are computed through the conjugate so that
heavy cancellation in u + v*sqrt(D) never reaches floating point.
"""
from __future__ import annotations

import math
import numbers
from fractions import Fraction

import mpmath


def squarefree_decomposition(n: int) -> tuple[int, int]:
    """Return (s, d) with n = s*s*d and d squarefree (trial division)."""
    if n <= 0:
        raise ValueError("expected a positive integer")
    s, d = 1, n
    p = 2
    while p * p <= d:
        while d % (p * p) == 0:
            d //= p * p
            s *= p
        p += 1 if p == 2 else 2
    return s, d


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, numbers.Rational):
        return Fraction(x)
    raise TypeError(f"not a rational: {x!r}")


class QuadraticSurd:
    """u + v*sqrt(D), u and v rational, D squarefree.

    Mixed arithmetic with int and Fraction is supported; mixing two different
    fields raises TypeError.  Elements with v == 0 behave like rationals.
    """

    __slots__ = ("u", "v", "D")

    def __init__(self, u, v=0, D: int = 5):
        self.u = _frac(u)
        self.v = _frac(v)
        s, d = squarefree_decomposition(int(D))
        if d == 1:
            # sqrt(D) is rational; fold it into u
            self.u = self.u + self.v * s
            self.v = Fraction(0)
            d = 5
        elif s != 1:
            self.v = self.v * s
        self.D = d

    @classmethod
    def sqrt_of(cls, q) -> "QuadraticSurd | Fraction":
        """sqrt(q) for a positive rational q, exact; rational when q is a square."""
        q = _frac(q)
        if q < 0:
            raise ValueError("negative radicand")
        if q == 0:
            return Fraction(0)
        num = q.numerator * q.denominator
        s, d = squarefree_decomposition(num)
        if d == 1:
            return Fraction(s, q.denominator)
        return cls(0, Fraction(s, q.denominator), d)

    # -- coercion -----------------------------------------------------------
    def _coerce(self, other) -> "QuadraticSurd | None":
        if isinstance(other, QuadraticSurd):
            if other.v == 0:
                return QuadraticSurd(other.u, 0, self.D)
            if self.v != 0 and other.D != self.D:
                raise TypeError("elements of different quadratic fields")
            if self.v == 0:
                return other
            return other
        if isinstance(other, numbers.Rational):
            return QuadraticSurd(other, 0, self.D)
        return None

    def _field(self, other: "QuadraticSurd") -> int:
        if self.v != 0:
            return self.D
        return other.D

    def is_rational(self) -> bool:
        return self.v == 0

    def conjugate(self) -> "QuadraticSurd":
        return QuadraticSurd(self.u, -self.v, self.D)

    def norm(self) -> Fraction:
        return self.u * self.u - self.D * self.v * self.v

    # -- arithmetic ---------------------------------------------------------
    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            if isinstance(other, float):
                return float(self) + other
            return NotImplemented
        return QuadraticSurd(self.u + o.u, self.v + o.v, self._field(o))

    __radd__ = __add__

    def __neg__(self):
        return QuadraticSurd(-self.u, -self.v, self.D)

    def __pos__(self):
        return self

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            if isinstance(other, float):
                return float(self) - other
            return NotImplemented
        return QuadraticSurd(self.u - o.u, self.v - o.v, self._field(o))

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            if isinstance(other, float):
                return other - float(self)
            return NotImplemented
        return o - self

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            if isinstance(other, float):
                return float(self) * other
            return NotImplemented
        D = self._field(o)
        return QuadraticSurd(self.u * o.u + D * self.v * o.v,
                             self.u * o.v + self.v * o.u, D)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            if isinstance(other, float):
                return float(self) / other
            return NotImplemented
        n = o.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero surd")
        c = o.conjugate()
        p = self * c
        return QuadraticSurd(p.u / n, p.v / n, p.D)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            if isinstance(other, float):
                return other / float(self)
            return NotImplemented
        return o / self

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return float(self) ** k
        if k < 0:
            return 1 / (self ** (-k))
        out = QuadraticSurd(1, 0, self.D)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    # -- order --------------------------------------------------------------
    def sign(self) -> int:
        su = (self.u > 0) - (self.u < 0)
        sv = (self.v > 0) - (self.v < 0)
        if sv == 0:
            return su
        if su == 0 or su == sv:
            return sv
        # opposite signs: compare u^2 with D v^2
        n = self.norm()
        return su if n > 0 else sv

    def _cmp(self, other) -> int:
        o = self._coerce(other)
        if o is None:
            f = float(self)
            return (f > other) - (f < other)
        return (self - o).sign()

    def __eq__(self, other):
        try:
            o = self._coerce(other) if not isinstance(other, float) else None
        except TypeError:
            return False
        if o is None:
            return isinstance(other, float) and float(self) == other
        return self.u == o.u and self.v == o.v

    def __hash__(self):
        if self.v == 0:
            return hash(self.u)
        return hash((self.u, self.v, self.D))

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __abs__(self):
        return -self if self.sign() < 0 else self

    def __bool__(self):
        return self.u != 0 or self.v != 0

    def __floor__(self) -> int:
        guess = math.floor(self.to_mpf(30))
        while self < guess:
            guess -= 1
        while self >= guess + 1:
            guess += 1
        return guess

    # -- numeric views ------------------------------------------------------
    def to_mpf(self, dps: int = 30):
        """Value as an mpmath number, accurate to roughly ``dps`` digits."""
        s = self.sign()
        if s == 0:
            return mpmath.mpf(0)
        with mpmath.workdps(dps):
            u = mpmath.mpf(self.u.numerator) / self.u.denominator
            w = mpmath.mpf(self.v.numerator) / self.v.denominator * mpmath.sqrt(self.D)
            if self.v == 0 or (self.u >= 0) == (self.v >= 0):
                val = u + w
            else:
                # cancellation: go through the conjugate
                n = self.norm()
                val = (mpmath.mpf(n.numerator) / n.denominator) / (u - w)
            return +val

    def __float__(self) -> float:
        return float(self.to_mpf(20))

    def log_abs(self) -> float:
        """log|self| without overflow or cancellation; -inf for zero."""
        if not self:
            return -math.inf
        return float(mpmath.log(abs(self.to_mpf(30))))

    def __repr__(self):
        if self.v == 0:
            return f"QuadraticSurd({self.u})"
        return f"QuadraticSurd({self.u} + {self.v}*sqrt({self.D}))"

    def __str__(self):
        if self.v == 0:
            return str(self.u)
        return f"{self.u}+{self.v}*sqrt({self.D})"


def is_exact(x) -> bool:
    return isinstance(x, (numbers.Rational, QuadraticSurd))


def log_abs(x) -> float:
    """log|x| for ints, Fractions (arbitrary size), surds and floats."""
    if isinstance(x, QuadraticSurd):
        return x.log_abs()
    if isinstance(x, numbers.Rational):
        x = Fraction(x)
        if x == 0:
            return -math.inf
        return math.log(abs(x.numerator)) - math.log(x.denominator)
    x = abs(float(x))
    return math.log(x) if x > 0 else -math.inf
