"""Observables: vectorised functions on [0, 1] with exact variation where possible.

Values are floats; +inf (math.inf) is the extended-real value of a power
singularity at its pole.  Every observable evaluates numpy arrays elementwise.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

from .errors import InputError, NumericalDomainError


class Observable:
    """Base class.  Subclasses implement ``_eval`` on float arrays."""

    #: points in [0,1] where the observable is unbounded
    singularities: tuple[float, ...] = ()

    def __call__(self, x):
        xa = np.asarray(x, dtype=float)
        out = self._eval(np.atleast_1d(xa))
        return out.reshape(xa.shape) if xa.ndim else float(out[0])

    def _eval(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def breakpoints(self) -> tuple[float, ...]:
        """Points where the observable may jump or change monotonicity."""
        return ()

    def integral(self) -> float:
        """Lebesgue integral over [0, 1]."""
        pts = sorted(set(p for p in self.breakpoints() + self.singularities if 0 < p < 1))
        edges = [0.0] + pts + [1.0]
        total = 0.0
        for a, b in zip(edges[:-1], edges[1:]):
            if b > a:
                v, _ = integrate.quad(lambda t: float(self(t)), a, b, limit=200)
                total += v
        return total

    def __add__(self, other: "Observable") -> "Observable":
        return Combination((self, other), "sum")

    def __mul__(self, other: "Observable") -> "Observable":
        return Combination((self, other), "product")


@dataclass(frozen=True, eq=False)
class SingularPower(Observable):
    """scale * |beta - x|^(-alpha), +inf at x = beta."""
    beta: float
    alpha: float
    scale: float = 1.0

    def __post_init__(self):
        if not 0 <= self.beta <= 1:
            raise InputError("beta must lie in [0, 1]")
        if not 0 < self.alpha < 1:
            raise InputError("alpha must lie in (0, 1)")

    @property
    def singularities(self):
        return (float(self.beta),)

    def _eval(self, x):
        d = np.abs(float(self.beta) - x)
        with np.errstate(divide="ignore"):
            return self.scale * np.where(d == 0, np.inf, d ** (-self.alpha))

    def breakpoints(self):
        return (float(self.beta),)

    def integral(self):
        b, a = float(self.beta), self.alpha
        return self.scale * (b ** (1 - a) + (1 - b) ** (1 - a)) / (1 - a)


@dataclass(frozen=True)
class Piece:
    """A function on one interval, monotone between consecutive turning points."""
    func: Callable[[np.ndarray], np.ndarray]
    turning_points: tuple[float, ...] = ()


@dataclass(frozen=True, eq=False)
class PiecewiseBV(Observable):
    """Right-continuous function given piecewise on [x_0, x_1), ..., [x_{k-1}, x_k].

    ``edges`` is increasing with x_0 = 0 and x_k = 1; piece i is used on
    [x_i, x_{i+1}) (the last one also at 1).  Each piece must be monotone
    between its declared turning points, which makes ``variation`` exact.
    """
    edges: tuple[float, ...]
    pieces: tuple[Piece, ...]

    def __post_init__(self):
        e = tuple(float(t) for t in self.edges)
        if len(e) != len(self.pieces) + 1 or e[0] != 0.0 or e[-1] != 1.0 or any(
                b <= a for a, b in zip(e[:-1], e[1:])):
            raise InputError("edges must increase from 0 to 1, one more than pieces")
        object.__setattr__(self, "edges", e)

    def _eval(self, x):
        idx = np.clip(np.searchsorted(self.edges, x, side="right") - 1, 0, len(self.pieces) - 1)
        out = np.zeros_like(x)
        for i, p in enumerate(self.pieces):
            sel = idx == i
            if np.any(sel):
                out[sel] = p.func(x[sel])
        return out

    def breakpoints(self):
        inner = list(self.edges[1:-1])
        for p in self.pieces:
            inner.extend(p.turning_points)
        return tuple(sorted(set(inner)))


def _fn_value(f, t: float) -> float:
    return float(np.asarray(f(np.array([t])))[0])


def linear_piecewise(edges: Sequence[float], left_values: Sequence[float],
                     right_values: Sequence[float]) -> PiecewiseBV:
    """Affine on each [x_i, x_{i+1}) from left_values[i] to right_values[i]."""
    pieces = []
    for a, b, u, v in zip(edges[:-1], edges[1:], left_values, right_values):
        slope = (v - u) / (b - a)
        pieces.append(Piece(lambda t, a=a, u=u, s=slope: u + s * (t - a)))
    return PiecewiseBV(tuple(edges), tuple(pieces))


def indicator(a: float, b: float, closed_right: bool = True) -> PiecewiseBV:
    """1 on [a, b] (or [a, b)), 0 elsewhere."""
    one = Piece(lambda t: np.ones_like(t))
    zero = Piece(lambda t: np.zeros_like(t))
    if not 0 <= a < b <= 1:
        raise InputError("need 0 <= a < b <= 1")
    edges, pieces = [0.0], []
    if a > 0:
        edges.append(a)
        pieces.append(zero)
    pieces.append(one)
    if b < 1:
        if closed_right:
            b = float(np.nextafter(b, 2.0))
        edges.append(b)
        pieces.append(zero)
    edges.append(1.0)
    return PiecewiseBV(tuple(edges), tuple(pieces))


@dataclass(frozen=True, eq=False)
class Restriction(Observable):
    """f * 1_I for I = [lo, hi] with chosen closedness at each end."""
    base: Observable
    lo: float
    hi: float
    closed_lo: bool = True
    closed_hi: bool = True

    @property
    def singularities(self):
        return tuple(s for s in self.base.singularities if self.lo <= s <= self.hi)

    def mask(self, x):
        m = (x >= self.lo) if self.closed_lo else (x > self.lo)
        return m & ((x <= self.hi) if self.closed_hi else (x < self.hi))

    def _eval(self, x):
        out = np.zeros_like(x)
        m = self.mask(x)
        if np.any(m):
            out[m] = self.base._eval(x[m])
        return out

    def breakpoints(self):
        return tuple(sorted(set((self.lo, self.hi) + tuple(
            p for p in self.base.breakpoints() if self.lo < p < self.hi))))

    def integral(self):
        inner = [p for p in self.base.breakpoints() + self.base.singularities if self.lo < p < self.hi]
        edges = [self.lo] + sorted(set(inner)) + [self.hi]
        return sum(integrate.quad(lambda t: float(self.base(t)), a, b, limit=200)[0]
                   for a, b in zip(edges[:-1], edges[1:]) if b > a)


@dataclass(frozen=True, eq=False)
class Combination(Observable):
    parts: tuple[Observable, ...]
    op: str = "sum"

    @property
    def singularities(self):
        return tuple(sorted(set(s for p in self.parts for s in p.singularities)))

    def _eval(self, x):
        vals = [p._eval(x) for p in self.parts]
        if self.op == "sum":
            return np.sum(vals, axis=0)
        out = vals[0]
        for v in vals[1:]:
            out = out * v
        return out

    def breakpoints(self):
        return tuple(sorted(set(b for p in self.parts for b in p.breakpoints())))

    def integral(self):
        if self.op == "sum":
            return sum(p.integral() for p in self.parts)
        return super().integral()


@dataclass(frozen=True, eq=False)
class FunctionObservable(Observable):
    """Wrap a vectorised callable; ``breakpoints`` should list every point where
    the function jumps or turns, so that sampled variation is exact."""
    func: Callable[[np.ndarray], np.ndarray]
    points: tuple[float, ...] = ()
    poles: tuple[float, ...] = ()

    @property
    def singularities(self):
        return self.poles

    def _eval(self, x):
        return np.asarray(self.func(x), dtype=float) * np.ones_like(x)

    def breakpoints(self):
        return self.points


def eval_observable(f: Observable, x):
    return f(x)


def integral_lebesgue(f: Observable) -> float:
    return f.integral()


def _left_limit(f: Observable, t: float) -> float:
    if isinstance(f, PiecewiseBV):
        i = int(np.searchsorted(f.edges, t, side="left")) - 1
        i = min(max(i, 0), len(f.pieces) - 1)
        return _fn_value(f.pieces[i].func, t)
    return float(f(float(np.nextafter(t, -1.0))))


def variation(f: Observable, a: float = 0.0, b: float = 1.0) -> float:
    """Total variation of a right-continuous observable on [a, b].

    Exact for observables that are monotone between their breakpoints: on each
    monotone stretch the variation is the difference of the end values, and
    every breakpoint contributes its jump.  A singularity in [a, b] raises.
    """
    if not 0 <= a <= b <= 1:
        raise InputError("need 0 <= a <= b <= 1")
    if any(a <= s <= b for s in f.singularities):
        raise NumericalDomainError("variation is infinite: singularity inside the interval")
    pts = [a] + sorted(set(p for p in f.breakpoints() if a < p < b)) + [b]
    total = 0.0
    for u, v in zip(pts[:-1], pts[1:]):
        start = float(f(u))
        end = _left_limit(f, v)
        # the jump at v (right-continuity puts it at v itself, including v = b)
        total += abs(end - start) + abs(float(f(v)) - end)
    return total


def sup_norm(f: Observable, a: float = 0.0, b: float = 1.0) -> float:
    """Supremum of |f| on [a, b] (endpoint and one-sided-limit values of each monotone stretch)."""
    if any(a <= s <= b for s in f.singularities):
        return math.inf
    pts = [a] + sorted(set(p for p in f.breakpoints() if a < p < b)) + [b]
    vals = []
    for u, v in zip(pts[:-1], pts[1:]):
        vals += [abs(float(f(u))), abs(_left_limit(f, v))]
    vals.append(abs(float(f(b))))
    return max(vals)


def bv_norm(f: Observable, a: float = 0.0, b: float = 1.0) -> float:
    return sup_norm(f, a, b) + variation(f, a, b)


# -- text form used by the command line ---------------------------------------------

_KV = re.compile(r"(\w+)=([^,]+)")


def parse_observable(text: str) -> Observable:
    """'power:beta=sqrt2-1,alpha=0.5[,scale=2]', 'indicator:[0.5,1]',
    'linear:edges=0;0.5;1,values=0;1;1;0' (left/right values per piece),
    'one', 'x' (identity)."""
    from .contfrac import as_exact_point, parse_number
    s = text.strip()
    kind, _, rest = s.partition(":")
    kind = kind.strip().lower()
    if kind == "power":
        kv = dict(_KV.findall(rest))
        if "beta" not in kv or "alpha" not in kv:
            raise InputError("power observable needs beta= and alpha=")
        beta = as_exact_point(parse_number(kv["beta"]))
        num = lambda t: float(as_exact_point(parse_number(t)))
        return SingularPower(float(beta), num(kv["alpha"]), num(kv.get("scale", "1")))
    if kind == "indicator":
        m = re.match(r"^\s*([\[(])\s*([^,]+),\s*([^\])]+)([\])])\s*$", rest)
        if not m:
            raise InputError(f"malformed indicator {text!r}")
        lo = float(as_exact_point(parse_number(m.group(2))))
        hi = float(as_exact_point(parse_number(m.group(3))))
        return Restriction(FunctionObservable(lambda t: np.ones_like(t)), lo, hi,
                           m.group(1) == "[", m.group(4) == "]")
    if kind == "linear":
        kv = dict(_KV.findall(rest))
        try:
            edges = [float(t) for t in kv["edges"].split(";")]
            vals = [float(t) for t in kv["values"].split(";")]
        except (KeyError, ValueError) as exc:
            raise InputError(f"malformed linear observable {text!r}") from exc
        if len(vals) != 2 * (len(edges) - 1):
            raise InputError("linear observable needs two values per piece")
        return linear_piecewise(edges, vals[0::2], vals[1::2])
    if kind == "one":
        return FunctionObservable(lambda t: np.ones_like(t))
    if kind == "x":
        return FunctionObservable(lambda t: t)
    raise InputError(f"unknown observable kind {kind!r}")
