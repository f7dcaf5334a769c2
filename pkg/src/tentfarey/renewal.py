"""First returns of the Farey map T_1 to Y = [1/2, 1] and the renewal sequence.

The return time on Y is constant on U_k = [k/(k+1), (k+1)/(k+2)]; the first
return operators R_n are explicit products of the r = 1 inverse branches.
"""
from __future__ import annotations

import math
from fractions import Fraction
from typing import Callable

import numpy as np
from scipy import integrate

from .errors import InputError
from .maps import eval_map, measure_mu
from .observables import FunctionObservable, Observable, bv_norm, sup_norm, variation
from .transfer import _as_callable


def first_return_time(y) -> int:
    """phi_Y(y) = min{n >= 1 : T_1^n(y) in Y} for y in Y.

    A point shared by U_k and U_{k+1} (i.e. (k+1)/(k+2)) returns after k
    steps, so it goes to the lower index.  y = 1 maps to the fixed point 0
    and never returns; by convention 1 is returned.
    """
    if isinstance(y, float):
        y = Fraction(y)
    if not Fraction(1, 2) <= y <= 1:
        raise InputError(f"y must lie in [1/2, 1], got {y}")
    if y == 1:
        return 1
    q = 1 / (1 - y)
    return max(1, math.ceil(q) - 2)


def return_time_by_orbit(y, max_steps: int = 10 ** 6) -> int | None:
    """Reference route: iterate T_1 exactly until the orbit re-enters Y."""
    x = Fraction(y) if isinstance(y, float) else y
    for n in range(1, max_steps + 1):
        x = eval_map(1, x)
        if x >= Fraction(1, 2):
            return n
        if x == 0:
            return None
    return None


def return_piece(n: int) -> tuple[Fraction, Fraction]:
    """U_n = [n/(n+1), (n+1)/(n+2)]."""
    if n < 1:
        raise InputError("n must be >= 1")
    return Fraction(n, n + 1), Fraction(n + 1, n + 2)


def return_piece_measure(n: int) -> float:
    """mu_1(U_n) = ln(1 + 1/(n(n+2)))."""
    if n < 1:
        raise InputError("n must be >= 1")
    return math.log1p(1.0 / (n * (n + 2)))


def first_return_operator(f, n: int, x):
    """R_n f(x) = 1_[1/2,1)(x) f_0^n(x) prod_{k=0}^{n-2} f_1(f_0^k(x)) f(f_1(f_0^{n-1}(x)))."""
    if n < 1:
        raise InputError("n must be >= 1")
    g = _as_callable(f)
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    prod = np.ones_like(xa)
    for k in range(n - 1):
        f0k = xa / (1 + k * xa)
        prod *= 1 / (1 + f0k)
    f0n = xa / (1 + n * xa)
    f0n1 = xa / (1 + (n - 1) * xa)
    inside = (xa >= 0.5) & (xa < 1)
    out = np.zeros_like(xa)
    if np.any(inside):
        out[inside] = f0n[inside] * prod[inside] * g(1 / (1 + f0n1[inside]))
    return float(out[0]) if np.ndim(x) == 0 else out.reshape(np.shape(x))


def r1_partial_sum(f, m: int, x) -> float:
    """sum_{n=1}^m R_n f(x) for a single x in the interior of Y.

    Accumulates the branch product once across n, so the cost is O(m).
    """
    x = float(x)
    if not 0.5 <= x < 1:
        return 0.0
    if m < 1:
        raise InputError("m must be >= 1")
    g = _as_callable(f)
    prod = 1.0
    terms = []
    for n in range(1, m + 1):
        if n >= 2:
            prod *= 1 / (1 + x / (1 + (n - 2) * x))
        psi = 1 / (1 + x / (1 + (n - 1) * x))
        terms.append((x / (1 + n * x)) * prod * float(g(np.array([psi]))[0]))
    return math.fsum(terms)


# -- the functions g_k ---------------------------------------------------------------------------

def g_k_eval(k: int, x):
    """g_k(x) = -k x + 2k - 1 - (k-1)/x on U_k."""
    if k < 1:
        raise InputError("k must be >= 1")
    x = np.asarray(x, dtype=float)
    return -k * x + 2 * k - 1 - (k - 1) / x


def g_k_observable(k: int) -> FunctionObservable:
    lo, hi = (float(t) for t in return_piece(k))
    pts = [lo, hi]
    if k >= 2:
        t = math.sqrt((k - 1) / k)      # g_k' = 0
        if lo < t < hi:
            pts.append(t)
    return FunctionObservable(lambda t: g_k_eval(k, t), points=tuple(sorted(pts)))


def g_k_table(k: int) -> tuple[float, float]:
    """(sup, variation) of g_k over U_k, from the observable machinery."""
    lo, hi = (float(t) for t in return_piece(k))
    g = g_k_observable(k)
    return sup_norm(g, lo, hi), variation(g, lo, hi)


def g_k_closed_form(k: int) -> tuple[float, float]:
    if k == 1:
        return 0.5, 1 / 6
    if k == 2:
        return 3 - 2 ** 1.5, 17 / 3 - 2 ** 2.5
    return 2 / ((k + 1) * (k + 2)), (k - 2) / (k * (k + 1) * (k + 2))


def g_k_from_dynamics(k: int, x: float) -> float:
    """-T^k(x) h_1(x) / (T^k)'(x), derivative by the chain rule along the orbit."""
    y, deriv = x, 1.0
    for _ in range(k):
        if y <= 0.5:
            deriv *= 1 / (1 - y) ** 2
        else:
            deriv *= -1 / y ** 2
        y = float(eval_map(1, y))
    return -y / (x * deriv)


# -- bounds -------------------------------------------------------------------------------------

def _rn_observable(f: Observable, n: int) -> FunctionObservable:
    pts = {0.5, 1.0}
    if n >= 2:
        t = 1 / math.sqrt(n * (n - 1))
        if 0.5 < t < 1:
            pts.add(t)
    for b in f.breakpoints():
        # pull a breakpoint of f back through psi_n(x) = (1+(n-1)x)/(1+nx)
        den = b * n - n + 1
        if den != 0:
            t = (1 - b) / den
            if 0.5 < t < 1:
                pts.add(t)
    return FunctionObservable(lambda t: first_return_operator(f, n, t), points=tuple(sorted(pts)))


def renewal_bound_report(f: Observable, n: int, f_norm: float | None = None) -> dict:
    """||R_n f||_BV on [0,1] against the cubic bound 8(n+1)^-3 ||f||_BV and the
    quadratic bound 10(n+1)^-2 ||f||_BV."""
    Rn = _rn_observable(f, n)
    norm = bv_norm(Rn)
    fn = bv_norm(f) if f_norm is None else f_norm
    cubic = 8 * (n + 1) ** -3 * fn
    quad = 10 * (n + 1) ** -2 * fn
    return {"n": n, "bv_norm": norm, "f_bv_norm": fn, "sup": sup_norm(Rn),
            "cubic_bound": cubic, "ratio_cubic": norm / cubic,
            "quadratic_bound": quad, "ratio_quadratic": norm / quad,
            "mu_U_n": return_piece_measure(n)}


def induced_return_map(y: float) -> float:
    """T_Y(y) = T_1^{phi_Y(y)}(y) in closed form."""
    k = first_return_time(y)
    z = (1 - y) / y
    return z / (1 - (k - 1) * z)


def induced_duality_check(w, u, M: int = 200) -> tuple[float, float]:
    """Both sides of int R(w) u dmu_1 = int w u o T_Y dmu_1 over Y, with the
    return-time sum truncated at M on each side."""
    W, U = _as_callable(w), _as_callable(u)

    def lhs_integrand(x):
        xa = np.array([x])
        s = math.fsum(float(first_return_operator(W, n, xa)[0]) for n in range(1, M + 1))
        return s * float(U(xa)[0]) / x

    lhs = integrate.quad(lhs_integrand, 0.5, 1.0, limit=200, epsabs=1e-13, epsrel=1e-12)[0]
    rhs = 0.0
    for k in range(1, M + 1):
        lo, hi = (float(t) for t in return_piece(k))

        def rhs_integrand(y, k=k):
            z = (1 - y) / y
            ty = z / (1 - (k - 1) * z)
            return float(W(np.array([y]))[0]) * float(U(np.array([ty]))[0]) / y

        rhs += integrate.quad(rhs_integrand, lo, hi, epsabs=1e-15, epsrel=1e-12)[0]
    return lhs, rhs
