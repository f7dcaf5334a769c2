"""Continued fractions, convergents and the Farey-map coding they induce.

A number in [0, 1] is written [0; a1, a2, ...].  Under the Farey map T_1 an
entry a contributes a-1 zeros followed by a single 1 to the symbolic coding,
and T_1 acts on the expansion by decrementing the first entry (or dropping
it when it equals 1).  Everything here is exact: big integers, Fractions and
QuadraticSurd values.
"""
from __future__ import annotations

import ast
import math
import numbers
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import mpmath

from .errors import InputError, NumericalDomainError
from .maps import MobiusMatrix, compose_branches, eval_map, validate_r
from .quadratic import QuadraticSurd, is_exact, log_abs


@dataclass(frozen=True)
class ContinuedFraction:
    """[0; a1, a2, ...] as a finite head, an optional period, or a rule.

    ``head`` holds a1..ak.  A non-empty ``period`` repeats forever after the
    head.  Otherwise ``rule(i)`` (1-based, pure) supplies entries past the
    head; with neither the expansion is finite and entries beyond it are 0.
    ``bound`` may declare an upper bound on all entries of a rule-backed
    expansion.  ``certified`` is set by ``cf_expand`` for inexact inputs.
    """
    head: tuple[int, ...] = ()
    period: tuple[int, ...] = ()
    rule: Callable[[int], int] | None = field(default=None, compare=False)
    label: str = ""
    bound: int | None = None
    certified: int | None = None

    def __post_init__(self):
        head = tuple(int(a) for a in self.head)
        period = tuple(int(a) for a in self.period)
        if any(a < 1 for a in head + period):
            raise InputError("continued fraction entries must be positive integers")
        if self.period and self.rule is not None:
            raise InputError("give a period or a rule, not both")
        if not period and self.rule is None and len(head) > 1 and head[-1] == 1:
            # [.., a, 1] == [.., a+1]: keep the canonical form the coding relies on
            head = head[:-2] + (head[-2] + 1,)
        object.__setattr__(self, "head", head)
        object.__setattr__(self, "period", period)

    @property
    def kind(self) -> str:
        if self.period:
            return "periodic"
        if self.rule is not None:
            return "generator"
        return "finite"

    def copy(self) -> "ContinuedFraction":
        """An independent snapshot; rules are pure functions of the index."""
        return ContinuedFraction(self.head, self.period, self.rule, self.label,
                                 self.bound, self.certified)

    def entry(self, i: int) -> int:
        if i < 1:
            raise InputError("entries are indexed from 1")
        k = len(self.head)
        if i <= k:
            return self.head[i - 1]
        if self.period:
            return self.period[(i - k - 1) % len(self.period)]
        if self.rule is not None:
            a = int(self.rule(i))
            if a < 1:
                raise InputError(f"rule produced a non-positive entry at {i}")
            return a
        return 0

    def entries(self, n: int) -> list[int]:
        return [self.entry(i) for i in range(1, n + 1)]

    def length(self) -> int | None:
        """Number of entries, or None when infinite."""
        return len(self.head) if self.kind == "finite" else None

    def is_bounded(self) -> bool | None:
        if self.kind in ("finite", "periodic"):
            return True
        return True if self.bound is not None else None

    def value(self):
        """Exact value: Fraction (finite) or QuadraticSurd (periodic)."""
        if self.kind == "finite":
            x = Fraction(0)
            for a in reversed(self.head):
                x = 1 / (a + x)
            return x
        if self.kind == "periodic":
            return _periodic_value(self.head, self.period)
        raise InputError("a rule-backed expansion has no exact value; use value_mpf")

    def value_mpf(self, dps: int = 30, depth: int = 200):
        if self.kind != "generator":
            v = self.value()
            return v.to_mpf(dps) if isinstance(v, QuadraticSurd) else mpmath.mpf(v.numerator) / v.denominator
        with mpmath.workdps(dps):
            x = mpmath.mpf(0)
            for a in reversed(self.entries(depth)):
                x = 1 / (a + x)
            return +x

    def __float__(self):
        return float(self.value_mpf(20))

    def shift_entries(self, j: int, first: int | None = None) -> "ContinuedFraction":
        """[0; first, a_{j+2}, ...] (or [0; a_{j+1}, ...] when first is None)."""
        if self.kind == "finite":
            rest = self.head[j:]
            if first is not None and rest:
                rest = (first,) + rest[1:]
            return ContinuedFraction(rest, label=self.label)
        if self.kind == "periodic":
            k = len(self.head)
            if j <= k:
                h, per = self.head[j:], self.period
            else:
                s = (j - k) % len(self.period)
                h, per = (), self.period[s:] + self.period[:s]
            if first is not None:
                if h:
                    h = (first,) + h[1:]
                else:
                    h, per = (first,), per[1:] + per[:1]
            return ContinuedFraction(h, per, label=self.label)
        base = self
        h = () if first is None else (first,)
        off = j + len(h)
        return ContinuedFraction(h, rule=lambda i, b=base, o=off, L=len(h): b.entry(i - L + o),
                                 label=self.label, bound=self.bound)

    def farey_coding(self, n: int) -> tuple[int, ...]:
        """First n letters of the T_1 coding read off the entries."""
        out: list[int] = []
        i = 1
        while len(out) < n:
            a = self.entry(i)
            if a == 0:
                out.extend([0] * (n - len(out)))
                break
            out.extend([0] * (a - 1) + [1])
            i += 1
        return tuple(out[:n])

    def __str__(self):
        if self.label:
            return self.label
        s = ",".join(map(str, self.head))
        if self.period:
            s = (s + "," if s else "") + "(" + ",".join(map(str, self.period)) + ")"
        elif self.rule is not None:
            s += ",..."
        return f"[0;{s}]"


def _periodic_value(head: Sequence[int], period: Sequence[int]) -> QuadraticSurd:
    tab = convergents(ContinuedFraction(tuple(period)), len(period))
    k = len(period)
    pk, pk1, qk, qk1 = tab.p(k), tab.p(k - 1), tab.q(k), tab.q(k - 1)
    # y = (pk + pk1 y)/(qk + qk1 y)  =>  qk1 y^2 + (qk - pk1) y - pk = 0
    A, B, C = qk1, qk - pk1, -pk
    disc = B * B - 4 * A * C
    y = (-B + QuadraticSurd.sqrt_of(disc)) / (2 * A)
    if not head:
        return y
    t = convergents(ContinuedFraction(tuple(head)), len(head))
    j = len(head)
    return (t.p(j) + t.p(j - 1) * y) / (t.q(j) + t.q(j - 1) * y)


# -- expansion ------------------------------------------------------------------

def _euclid(x: Fraction) -> tuple[int, ...]:
    out = []
    while x:
        y = 1 / x
        a = y.numerator // y.denominator
        out.append(a)
        x = y - a
    return tuple(out)


def cf_expand(value, depth: int | None = None) -> ContinuedFraction:
    """Expansion of a number in [0, 1].

    Rationals give the canonical finite expansion; quadratic surds an exact
    preperiod and period.  Floats, decimal strings and mpmath numbers are
    treated as known to one unit in their last place: both interval ends are
    expanded exactly and ``certified`` counts the leading entries they share.
    """
    if isinstance(value, ContinuedFraction):
        return value
    if isinstance(value, numbers.Rational):
        x = Fraction(value)
        if not 0 <= x <= 1:
            raise InputError("expected a value in [0, 1]")
        return ContinuedFraction(_euclid(x))
    if isinstance(value, QuadraticSurd):
        if value.is_rational():
            return cf_expand(value.u, depth)
        if not 0 < value < 1:
            raise InputError("expected a value in [0, 1]")
        seen: dict[QuadraticSurd, int] = {}
        ents: list[int] = []
        x = value
        while x not in seen:
            if depth is not None and len(ents) > 100000:
                raise InputError("period search exceeded its cap")
            seen[x] = len(ents)
            y = 1 / x
            a = math.floor(y)
            ents.append(a)
            x = y - a
        i = seen[x]
        return ContinuedFraction(tuple(ents[:i]), tuple(ents[i:]))
    if depth is None:
        raise InputError("inexact inputs need an explicit depth")
    if isinstance(value, float):
        lo, hi = Fraction(math.nextafter(value, -1.0)), Fraction(math.nextafter(value, 2.0))
    elif isinstance(value, mpmath.mpf):
        eps = mpmath.mpf(2) ** (-mpmath.mp.prec) * max(abs(value), mpmath.mpf(2) ** -60)
        lo, hi = _mpf_fraction(value - eps), _mpf_fraction(value + eps)
    else:
        raise InputError(f"cannot expand {value!r}")
    lo, hi = max(lo, Fraction(0)), min(hi, Fraction(1))
    a_lo, a_hi = _euclid(lo), _euclid(hi)
    cert = 0
    while cert < min(len(a_lo), len(a_hi)) and a_lo[cert] == a_hi[cert]:
        cert += 1
    x = _mpf_fraction(value) if isinstance(value, mpmath.mpf) else Fraction(value)
    ents = _euclid(x)[:depth]
    return ContinuedFraction(ents, certified=min(cert, len(ents)))


def _mpf_fraction(v) -> Fraction:
    man, exp = mpmath.mpf(v).man_exp
    return Fraction(int(man)) * (Fraction(2) ** int(exp))


# -- parsing ----------------------------------------------------------------------

_BRACKET = re.compile(r"^\[\s*0\s*;\s*([^\]]*)\]$")


def _witness_rule(name: str):
    if name == "beta":
        def rule(i):
            s = math.isqrt(i + 1)
            return 2 if s * s == i + 1 and s >= 2 else 1
        return rule
    if name == "kappa":
        def rule(i):
            k = 1
            while (1 << (k + 1)) + k - 2 < i:
                k += 1
            return 2 if (1 << (k + 1)) + k - 2 == i else 1
        return rule
    if name == "increasing":
        return lambda i: i
    raise KeyError(name)


def witness(name: str) -> ContinuedFraction:
    """Named test points: 'beta' (blocks of 2k ones then a 2), 'kappa'
    (blocks of 2^k ones then a 2), 'increasing' ([0;1,2,3,...]), 'gamma'."""
    if name == "gamma":
        return ContinuedFraction((), (1,), label="gamma")
    return ContinuedFraction(rule=_witness_rule(name), label=name)


def zeta_point(k: int) -> ContinuedFraction:
    """[0; 1 (k times), 2, 1, 1, 1, ...]."""
    return ContinuedFraction((1,) * k + (2,), (1,))


def _eval_expr(node):
    if isinstance(node, ast.Expression):
        return _eval_expr(node.body)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        return Fraction(str(node.value)) if isinstance(node.value, float) else node.value
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        v = _eval_expr(node.operand)
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.BinOp) and isinstance(node.op, (ast.Add, ast.Sub, ast.Mult, ast.Div)):
        a, b = _eval_expr(node.left), _eval_expr(node.right)
        if isinstance(node.op, ast.Add):
            return a + b
        if isinstance(node.op, ast.Sub):
            return a - b
        if isinstance(node.op, ast.Mult):
            return a * b
        if isinstance(a, int) and isinstance(b, int):
            return Fraction(a, b)
        return a / b
    if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)
            and node.func.id == "sqrt" and len(node.args) == 1):
        arg = _eval_expr(node.args[0])
        if not isinstance(arg, numbers.Rational):
            raise InputError("sqrt takes a rational argument")
        return QuadraticSurd.sqrt_of(arg)
    raise InputError("unsupported expression")


def parse_number(text: str):
    """Parse '2/5', '0.3', '[0;2,2]', '[0;1,(2,3)]', 'sqrt2-1', '(sqrt5-1)/2',
    or a witness name.  Returns Fraction, QuadraticSurd or ContinuedFraction."""
    s = text.strip()
    m = _BRACKET.match(s)
    if m:
        body = m.group(1).replace(" ", "")
        head, period = body, ""
        if "(" in body:
            if not body.endswith(")"):
                raise InputError(f"malformed periodic expansion {text!r}")
            head, period = body[:-1].split("(", 1)
        try:
            h = tuple(int(t) for t in head.split(",") if t)
            p = tuple(int(t) for t in period.split(",") if t)
        except ValueError as exc:
            raise InputError(f"malformed expansion {text!r}") from exc
        return ContinuedFraction(h, p)
    if s in ("beta", "kappa", "increasing", "gamma"):
        return witness(s)
    expr = re.sub(r"sqrt\s*(\d+)", r"sqrt(\1)", s)
    try:
        tree = ast.parse(expr, mode="eval")
    except SyntaxError as exc:
        raise InputError(f"cannot parse number {text!r}") from exc
    try:
        v = _eval_expr(tree)
    except ZeroDivisionError as exc:
        raise InputError(f"division by zero in {text!r}") from exc
    if isinstance(v, int):
        v = Fraction(v)
    return v


def as_exact_point(value):
    """Exact value of a parsed number (CFs resolved); generator CFs stay as they are."""
    if isinstance(value, ContinuedFraction) and value.kind != "generator":
        return value.value()
    return value


# -- convergents ------------------------------------------------------------------

@dataclass(frozen=True)
class ConvergentTable:
    """p_i, q_i for i = -1..n with p_{-1}=1, q_{-1}=0, p_0=0, q_0=1."""
    ps: tuple[int, ...]
    qs: tuple[int, ...]

    @property
    def n(self) -> int:
        return len(self.ps) - 2

    def p(self, i: int) -> int:
        return self.ps[i + 1]

    def q(self, i: int) -> int:
        return self.qs[i + 1]

    def determinant(self, i: int) -> int:
        """p_{i-1} q_i - p_i q_{i-1}, equal to (-1)^i."""
        return self.p(i - 1) * self.q(i) - self.p(i) * self.q(i - 1)

    def convergent(self, i: int) -> Fraction:
        return Fraction(self.p(i), self.q(i))


def convergents(cf: ContinuedFraction, n: int) -> ConvergentTable:
    ps, qs = [1, 0], [0, 1]
    for i in range(1, n + 1):
        a = cf.entry(i)
        if a == 0:
            # finite expansion exhausted: convergents stay put
            ps.append(ps[-1])
            qs.append(qs[-1])
            continue
        ps.append(a * ps[-1] + ps[-2])
        qs.append(a * qs[-1] + qs[-2])
    return ConvergentTable(tuple(ps), tuple(qs))


# -- Farey coding bookkeeping -------------------------------------------------------

def _as_cf(beta) -> ContinuedFraction:
    if isinstance(beta, ContinuedFraction):
        return beta
    if isinstance(beta, str):
        return _as_cf(parse_number(beta))
    if is_exact(beta):
        return cf_expand(beta)
    raise InputError("exact input required (rational, quadratic surd or continued fraction)")


def farey_kmr(beta, n: int) -> tuple[int, int, int]:
    """(k(n), m(n), r(n)): last position of a 1 among the first n letters, the
    number of 1s, and n - k(n).  k = m = 0 when no 1 occurs."""
    cf = _as_cf(beta)
    n = int(n)
    if n < 0:
        raise InputError("n must be >= 0")
    total, m, i = 0, 0, 1
    while True:
        a = cf.entry(i)
        if a == 0 or total + a > n:
            break
        total += a
        m += 1
        i += 1
    return total, m, n - total


def farey_branch_closed_form(beta, n: int) -> tuple[MobiusMatrix, tuple[int, int, int]]:
    """Integer matrix of f_{1, w|n} from convergents, w the coding of beta:
    ((r p_m + p_{m-1}), p_m; (r q_m + q_{m-1}), q_m)."""
    cf = _as_cf(beta)
    k, m, r = farey_kmr(cf, n)
    t = convergents(cf, m)
    pm, pm1, qm, qm1 = t.p(m), t.p(m - 1), t.q(m), t.q(m - 1)
    M = MobiusMatrix(r * pm + pm1, pm, r * qm + qm1, qm)
    return M, (k, m, r)


def farey_orbit_cf(beta, steps: int) -> ContinuedFraction:
    """T_1^steps(beta) as an expansion, by repeated decrement/shift of entries."""
    cf = _as_cf(beta)
    k, m, r = farey_kmr(cf, steps)
    a = cf.entry(m + 1)
    if a == 0:
        return ContinuedFraction(())
    return cf.shift_entries(m, first=a - r)


# -- alpha type -------------------------------------------------------------------------

@dataclass(frozen=True)
class AlphaTypeResult:
    status: str            # "certified" or "inconclusive"
    epsilon: float
    partial_sum: object    # mpmath number
    terms: int
    reason: str


def _intermediate_sum(qprev: int, qprev2: int, a: int, s) -> object:
    """sum_{j=1}^{a} (j qprev + qprev2)^(-s), exactly termwise or via Hurwitz zeta."""
    if a <= 2000:
        return mpmath.fsum(mpmath.mpf(j * qprev + qprev2) ** (-s) for j in range(1, a + 1))
    Q = mpmath.mpf(qprev)
    c = mpmath.mpf(qprev2) / Q
    if abs(s - 1) < mpmath.mpf(10) ** -20:
        body = mpmath.digamma(a + 1 + c) - mpmath.digamma(1 + c)
    else:
        body = mpmath.zeta(s, 1 + c) - mpmath.zeta(s, a + 1 + c)
    return Q ** (-s) * body


def alpha_type_test(cf: ContinuedFraction, alpha: float, N: int = 20,
                    epsilon: float | None = None) -> AlphaTypeResult:
    """Decide the intermediate alpha-type condition where a proof is available.

    sum_n sum_{j<=a_n} t_{n,j}^(-2(1-alpha)+eps) < inf, t_{n,j} = j q_{n-1} + q_{n-2}.
    Bounded entries certify it (t grows geometrically in the number of terms);
    so does alpha < 1/2, since the t_{n,j} are distinct positive integers and the
    exponent exceeds 1.  Otherwise the first N outer terms are reported.
    """
    if not 0 < alpha < 1:
        raise InputError("alpha must lie in (0, 1)")
    if cf.kind == "finite":
        raise InputError("alpha type is defined for irrational points only")
    if epsilon is None:
        epsilon = (1 - 2 * alpha) / 2 if alpha < 0.5 else (1 - alpha) / 2
    s = mpmath.mpf(2 * (1 - alpha) - epsilon)
    with mpmath.workdps(30):
        tab = convergents(cf, N)
        total = mpmath.mpf(0)
        for n in range(1, N + 1):
            total += _intermediate_sum(tab.q(n - 1), tab.q(n - 2), cf.entry(n), s)
    if alpha < 0.5 and s > 1:
        return AlphaTypeResult("certified", epsilon, total, N, "alpha < 1/2: exponent exceeds 1")
    if cf.is_bounded():
        return AlphaTypeResult("certified", epsilon, total, N, "bounded entries")
    return AlphaTypeResult("inconclusive", epsilon, total, N,
                           "unbounded or undeclared entries; partial sum only")


# -- omega limits -------------------------------------------------------------------------

@dataclass(frozen=True)
class OmegaLimit:
    points: tuple
    period: int
    preperiod: int


def omega_limit_preperiodic(beta, r=1, max_steps: int = 100000) -> OmegaLimit:
    """Exact orbit of beta under T_r until it repeats.

    Works for exact beta whose orbit stays in a fixed quadratic field or in Q
    (all rational r on rationals, r = 1 on quadratic surds).
    """
    r = validate_r(r)
    if isinstance(r, float):
        raise InputError("exact orbits need a rational r")
    if isinstance(beta, ContinuedFraction):
        beta = beta.value()
    elif isinstance(beta, str):
        beta = as_exact_point(parse_number(beta))
    if not is_exact(beta):
        raise InputError("exact beta required")
    seen: dict = {}
    orbit = []
    x = beta
    while x not in seen:
        if len(orbit) >= max_steps:
            raise InputError(f"no repetition within {max_steps} steps")
        seen[x] = len(orbit)
        orbit.append(x)
        x = eval_map(r, x)
    i = seen[x]
    cycle = orbit[i:]
    return OmegaLimit(tuple(sorted(cycle, key=float)), len(cycle), i)


# -- the S_{k,j} quantities ---------------------------------------------------------------

@dataclass(frozen=True)
class SValue:
    n: int
    q: int
    value: float | None     # None when undefined (n = 0)
    orbit_ok: bool


def compute_S(cf: ContinuedFraction, alpha: float, k: int, j: int) -> SValue:
    """S_{k,j} = a_{j+1}^alpha ln(n_{k,j}) / q_j^(2(1-alpha)), where
    T_1^{n_{k,j}}(beta) = [0; k, a_{j+1}, ...], n_{k,j} = sum_{i<=j} a_i - k."""
    if not 0 < alpha < 1:
        raise InputError("alpha must lie in (0, 1)")
    if k < 1 or j < 1:
        raise InputError("k and j must be positive")
    aj = cf.entry(j)
    if aj < k:
        raise InputError(f"a_{j} = {aj} < k = {k}: the orbit never shows the entry k here")
    n = sum(cf.entry(i) for i in range(1, j + 1)) - k
    q = convergents(cf, j).q(j)
    shifted = farey_orbit_cf(cf, n)
    ok = shifted.entry(1) == k and shifted.entry(2) == cf.entry(j + 1)
    if n == 0:
        return SValue(n, q, None, ok)
    logS = alpha * math.log(cf.entry(j + 1)) - 2 * (1 - alpha) * log_abs(q)
    if n == 1:
        return SValue(n, q, 0.0, ok)
    return SValue(n, q, math.log(n) * math.exp(logS), ok)


# -- witness bookkeeping -----------------------------------------------------------------

def witness_lambda(variant: str, n: int) -> int:
    if n < 1:
        raise InputError("n must be >= 1")
    if variant == "beta":
        return n * (n + 2)
    if variant == "kappa":
        return 2 ** n + n - 2
    raise InputError(f"unknown witness {variant!r}")


def divergence_witness(variant: str, n: int) -> dict:
    """Lambda(n, tau), the entry a_{Lambda-1}(tau) the construction expects to be 2,
    and the head of the orbit point T_1^{Lambda+n-1}(tau)."""
    cf = witness(variant)
    L = witness_lambda(variant, n)
    idx = L - 1
    entry = cf.entry(idx) if idx >= 1 else 0
    orbit = farey_orbit_cf(cf, L + n - 1)
    return {
        "variant": variant,
        "n": n,
        "Lambda": L,
        "index": idx,
        "entry": entry,
        "entry_at_Lambda": cf.entry(L),
        "holds": entry == 2,
        "orbit_head": tuple(orbit.entries(8)),
        "head": tuple(cf.entries(min(L + 2, 40))),
    }


def branch_matrix_by_composition(beta, n: int) -> MobiusMatrix:
    """compose_branches(1, coding of beta) (the route the closed form is checked against)."""
    from .symbolic import code_point
    return compose_branches(1, code_point(1, beta if not isinstance(beta, str) else parse_number(beta), n))
