"""Perron-Frobenius operators of T_r and the Farey dual operator.

P_r f(x) = sum over the two inverse branches of |f'_{r,i}(x)| f(f_{r,i}(x)), and
P_r^n f(x) is the same sum over all 2^n words.  Two backends:

* exact tree: the 2^n-term sum, built from Mobius matrices of every word,
  vectorised over blocks of suffixes and looped over prefixes;
* grid: n applications of the one-step operator to a piecewise-linear
  interpolant on N nodes (a sparse N x N matrix), for large n.

The Farey dual operator is That f = P_1(f h_1) / h_1, i.e.
That f(x) = f_0(x) f(f_1(x)) + f_1(x) f(f_0(x)) with f_i the r = 1 branches.
"""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import sparse

from .contfrac import ContinuedFraction, farey_branch_closed_form, farey_kmr, convergents
from .errors import CapacityError, InputError, UnsupportedError
from .maps import (compose_branches, inverse_branch_matrix, measure_mu,
                   validate_r)
from .observables import Observable, SingularPower
from .quadratic import QuadraticSurd, is_exact, log_abs
from .symbolic import code_point, neighbor_words, word_to_index

MAX_TREE_DEPTH = 26
MAX_GRID_NODES = 2 ** 22
DEFAULT_GRID_NODES = 2 ** 14
_BLOCK_DEPTH = 16
_CHUNK = 2 ** 22


def _as_callable(f) -> Callable[[np.ndarray], np.ndarray]:
    if isinstance(f, Observable):
        return f._eval
    return lambda t: np.asarray(f(t), dtype=float) * np.ones_like(t)


# -- word matrices ------------------------------------------------------------------

def level_matrices(r, n: int):
    """Arrays (a, b, c, d, log_scale) for all 2^n words, indexed with the first
    letter most significant.  Float r is renormalised at every level."""
    r = validate_r(r)
    if n > MAX_TREE_DEPTH:
        raise CapacityError(f"exact tree limited to depth {MAX_TREE_DEPTH}, asked {n}")
    rf = float(r)
    a, b, c, d = (np.ones(1), np.zeros(1), np.zeros(1), np.ones(1))
    ls = np.zeros(1)
    digs = [inverse_branch_matrix(r, i) for i in (0, 1)]
    for _ in range(n):
        na, nb, nc, nd = [], [], [], []
        for D in digs:
            al, be, ga, de = (float(e) for e in D.entries)
            na.append(a * al + b * ga)
            nb.append(a * be + b * de)
            nc.append(c * al + d * ga)
            nd.append(c * be + d * de)
        a, b, c, d = (np.stack(v, axis=1).reshape(-1) for v in (na, nb, nc, nd))
        ls = np.repeat(ls, 2)
        if isinstance(r, float):
            m = np.maximum.reduce([np.abs(a), np.abs(b), np.abs(c), np.abs(d)])
            a, b, c, d = a / m, b / m, c / m, d / m
            ls = ls + np.log(m)
    log_det = n * math.log(2 - rf)
    return a, b, c, d, ls, log_det


def _eval_block(a, b, c, d, ls, log_det, x, g, hat: bool):
    """Sum over words (rows) of weight * g(f_w(x)) for each x (columns)."""
    X = x[None, :]
    num = a[:, None] * X + b[:, None]
    den = c[:, None] * X + d[:, None]
    y = num / den
    np.clip(y, 0.0, 1.0, out=y)
    if hat:
        # |f'| h_1(y) / h_1(x) = x / ((ax+b)(cx+d)) since |det| = 1 at r = 1
        with np.errstate(divide="ignore", invalid="ignore"):
            w = np.where(num != 0, X / (num * den), 1.0 / (a[:, None] * den))
    else:
        w = np.exp(log_det - 2 * ls[:, None] - 2 * np.log(np.abs(den)))
    vals = g(y.reshape(-1)).reshape(y.shape)
    with np.errstate(invalid="ignore"):
        terms = w * vals
    return terms


def _tree_sum(r, f, x, n: int, hat: bool = False, exclude: Sequence[int] = (),
              workers: int = 1) -> np.ndarray:
    r = validate_r(r)
    if n > MAX_TREE_DEPTH:
        raise CapacityError(f"exact tree limited to depth {MAX_TREE_DEPTH}, asked {n}")
    if hat and r != 1:
        raise InputError("the dual operator is defined for r = 1")
    g = _as_callable(f)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    B = min(n, _BLOCK_DEPTH)
    p = n - B
    sa, sb, sc, sd, sls, _ = level_matrices(r, B)
    pa, pb, pc, pd, pls, _ = level_matrices(r, p)
    log_det = n * math.log(2 - float(r))
    excl = np.asarray(sorted(set(exclude)), dtype=np.int64)
    xchunk = max(1, _CHUNK // (1 << B))
    suffix_ids = np.arange(1 << B, dtype=np.int64)

    def run_prefix(i: int) -> np.ndarray:
        a = pa[i] * sa + pb[i] * sc
        b = pa[i] * sb + pb[i] * sd
        c = pc[i] * sa + pd[i] * sc
        d = pc[i] * sb + pd[i] * sd
        ls = pls[i] + sls
        if isinstance(r, float):
            m = np.maximum.reduce([np.abs(a), np.abs(b), np.abs(c), np.abs(d)])
            a, b, c, d, ls = a / m, b / m, c / m, d / m, ls + np.log(m)
        keep = None
        if excl.size:
            keep = ~np.isin((i << B) + suffix_ids, excl)
            a, b, c, d, ls = a[keep], b[keep], c[keep], d[keep], ls[keep]
        out = np.empty(x.size)
        for s in range(0, x.size, xchunk):
            xs = x[s:s + xchunk]
            out[s:s + xchunk] = _eval_block(a, b, c, d, ls, log_det, xs, g, hat).sum(axis=0)
        return out

    idx = range(len(pa))
    if workers > 1 and len(pa) > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(run_prefix, idx))
    else:
        parts = [run_prefix(i) for i in idx]
    total = np.zeros(x.size)
    for part in parts:      # fixed order keeps results reproducible
        total += part
    return total


def _word_terms(r, f, x, words: Iterable[Sequence[int]], hat: bool = False) -> np.ndarray:
    g = _as_callable(f)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    total = np.zeros(x.size)
    for w in words:
        M = compose_branches(r, w)
        a, b, c, d = (np.array([float(e)]) for e in M.entries)
        terms = _eval_block(a, b, c, d, np.array([M.log_scale]), M.log_abs_det, x, g, hat)
        total += terms[0]
    return total


def _shape_like(x, arr):
    return float(arr[0]) if np.ndim(x) == 0 else arr.reshape(np.shape(x))


# -- grid backend ----------------------------------------------------------------------

def make_grid(N: int, kind: str = "graded") -> np.ndarray:
    """N nodes on [0,1].  'graded' puts nodes at (i/(N-1))^2, which resolves the
    slow drift towards the indifferent fixed point at 0."""
    if N < 3 or N > MAX_GRID_NODES:
        raise CapacityError(f"grid size must lie in [3, {MAX_GRID_NODES}]")
    u = np.linspace(0.0, 1.0, N)
    if kind == "uniform":
        return u
    if kind == "graded":
        return u * u
    raise InputError(f"unknown grid kind {kind!r}")


def _branch_images(r, x):
    rf = float(r)
    den = 2 - rf + rf * x
    y0 = x / den
    y1 = (1 + (1 - rf) * (1 - x)) / den
    d = (2 - rf) / den ** 2
    return y0, y1, d, d


def _interp_matrix(grid: np.ndarray, y: np.ndarray, w: np.ndarray) -> sparse.csr_matrix:
    N = grid.size
    j = np.clip(np.searchsorted(grid, y, side="right") - 1, 0, N - 2)
    t = (y - grid[j]) / (grid[j + 1] - grid[j])
    rows = np.repeat(np.arange(N), 2)
    cols = np.stack([j, j + 1], axis=1).reshape(-1)
    vals = np.stack([w * (1 - t), w * t], axis=1).reshape(-1)
    return sparse.csr_matrix((vals, (rows, cols)), shape=(N, N))


def grid_operator(r, grid: np.ndarray, hat: bool = False) -> sparse.csr_matrix:
    """Sparse matrix of one operator step acting on nodal values."""
    y0, y1, d0, d1 = _branch_images(r, grid)
    if hat:
        # f_0(x) g(f_1 x) + f_1(x) g(f_0 x)
        return _interp_matrix(grid, y1, y0) + _interp_matrix(grid, y0, y1)
    return _interp_matrix(grid, y0, d0) + _interp_matrix(grid, y1, d1)


def _first_step(r, f, grid, hat: bool) -> np.ndarray:
    g = _as_callable(f)
    y0, y1, d0, d1 = _branch_images(r, grid)
    if hat:
        return y0 * g(y1) + y1 * g(y0)
    return d0 * g(y0) + d1 * g(y1)


def grid_iterate(r, f, checkpoints: Sequence[int], x, N: int = DEFAULT_GRID_NODES,
                 hat: bool = False, grid_kind: str = "graded") -> dict[int, np.ndarray]:
    """Values of P_r^n f (or That^n f) at x for every n in ``checkpoints``."""
    r = validate_r(r)
    if hat and r != 1:
        raise InputError("the dual operator is defined for r = 1")
    sing = getattr(f, "singularities", ())
    if sing:
        raise UnsupportedError("grid backend refuses observables with singularities; "
                               "split the singular part off first")
    steps = sorted(set(int(n) for n in checkpoints))
    if not steps or steps[0] < 0:
        raise InputError("checkpoints must be non-negative")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    grid = make_grid(N, grid_kind)
    A = grid_operator(r, grid, hat)
    out: dict[int, np.ndarray] = {}
    if steps[0] == 0:
        out[0] = _as_callable(f)(x.copy())
    g = _first_step(r, f, grid, hat)
    n = 1
    for target in steps:
        if target == 0:
            continue
        while n < target:
            g = A @ g
            n += 1
        out[target] = np.interp(x, grid, g)
    return out


# -- public operators --------------------------------------------------------------------

def pf_apply_once(r, f, x):
    """One application of P_r at the points x."""
    r = validate_r(r)
    g = _as_callable(f)
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    y0, y1, d0, d1 = _branch_images(r, xa)
    return _shape_like(x, d0 * g(y0) + d1 * g(y1))


def pf_iterate(r, f, n: int, x, backend: str = "exact-tree", N: int = DEFAULT_GRID_NODES,
               workers: int = 1):
    """P_r^n f at x.  A hit of a singularity in the exact tree gives +inf."""
    if n < 0:
        raise InputError("n must be >= 0")
    if backend == "exact-tree":
        return _shape_like(x, _tree_sum(r, f, x, n, workers=workers))
    if backend == "grid":
        return _shape_like(x, grid_iterate(r, f, [n], x, N)[n])
    raise InputError(f"unknown backend {backend!r}")


def transfer_hat_apply(f, x, n: int = 1, backend: str = "exact-tree",
                       N: int = DEFAULT_GRID_NODES):
    """That^n f at x (Farey dual operator)."""
    if n < 0:
        raise InputError("n must be >= 0")
    if backend == "exact-tree":
        return _shape_like(x, _tree_sum(1, f, x, n, hat=True))
    if backend == "grid":
        return _shape_like(x, grid_iterate(1, f, [n], x, N, hat=True)[n])
    raise InputError(f"unknown backend {backend!r}")


def transfer_hat_recursive(f, x, n: int):
    """That^n f by direct recursion on the two-term formula (reference route)."""
    g = _as_callable(f)
    x = np.atleast_1d(np.asarray(x, dtype=float))

    def rec(pts, k):
        if k == 0:
            return g(pts)
        f0 = pts / (1 + pts)
        f1 = 1 / (1 + pts)
        return f0 * rec(f1, k - 1) + f1 * rec(f0, k - 1)

    return rec(x, n)


# -- tails ---------------------------------------------------------------------------------

def _tail_words(r, beta, n: int) -> tuple[tuple[int, ...], ...]:
    if r == 1:
        return (code_point(1, beta, n),)
    return neighbor_words(r, beta, n).words()


def _exact_value(beta):
    if isinstance(beta, ContinuedFraction):
        return beta.value() if beta.kind != "generator" else None
    return beta if is_exact(beta) else None


def _log_term_exact(M, beta, alpha, x) -> float:
    den = M.c * x + M.d
    E = beta * den - (M.a * x + M.b)
    if E == 0:
        return math.inf
    return log_abs(M.det()) + (alpha - 2) * log_abs(den) - alpha * log_abs(E)


def _log_term_mp(M, beta_mp, alpha, x) -> float:
    import mpmath
    den = M.c * x + M.d
    E = beta_mp * den - (M.a * x + M.b)
    if E == 0:
        return math.inf
    return float(mpmath.log(abs(M.det())) + (alpha - 2) * mpmath.log(abs(den))
                 - alpha * mpmath.log(abs(E)))


def tail_log_terms(r, beta, alpha: float, n: int, x) -> list[float]:
    """log of |f'_w(x)| |beta - f_w(x)|^(-alpha) for each tail word w (+inf on a hit).

    r < 1: the coding word of beta and its two neighbours (duplicates removed);
    r = 1: the coding word alone, whose matrix comes from convergents.
    """
    r = validate_r(r)
    if not 0 < alpha < 1:
        raise InputError("alpha must lie in (0, 1)")
    n = int(n)
    if n < 0:
        raise InputError("n must be >= 0")
    bx = _exact_value(beta)
    exact = bx is not None and is_exact(x) and not isinstance(r, float)
    if r == 1 and (isinstance(beta, ContinuedFraction) or exact):
        M, _ = farey_branch_closed_form(beta if bx is None else bx, n)
        mats = [M]
    else:
        mats = [compose_branches(r, w) for w in _tail_words(r, beta if bx is None else bx, n)]
    out = []
    for M in mats:
        if exact:
            try:
                out.append(_log_term_exact(M, bx, alpha, x))
                continue
            except TypeError:
                pass
        if r == 1 and isinstance(beta, ContinuedFraction) and beta.kind == "generator":
            import mpmath
            digits = max(30, int(2 * max(log_abs(M.c), log_abs(M.d), 1) / math.log(10)) + 30)
            with mpmath.workdps(digits):
                bm = beta.value_mpf(digits, depth=farey_kmr(beta, n)[1] + 3 * digits)
                xm = x.to_mpf(digits) if isinstance(x, QuadraticSurd) else mpmath.mpf(
                    Fraction(x).numerator) / Fraction(x).denominator if is_exact(x) else mpmath.mpf(x)
                out.append(_log_term_mp(M, bm, alpha, xm))
            continue
        xf, bf = float(x), float(bx if bx is not None else beta)
        y = float(M(xf))
        if y == bf:
            out.append(math.inf)
            continue
        out.append(math.log(M.derivative(xf)) - alpha * math.log(abs(bf - y)))
    return out


def tail_eval(r, beta, alpha: float, n: int, x) -> float:
    """The tail sum v_{n,r}(x); +inf exactly when a tail branch maps x onto beta."""
    terms = tail_log_terms(r, beta, alpha, n, x)
    if any(t == math.inf for t in terms):
        return math.inf
    return sum(math.exp(t) for t in terms)


def log_tail_eval(r, beta, alpha: float, n: int, x) -> float:
    """log of the tail sum, usable when the tail itself underflows."""
    terms = tail_log_terms(r, beta, alpha, n, x)
    if any(t == math.inf for t in terms):
        return math.inf
    m = max(terms)
    return m + math.log(sum(math.exp(t - m) for t in terms))


def split_decomposition(r, v: SingularPower, n: int, x):
    """(bv_part, tail_part) with bv + tail = P_r^n v: the tail collects the words
    of the coding cylinder of beta and its neighbours (the coding word only at
    r = 1), the bounded part every other word."""
    r = validate_r(r)
    beta = v.beta
    words = _tail_words(r, beta, n)
    idx = [word_to_index(w) for w in words]
    tail = _word_terms(r, v, x, words)
    bv = _tree_sum(r, v, x, n, exclude=idx)
    return _shape_like(x, bv), _shape_like(x, tail)


# -- wandering rate, covers -----------------------------------------------------------------

def preimage_union(r, n: int) -> list[tuple]:
    """Union over k < n of T_r^{-k}[1/2, 1] as merged intervals (exact for rational r)."""
    r = validate_r(r)
    if n < 1:
        raise InputError("n must be >= 1")
    one = 1.0 if isinstance(r, float) else Fraction(1)
    Y = (one / 2, one)
    mats = [inverse_branch_matrix(r, i) for i in (0, 1)]
    U = [Y]
    for _ in range(n - 1):
        pieces = [Y]
        for lo, hi in U:
            for M in mats:
                a, b = M(lo), M(hi)
                pieces.append((min(a, b), max(a, b)))
        pieces.sort()
        merged = [pieces[0]]
        for lo, hi in pieces[1:]:
            if lo <= merged[-1][1]:
                merged[-1] = (merged[-1][0], max(hi, merged[-1][1]))
            else:
                merged.append((lo, hi))
        U = merged
    return U


def wandering_rate(r, n: int, method: str = "auto") -> float:
    """mu_r of the union of T_r^{-k}[1/2,1], k < n; ln(n+1) in closed form at r = 1."""
    r = validate_r(r)
    if n < 1:
        raise InputError("n must be >= 1")
    if method == "auto":
        method = "closed" if r == 1 else "pullback"
    if method == "closed":
        if r != 1:
            raise InputError("closed form available at r = 1 only")
        return math.log1p(n)
    return math.fsum(measure_mu(r, float(lo), float(hi)) for lo, hi in preimage_union(r, n))


def cover_sum_diagnostic(r, beta, alpha: float, s: float, n_range: Sequence[int],
                         eta_K: float = 1.0, k: int = 1) -> dict:
    """Partial sums of radius^s over the covering balls of the divergence set.

    r < 1: radius (2-r)^((1-1/alpha) n) (3 eta_K)^(1/alpha), plus the closed-form
    geometric tail from min(n_range).  r = 1: radius
    (k+1)^(2/alpha) ln(n)^(1/alpha) / (eta_K^(1/alpha) k^2 t^(2(1/alpha-1))),
    t = (r(n)+k) q_m + q_{m-1}, over the n where the orbit shows the entry k.
    """
    r = validate_r(r)
    if not 0 < alpha < 1 or s <= 0:
        raise InputError("need 0 < alpha < 1 and s > 0")
    ns = sorted(set(int(n) for n in n_range))
    log_terms: list[tuple[int, float]] = []
    out: dict = {"r": float(r), "alpha": alpha, "s": s}
    if r != 1:
        base = (1 - 1 / alpha) * math.log(2 - float(r))
        c = math.log(3 * eta_K) / alpha
        log_terms = [(n, s * (base * n + c)) for n in ns]
        M = ns[0]
        out["geometric_bound"] = math.exp(s * c + s * base * M) / (1 - math.exp(s * base))
    else:
        cf = beta if isinstance(beta, ContinuedFraction) else None
        if cf is None:
            from .contfrac import cf_expand
            cf = cf_expand(beta)
        total_a, i = 0, 1
        visits = []
        while True:
            a = cf.entry(i)
            if a == 0:
                break
            total_a += a
            nn = total_a - k
            if nn > ns[-1]:
                break
            if nn >= max(ns[0], 2) and a >= k:
                visits.append(nn)
            i += 1
        for nn in visits:
            kk, m, rr = farey_kmr(cf, nn)
            tab = convergents(cf, m)
            t = (rr + k) * tab.q(m) + tab.q(m - 1)
            lr = (2 / alpha) * math.log(k + 1) + math.log(math.log(nn)) / alpha \
                - math.log(eta_K) / alpha - 2 * math.log(k) - 2 * (1 / alpha - 1) * log_abs(t)
            log_terms.append((nn, s * lr))
    out["n"] = [n for n, _ in log_terms]
    out["log_terms"] = [t for _, t in log_terms]
    out["partial_sum"] = math.fsum(math.exp(t) for _, t in log_terms)
    return out


# -- series output ------------------------------------------------------------------------------

CSV_COLUMNS = ("theorem", "r", "alpha", "beta", "x", "n", "backend", "value", "target", "normalized")


def format_value(v) -> str:
    """Deterministic text for a number: shortest round-trip repr, 'inf' for +inf."""
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    if math.isnan(v):
        return "nan"
    return repr(v)


@dataclass
class ExperimentSeries:
    """Rows of an experiment plus run metadata; serialises to CSV or JSON."""
    rows: list[dict] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def add(self, **row) -> None:
        self.rows.append(row)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for row in self.rows:
            w.writerow([format_value(row.get(c)) for c in CSV_COLUMNS])
        return buf.getvalue()

    def to_json(self) -> str:
        def enc(v):
            if isinstance(v, float) and (math.isinf(v) or math.isnan(v)):
                return format_value(v)
            if isinstance(v, (np.floating,)):
                return enc(float(v))
            if isinstance(v, (np.integer,)):
                return int(v)
            if isinstance(v, dict):
                return {k: enc(u) for k, u in v.items()}
            if isinstance(v, (list, tuple)):
                return [enc(u) for u in v]
            return v
        return json.dumps({"meta": enc(self.meta), "rows": [enc(r) for r in self.rows]},
                          indent=2, sort_keys=True)
