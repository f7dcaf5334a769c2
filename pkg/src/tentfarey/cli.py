"""Command line interface.

    tentfarey map --r 0.5 --x 1/4 [--word 0110]
    tentfarey cf --value "[0;(2)]" --n 5 [--alpha 0.5]
    tentfarey tail --r 1 --beta sqrt2-1 --alpha 0.5 --n 2 --x sqrt2-1
    tentfarey iterate --r 0.5 --observable power:beta=1/3,alpha=0.4 --n 12 --x 0.2,0.7
    tentfarey renewal --n 3
    tentfarey experiment convergence|limsup|witnesses ...

Every command accepts --format {csv,json} and --out PATH.
Exit codes: 0 success, 2 input error, 3 capacity exceeded.
"""
from __future__ import annotations

import argparse
import math
import sys
from fractions import Fraction

from . import contfrac, experiments, maps, observables, renewal, transfer
from .contfrac import as_exact_point, parse_number
from .errors import CapacityError, InputError
from .transfer import ExperimentSeries


def _number(text: str):
    return as_exact_point(parse_number(text))


def _points(text: str) -> list:
    return [_number(t) for t in text.split(",") if t.strip()]


def _r(text: str):
    v = _number(text)
    return maps.validate_r(v if not isinstance(v, Fraction) or v.denominator != 1 else int(v))


def _int_list(text: str) -> list[int]:
    return [int(t) for t in text.split(",") if t.strip()]


def cmd_map(a) -> ExperimentSeries:
    r = _r(a.r)
    s = ExperimentSeries(meta={"theorem": "map", "r": float(r),
                               "fixed_point": maps.fixed_point_nonzero(r)})
    word = tuple(int(c) for c in a.word) if a.word else None
    for x in _points(a.x):
        if word is None:
            y = maps.eval_map(r, x)
            s.add(theorem="map", r=float(r), x=str(x), n=1, backend="exact" if maps.is_exact(y) else "fp64",
                  value=str(y) if maps.is_exact(y) else float(y),
                  target=maps.invariant_density(r, float(x)), normalized=float(y))
        else:
            M = maps.compose_branches(r, word)
            y = M(x)
            s.add(theorem="branch", r=float(r), x=str(x), n=len(word),
                  backend="exact" if M.exact else "fp64",
                  value=str(y) if maps.is_exact(y) else float(y),
                  target=float(maps.branch_derivative(M, x)), normalized=float(y))
            s.meta["matrix"] = [str(e) for e in M.entries]
    return s


def cmd_cf(a) -> ExperimentSeries:
    v = parse_number(a.value)
    cf = contfrac.cf_expand(v, a.depth)
    s = ExperimentSeries(meta={"theorem": "cf", "expansion": str(cf), "kind": cf.kind})
    if cf.certified is not None:
        s.meta["certified_entries"] = cf.certified
    tab = contfrac.convergents(cf, a.n)
    for i in range(0, a.n + 1):
        s.add(theorem="cf", beta=str(cf), n=i, backend="exact",
              value=f"{tab.p(i)}/{tab.q(i)}", target=tab.determinant(i), normalized=cf.entry(i) if i else 0)
    M, kmr = contfrac.farey_branch_closed_form(cf, a.n)
    s.meta["farey_branch"] = {"matrix": [str(e) for e in M.entries], "k": kmr[0], "m": kmr[1], "r": kmr[2]}
    if a.alpha is not None and cf.kind != "finite":
        res = contfrac.alpha_type_test(cf, a.alpha)
        s.meta["alpha_type"] = {"status": res.status, "epsilon": res.epsilon,
                                "partial_sum": mpmath_str(res.partial_sum), "reason": res.reason}
    return s


def mpmath_str(v) -> str:
    import mpmath
    return mpmath.nstr(v, 12)


def cmd_tail(a) -> ExperimentSeries:
    r = _r(a.r)
    beta = parse_number(a.beta)
    if not (isinstance(beta, contfrac.ContinuedFraction) and beta.kind == "generator"):
        beta = as_exact_point(beta)
    s = ExperimentSeries(meta={"theorem": "tail"})
    for n in _int_list(a.n):
        for x in _points(a.x):
            lv = transfer.log_tail_eval(r, beta, a.alpha, n, x)
            val = math.inf if lv == math.inf else math.exp(lv)
            s.add(theorem="tail", r=float(r), alpha=a.alpha, beta=str(beta), x=str(x), n=n,
                  backend="exact" if r in (0, 1) or not isinstance(r, float) else "fp64",
                  value=val, target="", normalized=lv)
    return s


def cmd_iterate(a) -> ExperimentSeries:
    r = _r(a.r)
    f = observables.parse_observable(a.observable)
    xs = [float(x) for x in _points(a.x)]
    s = ExperimentSeries(meta={"theorem": "iterate", "observable": a.observable})
    for n in _int_list(a.n):
        if a.dual:
            vals = transfer.transfer_hat_apply(f, xs, n, backend=a.backend, N=a.grid)
        else:
            vals = transfer.pf_iterate(r, f, n, xs, backend=a.backend, N=a.grid, workers=a.workers)
        for x, v in zip(xs, vals):
            s.add(theorem="iterate", r=float(r), alpha=getattr(f, "alpha", None),
                  beta=getattr(f, "beta", None), x=x, n=n,
                  backend=a.backend if a.backend == "exact-tree" else f"grid[N={a.grid},graded,linear]",
                  value=float(v), target="", normalized=float(v))
    return s


def cmd_renewal(a) -> ExperimentSeries:
    f = observables.parse_observable(a.observable)
    s = ExperimentSeries(meta={"theorem": "renewal"})
    for n in _int_list(a.n):
        rep = renewal.renewal_bound_report(f, n)
        s.add(theorem="renewal-bound", n=n, backend="exact", value=rep["bv_norm"],
              target=rep["cubic_bound"], normalized=rep["ratio_cubic"])
        s.add(theorem="return-piece", n=n, backend="closed-form", value=renewal.return_piece_measure(n),
              target=(n + 1) ** -3, normalized="")
        sup, var = renewal.g_k_table(n)
        s.add(theorem="g_k-sup", n=n, backend="exact", value=sup, target=renewal.g_k_closed_form(n)[0])
        s.add(theorem="g_k-variation", n=n, backend="exact", value=var, target=renewal.g_k_closed_form(n)[1])
        if a.x:
            for x in _points(a.x):
                s.add(theorem="first-return-operator", x=float(x), n=n, backend="closed-form",
                      value=renewal.first_return_operator(f, n, float(x)))
    return s


def cmd_experiment(a) -> ExperimentSeries:
    if a.kind == "convergence":
        r = _r(a.r)
        f = observables.parse_observable(a.observable)
        ns = _int_list(a.n) if a.n else None
        return experiments.run_convergence(r, f, [float(x) for x in _points(a.x)], ns, N=a.grid,
                                           workers=a.workers, beta_label=str(getattr(f, "beta", "")))
    if a.kind == "limsup":
        beta = as_exact_point(parse_number(a.beta))
        ns = _int_list(a.n) if a.n else None
        return experiments.run_limsup_report(beta, a.alpha, a.n_max, r=_r(a.r), n_schedule=ns)
    if a.kind == "witnesses":
        return experiments.run_witnesses(a.alpha, a.n_max, a.variant, k=a.k, j_max=a.j_max)
    raise InputError(f"unknown experiment {a.kind!r}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tentfarey",
                                description="Tent-to-Farey interpolating maps: operators, tails, experiments")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--format", choices=("csv", "json"), default="csv")
        sp.add_argument("--out", default=None, help="write to PATH instead of stdout")

    sp = sub.add_parser("map", help="evaluate T_r or a composed inverse branch")
    sp.add_argument("--r", required=True)
    sp.add_argument("--x", required=True, help="point(s), comma separated")
    sp.add_argument("--word", default=None, help="0/1 word: evaluate f_{r,word} instead")
    common(sp)
    sp.set_defaults(func=cmd_map)

    sp = sub.add_parser("cf", help="continued fraction, convergents, Farey branch")
    sp.add_argument("--value", required=True)
    sp.add_argument("--n", type=int, default=8)
    sp.add_argument("--depth", type=int, default=None)
    sp.add_argument("--alpha", type=float, default=None)
    common(sp)
    sp.set_defaults(func=cmd_cf)

    sp = sub.add_parser("tail", help="tail sum near the singularity")
    sp.add_argument("--r", required=True)
    sp.add_argument("--beta", required=True)
    sp.add_argument("--alpha", type=float, required=True)
    sp.add_argument("--n", required=True, help="n value(s), comma separated")
    sp.add_argument("--x", required=True)
    common(sp)
    sp.set_defaults(func=cmd_tail)

    sp = sub.add_parser("iterate", help="P_r^n f (or the dual operator) at points")
    sp.add_argument("--r", default="1")
    sp.add_argument("--observable", required=True)
    sp.add_argument("--n", required=True)
    sp.add_argument("--x", required=True)
    sp.add_argument("--backend", choices=("exact-tree", "grid"), default="exact-tree")
    sp.add_argument("--grid", type=int, default=transfer.DEFAULT_GRID_NODES)
    sp.add_argument("--dual", action="store_true", help="iterate the Farey dual operator (r = 1)")
    sp.add_argument("--workers", type=int, default=1)
    common(sp)
    sp.set_defaults(func=cmd_iterate)

    sp = sub.add_parser("renewal", help="first-return operator bounds and tables")
    sp.add_argument("--n", required=True)
    sp.add_argument("--observable", default="indicator:[0.5,1]")
    sp.add_argument("--x", default=None)
    common(sp)
    sp.set_defaults(func=cmd_renewal)

    sp = sub.add_parser("experiment", help="convergence series, limsup report, witness tables")
    sp.add_argument("kind", choices=("convergence", "limsup", "witnesses"))
    sp.add_argument("--r", default="1")
    sp.add_argument("--observable", default="indicator:[0.5,1]")
    sp.add_argument("--beta", default="[0;(2)]")
    sp.add_argument("--alpha", type=float, default=0.5)
    sp.add_argument("--x", default="0.3,0.6,0.9")
    sp.add_argument("--n", default=None, help="explicit n schedule, comma separated")
    sp.add_argument("--n-max", dest="n_max", type=int, default=200)
    sp.add_argument("--variant", choices=("a", "b"), default="a")
    sp.add_argument("--k", type=int, default=1)
    sp.add_argument("--j-max", dest="j_max", type=int, default=30)
    sp.add_argument("--grid", type=int, default=transfer.DEFAULT_GRID_NODES)
    sp.add_argument("--workers", type=int, default=1)
    common(sp)
    sp.set_defaults(func=cmd_experiment)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        series = args.func(args)
    except CapacityError as exc:
        print(f"capacity exceeded: {exc}", file=sys.stderr)
        return 3
    except (InputError, ValueError, ZeroDivisionError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    text = series.to_csv() if args.format == "csv" else series.to_json() + "\n"
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
