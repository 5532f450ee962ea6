"""Command-line front end: ``embsplit <subcommand>`` or ``python -m embsplit``."""

from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence

from .bench import (
    DEFAULT_ECCENTRICITIES,
    ScanConfig,
    fit_orders_by_group,
    geometric_steps,
    read_scan_csv,
    run_adaptive_sweep,
    run_scan,
)
from .estgen import InfeasibleSystemError, derive_weights, verify_order
from .problems import kepler_flows
from .schemes import catalog, get_method, load_scheme_file, method_to_dict


def _parse_pin(text: str) -> tuple[int, float]:
    try:
        k, v = text.split("=", 1)
        return int(k), float(v)
    except ValueError:
        raise argparse.ArgumentTypeError(f"pin must look like k=value, got {text!r}") from None


def _parse_sym(text: str) -> tuple[int, int, int]:
    parts = text.split(":")
    try:
        if len(parts) == 2:
            return int(parts[0]), int(parts[1]), 1
        if len(parts) == 3:
            sign = int(parts[2])
            if sign not in (1, -1):
                raise ValueError
            return int(parts[0]), int(parts[1]), sign
    except ValueError:
        pass
    raise argparse.ArgumentTypeError(f"symmetry must look like i:j or i:j:-1, got {text!r}")


def _fmt_weights(w) -> str:
    return "\n".join(f"  w[{k:2d}] = {v: .17g}" for k, v in enumerate(w))


def cmd_derive(args) -> int:
    scheme, recipes, name = load_scheme_file(args.scheme_file)
    symmetry = list(args.sym)
    pins = dict(args.pin)
    if not args.ignore_file_constraints:
        for r in recipes:
            if r.order == args.order:
                symmetry = list(r.symmetry) + symmetry
                pins = {**dict(r.pins), **pins}
                break
    try:
        ew = derive_weights(scheme, args.order, symmetry, pins)
    except InfeasibleSystemError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return 2
    rep = verify_order(scheme, ew, max_grade=min(9, args.order + 1))
    print(f"scheme: {name or args.scheme_file} ({scheme.family.value}, {scheme.n_stages} stages)")
    print(f"estimator order {args.order}: residual {ew.residual:.3e}, free parameters {ew.nullspace_dim}")
    print(_fmt_weights(ew.w))
    print(f"verified estimator order: {rep.estimator_orders[0]}")
    if args.json:
        print(json.dumps({"order": args.order, "weights": [float(v) for v in ew.w]}))
    return 0


def cmd_verify(args) -> int:
    m = get_method(args.method)
    max_grade = args.max_grade or min(9, m.main_order + 1)
    rep = verify_order(m.scheme, list(m.estimators), max_grade)
    print(f"{m.name}: main order {rep.main_order} (declared {m.main_order})")
    print("  grade residuals: " + " ".join(f"{r:.1e}" for r in rep.main_residuals))
    for e, res, o in zip(m.estimators, rep.estimator_residuals, rep.estimator_orders):
        print(f"  estimator order {o} (declared {e.order}): " + " ".join(f"{r:.1e}" for r in res))
    ok = rep.main_order >= m.main_order and all(
        o >= e.order for e, o in zip(m.estimators, rep.estimator_orders)
    )
    return 0 if ok else 1


def _h_values(args) -> tuple[float, ...]:
    if args.h:
        return tuple(args.h)
    return geometric_steps(args.tend, args.nmin, args.nmax, args.per_octave)


def cmd_scan(args) -> int:
    cfg = ScanConfig(
        tuple(args.methods), tuple(args.e), _h_values(args), args.tend, args.strang, args.out, args.workers
    )
    records = run_scan(cfg)
    if not args.out:
        for r in records:
            print(f"{r.method} e={r.e} h={r.h:.6g} fevals={r.fevals} E1={r.E1_full} E2={r.E2} {r.status}")
    failed = sum(r.status != "ok" for r in records)
    print(f"{len(records)} runs, {failed} failed" + (f", written to {args.out}" if args.out else ""), file=sys.stderr)
    return 0


def cmd_adaptive(args) -> int:
    recs = run_adaptive_sweep(args.method, args.e, args.tol, args.tend, args.strang, args.out)
    print(f"{'tol':>9} {'steps':>7} {'rejected':>8} {'fevals':>8} {'E1_full':>10} {'E1_pos':>10}  status")
    for r in recs:
        e1 = f"{r.E1_full:10.3e}" if r.E1_full is not None else f"{'':>10}"
        ep = f"{r.E1_pos:10.3e}" if r.E1_pos is not None else f"{'':>10}"
        print(f"{r.tol:9.1e} {r.nsteps:7d} {r.rejected:8d} {r.fevals:8d} {e1} {ep}  {r.status}")
    return 0 if all(r.status == "ok" for r in recs) else 1


def cmd_order_fit(args) -> int:
    recs = read_scan_csv(args.csv)
    fits = fit_orders_by_group(recs, args.metric, (args.lo, args.hi))
    for (method, e), fit in fits.items():
        if fit is None:
            print(f"{method:14s} e={e}: too few points in window")
        else:
            print(f"{method:14s} e={e}: slope {fit.slope:.3f} (rms {fit.residual:.2e}, {fit.n_points} points)")
    return 0


def cmd_list_methods(args) -> int:
    flows = kepler_flows(strang=args.strang)
    print(f"{'name':14s} {'family':14s} {'order':>5} {'est':>6} {'stages':>6} {'fevals':>6}")
    for m in catalog():
        est = ",".join(str(o) for o in m.estimator_orders)
        print(
            f"{m.name:14s} {m.scheme.family.value:14s} {m.main_order:5d} {est:>6} "
            f"{m.n_stages:6d} {m.fevals_per_step(flows.cost):6d}"
        )
    return 0


def cmd_export(args) -> int:
    text = json.dumps(method_to_dict(get_method(args.method)), indent=2) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="embsplit", description="Embedded error estimators for splitting methods.")
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("derive", help="derive estimator weights for a scheme file")
    d.add_argument("scheme_file")
    d.add_argument("--order", type=int, required=True)
    d.add_argument("--pin", type=_parse_pin, action="append", default=[], metavar="k=v")
    d.add_argument("--sym", type=_parse_sym, action="append", default=[], metavar="i:j[:sign]")
    d.add_argument("--ignore-file-constraints", action="store_true",
                   help="do not merge symmetry/pins stored in the file for this order")
    d.add_argument("--json", action="store_true", help="also print the weights as JSON")
    d.set_defaults(func=cmd_derive)

    v = sub.add_parser("verify", help="check main and estimator orders of a catalog method")
    v.add_argument("method")
    v.add_argument("--max-grade", type=int)
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("scan", help="fixed-step Kepler scan, one CSV row per run")
    s.add_argument("--methods", nargs="+", required=True)
    s.add_argument("--e", nargs="+", type=float, default=list(DEFAULT_ECCENTRICITIES))
    s.add_argument("--h", nargs="+", type=float)
    s.add_argument("--nmin", type=int, default=25, help="fewest steps when --h is omitted")
    s.add_argument("--nmax", type=int, default=3200, help="most steps when --h is omitted")
    s.add_argument("--per-octave", type=int, default=2)
    s.add_argument("--tend", type=float, default=20.0)
    s.add_argument("--strang", choices=["BAB", "ABA"], default="BAB")
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--out")
    s.set_defaults(func=cmd_scan)

    a = sub.add_parser("adaptive", help="adaptive tolerance sweep on Kepler")
    a.add_argument("--method", required=True)
    a.add_argument("--tol", nargs="+", type=float, required=True)
    a.add_argument("--e", type=float, default=0.4)
    a.add_argument("--tend", type=float, default=20.0)
    a.add_argument("--strang", choices=["BAB", "ABA"], default="BAB")
    a.add_argument("--out")
    a.set_defaults(func=cmd_adaptive)

    o = sub.add_parser("order-fit", help="fit log E1 against log h per method and eccentricity")
    o.add_argument("csv")
    o.add_argument("--metric", default="E1_full", choices=["E1_full", "E1_pos", "E2", "E2_low"])
    o.add_argument("--lo", type=float, default=1e-10)
    o.add_argument("--hi", type=float, default=1e-3)
    o.set_defaults(func=cmd_order_fit)

    lm = sub.add_parser("list-methods", help="catalog names, orders, stages and force evaluations per step")
    lm.add_argument("--strang", choices=["BAB", "ABA"], default="BAB")
    lm.set_defaults(func=cmd_list_methods)

    ex = sub.add_parser("export", help="write a catalog method as a scheme file")
    ex.add_argument("method")
    ex.add_argument("--out")
    ex.set_defaults(func=cmd_export)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (KeyError, ValueError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
