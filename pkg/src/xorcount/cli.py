"""Operator entry point.

Subcommands:
  epsilon  — evaluate the collision bound and variance bound at (n,m,q,f)
  fstar    — minimum sufficient constraint density certificate
  bound    — lower/upper bound or SPARSE-COUNT pipeline on an instance file
  sweep    — bound-vs-density tradeoff CSV over a list of f values
  table    — exact contingency-table count (pruned enumeration)
  solve    — exhaustive DIMACS solver (debug oracle; speaks the s/v protocol)

Instance files are sniffed by content: a DIMACS header, a "rows r cols c"
table spec, or one 0/1 assignment string per line (explicit set).
All log-scale outputs are printed in both natural log and log2.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
from pathlib import Path

from . import bounds as bd
from . import comb, dimacs, tables
from .gf2hash import Assignment
from .oracle import (CountingProblem, SolverProfile, _exhaustive_scan,
                     count_models)

LN2 = math.log(2.0)


def _load_problem(path: str):
    text = Path(path).read_text()
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("c ") or line == "c" or line.startswith("#"):
            continue
        if line.startswith("p cnf"):
            return CountingProblem.from_cnf(dimacs.parse(text)), "cnf"
        if line.startswith("rows"):
            spec = tables.parse_table_spec(text)
            problem, _ = tables.encode_to_cnf(spec)
            return problem, "table"
        break
    members = [
        Assignment.from_string(l.strip())
        for l in text.splitlines() if l.strip() and not l.strip().startswith("#")
    ]
    if not members:
        raise SystemExit("empty explicit-set file: %s" % path)
    return CountingProblem.from_explicit(members, members[0].n), "explicit"


def _solver_profile(args) -> SolverProfile | None:
    template = getattr(args, "solver", None) or os.environ.get("XORCOUNT_SOLVER")
    if not template:
        return None
    return SolverProfile(template, budget_s=getattr(args, "budget_s", None),
                         native_xor=getattr(args, "native_xor", False),
                         chunk=getattr(args, "chunk", 6))


def _print_scales(label: str, log2_value):
    if log2_value is None:
        print("%s: (vacuous)" % label)
        return
    ln_value = log2_value * LN2
    linear = 2.0 ** log2_value if log2_value < 1000 else None
    line = "%s: log2 = %.6g, ln = %.6g" % (label, log2_value, ln_value)
    if linear is not None:
        line += ", linear = %.6g" % linear
    print(line)


def cmd_epsilon(args) -> int:
    inputs = comb.EpsilonInputs(args.n, args.m, args.q, args.f)
    eps = comb.epsilon(inputs)
    _print_scales("epsilon(n=%d,m=%d,q=%d,f=%g)" % (args.n, args.m, args.q, args.f),
                  eps.log2_value)
    v = comb.variance_bound_v(args.q, args.n, args.m, args.f)
    _print_scales("v(q)", v.log2_value if not v.is_zero() else None)
    return 0


def cmd_fstar(args) -> int:
    q = 1 << (args.m + args.c)
    cert = comb.min_density_fstar(args.n, args.m, q, args.delta)
    print("f* = %.5f  (bracket [%.5f, %.5f], tolerance %g)"
          % (cert.f_star, cert.bracket_lo, cert.bracket_hi, cert.tolerance))
    print("n=%d m=%d c=%g delta=%g q=2^%d" % (cert.n, cert.m, cert.c,
                                              cert.delta, args.m + args.c))
    _print_scales("epsilon at f*", cert.condition_value.log2_value)
    _print_scales("threshold", cert.threshold_log / LN2)
    if not cert.met_at_half:
        print("warning: condition unmet even at f = 1/2")
        return 1
    return 0


def _run_lb(problem, args, solver):
    m_range = [args.m] if args.m else None
    if m_range is None:
        m0 = bd.pick_promising_m(problem, args.f, coarse_T=max(3, (args.T or 24) // 4),
                                 seed=args.seed, solver=solver, budget=args.budget_s)
        lo = max(1, m0 - 2)
        hi = min(problem.n, m0 + 2)
        m_range = range(lo, hi + 1)
    return bd.best_lower_bound(
        problem, args.f, m_range, T=args.T or 24, kappa=args.kappa,
        c=args.c_threshold, seed=args.seed, bonferroni=args.bonferroni,
        solver=solver, budget=args.budget_s,
    )


def _run_ub(problem, args, solver):
    if args.m:
        return bd.upper_bound(problem, args.m, args.f, args.delta,
                              seed=args.seed, T=args.T, solver=solver,
                              budget=args.budget_s)
    # no m given: walk upward from a promising level until the event fires
    m0 = bd.pick_promising_m(problem, args.f, coarse_T=max(3, (args.T or 24) // 4),
                             seed=args.seed, solver=solver, budget=args.budget_s)
    cert = None
    for m in range(m0, min(problem.n, m0 + 8) + 1):
        cert = bd.upper_bound(problem, m, args.f, args.delta, seed=args.seed,
                              T=args.T, solver=solver, budget=args.budget_s)
        if cert.event_fired:
            return cert
    return cert


def _bound_once(problem, args, solver):
    """Run one mode; returns (certificates, issued?)."""
    if args.mode == "lb":
        cert = _run_lb(problem, args, solver)
        _print_scales("lower bound", cert.bound_log2)
        print("confidence %.4f (m=%d, c=%g, kappa=%g, T=%d, p_est=%.4f)"
              % (cert.confidence, cert.m, cert.c, cert.kappa, cert.T, cert.p_est))
        return [cert.to_json()], True  # vacuous still counts as issued
    if args.mode == "ub":
        cert = _run_ub(problem, args, solver)
        _print_scales("upper bound", cert.verdict_log2)
        print("event %s (m=%d, T=%d, empty %d/%d, Delta=%g)"
              % ("fired" if cert.event_fired else "did not fire; sentinel",
                 cert.m, cert.T, cert.empty_count, cert.T, cert.delta))
        return [cert.to_json()], True
    if args.mode == "count":
        cfg = bd.SparseCountConfig(delta=args.delta, alpha=args.alpha,
                                   density_schedule=args.f, T=args.T,
                                   use_ln_n=not args.no_ln_n)
        res = bd.sparse_count(problem, cfg, seed=args.seed, solver=solver,
                              budget=args.budget_s)
        if res.log2_estimate is None:
            print("fewer than one solution witnessed (broke at i=0)")
        else:
            _print_scales("sparse-count estimate", res.log2_estimate)
        if res.exhausted:
            print("warning: level loop exhausted at i=%d" % res.break_i)
        return [res.to_json()], True
    raise SystemExit("unknown mode %r" % args.mode)


def cmd_bound(args) -> int:
    problem, _kind = _load_problem(args.input)
    solver = _solver_profile(args)
    t0 = time.monotonic()
    report = {
        "command": "bound", "input": args.input, "mode": args.mode,
        "seed": args.seed,
        "config": {"f": args.f, "m": args.m, "T": args.T, "delta": args.delta,
                   "kappa": args.kappa, "c": args.c_threshold,
                   "alpha": args.alpha, "bonferroni": args.bonferroni},
    }
    try:
        certs, issued = _bound_once(problem, args, solver)
    except bd.OracleUnknownError as exc:
        report["certificates"] = []
        report["inconclusive"] = str(exc)
        print("inconclusive: %s" % exc, file=sys.stderr)
        if args.json:
            report["wall_time_s"] = time.monotonic() - t0
            Path(args.json).write_text(json.dumps(report, indent=2) + "\n")
        return 2
    report["certificates"] = certs
    report["wall_time_s"] = time.monotonic() - t0
    if args.json:
        Path(args.json).write_text(json.dumps(report, indent=2) + "\n")
    return 0 if issued else 1


def cmd_sweep(args) -> int:
    problem, _kind = _load_problem(args.input)
    solver = _solver_profile(args)
    f_list = [float(t) for t in args.f_list.split(",")]
    out_dir = Path(args.certs_dir) if args.certs_dir else None
    if out_dir:
        out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    for f in f_list:
        t0 = time.monotonic()
        row = {"f": f, "lb_log2": "", "ub_log2": "", "wall_time_s": "",
               "certificates_path": ""}
        try:
            opts = dict(vars(args), f=f)
            ns = argparse.Namespace(**opts)
            lb = _run_lb(problem, ns, solver)
            ub = _run_ub(problem, ns, solver)
            row["lb_log2"] = "" if lb.bound_log2 is None else "%.6g" % lb.bound_log2
            row["ub_log2"] = "%.6g" % ub.verdict_log2
            if out_dir:
                p = out_dir / ("certs_f%s.json" % ("%g" % f).replace(".", "p"))
                p.write_text(json.dumps([lb.to_json(), ub.to_json()], indent=2) + "\n")
                row["certificates_path"] = str(p)
        except bd.OracleUnknownError as exc:
            print("f=%g inconclusive: %s" % (f, exc), file=sys.stderr)
        row["wall_time_s"] = "%.4f" % (time.monotonic() - t0)
        rows.append(row)
        print("f=%g  lb_log2=%s  ub_log2=%s  (%ss)"
              % (f, row["lb_log2"] or "-", row["ub_log2"] or "-",
                 row["wall_time_s"]))
    fieldnames = ["f", "lb_log2", "ub_log2", "wall_time_s", "certificates_path"]
    out = open(args.csv, "w", newline="") if args.csv else sys.stdout
    try:
        writer = csv.DictWriter(out, fieldnames=fieldnames)
        writer.writeheader()
        writer.writerows(rows)
    finally:
        if args.csv:
            out.close()
    return 0


def cmd_table(args) -> int:
    spec = tables.parse_table_spec(Path(args.input).read_text())
    count = tables.brute_force_count(spec, force=args.force)
    print("exact count: %d" % count)
    if count:
        _print_scales("log2 count", math.log2(count))
    return 0


def cmd_solve(args) -> int:
    """Exhaustive DIMACS solver speaking the standard s/v protocol."""
    formula = dimacs.parse(Path(args.input).read_text())
    bits = _exhaustive_scan(formula)
    if bits is None:
        print("s UNSATISFIABLE")
        return 20
    lits = [(v if (bits >> (v - 1)) & 1 else -v) for v in range(1, formula.num_vars + 1)]
    print("s SATISFIABLE")
    print("v " + " ".join(str(l) for l in lits) + " 0")
    return 10


def cmd_count_models(args) -> int:
    formula = dimacs.parse(Path(args.input).read_text())
    n = count_models(formula)
    print("models: %d" % n)
    if n:
        _print_scales("log2 models", math.log2(n))
    return 0


def _add_common_bound_flags(p):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--f", type=float, default=0.5, help="constraint density")
    p.add_argument("--m", type=int, default=None, help="constraint count")
    p.add_argument("--T", type=int, default=None, help="trials per estimate")
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--kappa", type=float, default=1.0)
    p.add_argument("--c-threshold", dest="c_threshold", type=float, default=None)
    p.add_argument("--alpha", type=float, default=0.04)
    p.add_argument("--no-ln-n", dest="no_ln_n", action="store_true",
                   help="drop the ln(n) factor from the trial-count formula")
    p.add_argument("--solver", default=None,
                   help='external solver command, e.g. "cryptominisat {in}"')
    p.add_argument("--budget-s", dest="budget_s", type=float, default=None)
    p.add_argument("--native-xor", dest="native_xor", action="store_true")
    p.add_argument("--chunk", type=int, default=6)
    p.add_argument("--bonferroni", action="store_true")
    p.add_argument("--jobs", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="xorcount")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("epsilon", help="evaluate the collision/variance bounds")
    p.add_argument("n", type=int)
    p.add_argument("m", type=int)
    p.add_argument("q", type=int)
    p.add_argument("f", type=float)
    p.set_defaults(func=cmd_epsilon)

    p = sub.add_parser("fstar", help="minimum sufficient density certificate")
    p.add_argument("n", type=int)
    p.add_argument("m", type=int)
    p.add_argument("--c", type=int, default=2, help="slack exponent, q = 2^(m+c)")
    p.add_argument("--delta", type=float, default=2.25)
    p.set_defaults(func=cmd_fstar)

    p = sub.add_parser("bound", help="run a bound pipeline on an instance")
    p.add_argument("input")
    p.add_argument("mode", choices=["lb", "ub", "count"])
    _add_common_bound_flags(p)
    p.add_argument("--json", default=None, help="write the run report here")
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("sweep", help="bound-vs-density CSV over several f")
    p.add_argument("input")
    p.add_argument("f_list", help="comma-separated densities, e.g. 0.05,0.1,0.5")
    _add_common_bound_flags(p)
    p.add_argument("--csv", default=None)
    p.add_argument("--certs-dir", dest="certs_dir", default=None)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("table", help="exact contingency-table count")
    p.add_argument("input")
    p.add_argument("--force", action="store_true",
                   help="override the enumeration capacity estimate")
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("solve", help="exhaustive DIMACS solver (debug oracle)")
    p.add_argument("input")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("count-models", help="exact model count (exhaustive)")
    p.add_argument("input")
    p.set_defaults(func=cmd_count_models)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
