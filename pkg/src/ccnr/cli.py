"""Command-line interface.

Exit codes: 0 = nothing detected / all checks passed, 2 = entanglement
detected, 1 = error (or, for ``verify``, a failed invariant).
"""
import argparse
import io
import json
import sys
from pathlib import Path

from . import states as st
from .criteria import (
    REPORT_VERSION,
    VIOLATION_TOL,
    correlation_data,
    evaluate,
    scan_family,
    write_reports_csv,
)
from .experiments import derive_seed, parse_grid, parse_schedule, run_verify, summary_csv
from .witnesses import (
    DegenerateMarginalError,
    certify_equivalence,
    expectation,
    optimal_witness,
    tr2_expectation,
    w_infinity_expectation_formula,
)

EXIT_OK, EXIT_ERROR, EXIT_DETECTED = 0, 1, 2
CRITERIA = ("ccnr", "enhanced", "quadratic_F", "family")


class CLIError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # usage errors must not collide with the "detected" exit code
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _add_state_args(p, count=False):
    p.add_argument("--state", help="state JSON file")
    p.add_argument("--generator", choices=[f for f in st.FAMILIES if f != "file"])
    p.add_argument("--d", nargs=2, type=int, metavar=("A", "B"), default=None)
    p.add_argument("--p", type=float, default=None, help="mixing parameter")
    p.add_argument("--rank", type=int, default=None)
    p.add_argument("--terms", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    if count:
        p.add_argument("--count", type=int, default=1)


def _add_common(p):
    p.add_argument("--out", help="output file (stdout if omitted)")
    p.add_argument("--force", action="store_true", help="overwrite an existing output file")
    p.add_argument("--tol", type=float, default=VIOLATION_TOL)


def _params(args):
    return {k: getattr(args, k) for k in ("p", "rank", "terms") if getattr(args, k) is not None}


def _load_states(args):
    if bool(args.state) == bool(args.generator):
        raise CLIError("give exactly one of --state or --generator")
    if args.state:
        return [st.load_state(args.state)]
    if args.d is None:
        raise CLIError("--generator needs --d A B")
    d_A, d_B = args.d
    count = getattr(args, "count", 1)
    seeds = [args.seed] if count == 1 else [derive_seed(args.seed, i) for i in range(count)]
    return [st.generate(args.generator, d_A, d_B, seed=s, **_params(args)) for s in seeds]


def _config(args):
    skip = {"out", "force", "func", "summary"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _emit(args, text):
    if not args.out:
        sys.stdout.write(text)
        return
    path = Path(args.out)
    if path.exists() and not args.force:
        raise CLIError(f"{path} exists; pass --force to overwrite")
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def cmd_eval(args):
    states_ = _load_states(args)
    names = CRITERIA if "all" in args.criterion else tuple(args.criterion)
    rows = []
    for s in states_:
        for rep in evaluate(s, names, args.x, args.y, args.tol):
            rows.append((s.label, rep))
    detected = any(rep.violated for _, rep in rows)
    if args.out and args.out.endswith(".json"):
        text = json.dumps({"version": REPORT_VERSION, "config": _config(args),
                           "reports": [rep.row(lbl) for lbl, rep in rows]}, indent=2) + "\n"
    else:
        buf = io.StringIO()
        buf.write(f"# config: {json.dumps(_config(args), sort_keys=True)}\n")
        write_reports_csv(buf, rows)
        text = buf.getvalue()
    _emit(args, text)
    return EXIT_DETECTED if detected else EXIT_OK


def cmd_scan(args):
    grid = parse_grid(args.grid)
    states_ = _load_states(args)
    rows, summary = [], []
    for s in states_:
        reports = scan_family(s, grid, tol=args.tol)
        rows += [(s.label, rep) for rep in reports]
        worst = min(reports, key=lambda r: r.margin)
        summary.append({"state_label": str(s.label), "min_margin": worst.margin,
                        "argmin": [worst.x, worst.y],
                        "violations": sum(r.violated for r in reports)})
    buf = io.StringIO()
    buf.write(f"# config: {json.dumps(_config(args), sort_keys=True)}\n")
    write_reports_csv(buf, rows)
    _emit(args, buf.getvalue())
    if args.summary:
        Path(args.summary).write_text(json.dumps(summary, indent=2) + "\n")
    return EXIT_DETECTED if any(s["violations"] for s in summary) else EXIT_OK


def witness_payload(state, r_schedule, tol=VIOLATION_TOL):
    """Optimal witness plus a verification block with both sides of the witness-value identity."""
    try:
        spec = optimal_witness(state)
    except DegenerateMarginalError as exc:
        return {"status": "degenerate", "message": str(exc)}, None
    data = correlation_data(state)
    w_inf = expectation(spec.operator, state)
    rep = certify_equivalence(state, r_schedule, tol=tol)
    verification = {
        "w_inf_expectation": w_inf,
        "w_inf_formula": w_infinity_expectation_formula(spec, data),
        "tr2_formula": tr2_expectation(spec, data),
        "enhanced_rhs_minus_lhs": spec.meta["lemma_value"],
        "enhanced_lhs": rep.enhanced_lhs,
        "enhanced_rhs": rep.enhanced_rhs,
        "F": rep.F,
        "status": rep.status,
        "detection_r": rep.detection_r,
        "detection_xy": rep.detection_xy,
        "radial": [{"r": r, "w_r_expectation": v, "family_margin": m} for r, v, m in rep.radial],
    }
    return {"status": "ok", "witness": spec.to_dict(), "verification": verification}, w_inf


def cmd_witness(args):
    states_ = _load_states(args)
    if len(states_) != 1:
        raise CLIError("witness takes a single state")
    payload, w_inf = witness_payload(states_[0], parse_schedule(args.r_schedule), args.tol)
    payload["config"] = _config(args)
    _emit(args, json.dumps(payload, indent=2) + "\n")
    if payload["status"] == "degenerate":
        print(f"degenerate marginals: {payload['message']}", file=sys.stderr)
    return EXIT_DETECTED if w_inf is not None and w_inf < -args.tol else EXIT_OK


def cmd_verify(args):
    if args.d is None:
        raise CLIError("verify needs --d A B")
    params = _params(args)
    if args.family == "ds":
        params["ppt"] = not args.allow_npt
    summary = run_verify(args.family, args.d[0], args.d[1], args.count, args.seed,
                         parse_grid(args.grid), parse_schedule(args.r_schedule),
                         args.tol, **params)
    _emit(args, summary_csv(summary, _config(args)))
    totals = summary.totals()
    print(f"verify {args.family} {args.d[0]}x{args.d[1]}: "
          + ", ".join(f"{k}={v}" for k, v in totals.items())
          + f", wall_clock={summary.wall_clock:.2f}s", file=sys.stderr)
    return EXIT_OK if summary.ok else EXIT_ERROR


def cmd_sample(args):
    states_ = _load_states(args)
    if len(states_) != 1:
        raise CLIError("sample writes a single state")
    _emit(args, json.dumps(st.state_to_dict(states_[0])) + "\n")
    return EXIT_OK


def build_parser():
    parser = _Parser(prog="ccnr", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="evaluate separability criteria on a state")
    _add_state_args(p, count=True)
    _add_common(p)
    p.add_argument("--criterion", action="append", choices=CRITERIA + ("all",))
    p.add_argument("--x", type=float, default=1.0)
    p.add_argument("--y", type=float, default=1.0)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("scan", help="scan the (x, y) criterion family over a grid")
    _add_state_args(p, count=True)
    _add_common(p)
    p.add_argument("--grid", default="default", help="polar:R_MAX[:N_THETA] or x:y,x:y,...")
    p.add_argument("--summary", help="write per-state min-margin summary JSON here")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("witness", help="construct and certify the optimal limiting witness")
    _add_state_args(p)
    _add_common(p)
    p.add_argument("--r-schedule", default="default", help="comma-separated radii")
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("verify", help="batch-certify the equivalence on a seeded ensemble")
    p.add_argument("--family", default="haar", choices=["haar", "separable", "product", "ds"])
    p.add_argument("--d", nargs=2, type=int, metavar=("A", "B"))
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--rank", type=int, default=None)
    p.add_argument("--terms", type=int, default=None)
    p.add_argument("--p", type=float, default=None)
    p.add_argument("--allow-npt", action="store_true",
                   help="ds family: keep NPT draws instead of rejecting them")
    p.add_argument("--grid", default="default")
    p.add_argument("--r-schedule", default="default")
    _add_common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sample", help="write a generated state as JSON")
    _add_state_args(p)
    _add_common(p)
    p.set_defaults(func=cmd_sample)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "criterion", "unset") is None:
        args.criterion = ["all"]
    try:
        return args.func(args)
    except (CLIError, st.InvalidStateError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
