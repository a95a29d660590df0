"""Command-line front end: ``bpfail <gen|check|certify|solve-bp|solve-l0|repro>``.

Exit codes: 0 success, 1 usage error, 2 precondition violated, 3 infeasible,
4 reproduction mismatch.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import io
from .certify import P_TOL, certify_drastic_failure, critical_index, failure_indices, p_vector
from .exceptions import BpfailError, ImageConditionError
from .generators import (
    LtiSystem,
    bernstein_sample,
    companion_system,
    ctrb,
    fuel_instance,
    hankel,
    page_matrix,
)
from .solvers import solve_bp, solve_l0
from .structure import verify_sign_consistent, verify_totally_positive, verify_variation_bounding

EXIT_OK, EXIT_USAGE, EXIT_PRECONDITION, EXIT_INFEASIBLE, EXIT_MISMATCH = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _positive(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {text}")
    return v


def _impulses(text: str) -> dict[int, float]:
    out = {}
    for item in text.split(","):
        try:
            t, v = item.split(":")
            out[int(t)] = float(v)
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected time:value pairs, got {item!r}") from None
    return out


def _outdir(args) -> Path:
    out = Path(args.out or os.environ.get("BPFAIL_OUT") or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _system(args) -> LtiSystem:
    if args.A is not None:
        A = io.read_matrix(args.A)
        b = np.ones(A.shape[0]) if args.b is None else np.asarray(args.b)
        return LtiSystem(A, b, None if args.c is None else np.asarray(args.c))
    if args.diag is None:
        raise UsageError("give --diag or --A")
    d = np.asarray(args.diag)
    b = np.ones(d.size) if args.b is None else np.asarray(args.b)
    c = None if args.c is None else np.asarray(args.c)
    return LtiSystem(np.diag(d), b, c)


# ---------------------------------------------------------------------------
# commands


def cmd_gen(args) -> int:
    out = _outdir(args)
    kind = args.kind
    if kind == "ctrb":
        io.write_matrix(out / "V.csv", ctrb(_system(args), _need(args.N, "--N")))
    elif kind == "hankel":
        if args.den is not None or args.poles is not None:
            den = args.den if args.den is not None else np.poly(args.poles)
            sysm = companion_system(den)
        else:
            sysm = _system(args)
            if sysm.c is None:
                raise UsageError("hankel needs --c, --den or --poles")
        io.write_matrix(out / "V.csv", hankel(sysm, _need(args.M, "--M"), _need(args.N, "--N")))
    elif kind == "page":
        if args.g is None:
            raise UsageError("page needs --g samples file")
        io.write_matrix(out / "V.csv", page_matrix(io.read_vector(args.g), _need(args.M, "--M")))
    elif kind == "bernstein":
        if args.points is None:
            raise UsageError("bernstein needs --points")
        io.write_matrix(out / "V.csv", bernstein_sample(_need(args.degree, "--degree"), args.points))
    elif kind == "fuel":
        inst = fuel_instance(_system(args), _need(args.N, "--N"), args.impulse or {})
        io.write_matrix(out / "V.csv", inst.V)
        io.write_matrix(out / "y.csv", inst.y[:, None])
        io.write_json(out / "instance.json", inst.to_dict())
    return EXIT_OK


def _need(value, flag):
    if value is None:
        raise UsageError(f"{flag} is required")
    return value


def cmd_check(args) -> int:
    V = io.read_matrix(args.V)
    X = V.T if args.transpose else V
    if args.property == "sc":
        rep = verify_sign_consistent(X, args.order, strict=args.strict)
    elif args.property == "tp":
        rep = verify_totally_positive(X, args.order, strict=args.strict)
    else:
        rep = verify_variation_bounding(X, args.order)
    out = _outdir(args)
    io.write_json(out / "structure.json", rep.to_dict())
    print(f"{rep.property}_{rep.order}: holds={rep.holds} route={rep.route} status={rep.status}")
    return EXIT_OK


def cmd_certify(args) -> int:
    V = io.read_matrix(args.V)
    out = _outdir(args)
    pv = p_vector(V, rank_tol=args.rank_tol)
    if not pv.image_condition_ok:
        io.write_json(out / "certificate.json", {
            "error": "image_condition",
            "message": "some column of V is not in the span of its leading rank-r block",
            "r": pv.r,
        })
        print("precondition violated: image condition", file=sys.stderr)
        return EXIT_PRECONDITION
    if args.no_bisection:
        cert = failure_indices(V, args.p_tol, pv)
    else:
        cert = critical_index(V, args.p_tol)
    report = {"certificate": cert.to_dict(), "r": pv.r, "n": V.shape[1]}
    if args.instance:
        inst = json.loads(Path(args.instance).read_text())
        sysm = LtiSystem.from_dict(inst)
        report["char_poly_route"] = certify_drastic_failure(
            sysm.A, sysm.b, horizon=V.shape[1], tol=args.p_tol
        ).to_dict()
    io.write_json(out / "certificate.json", report)
    io.write_pairs(out / "p.txt", pv.values)
    print(f"route={cert.route} critical_index={cert.critical_index} "
          f"failure_indices={cert.failure_indices}")
    return EXIT_OK


def cmd_solve_bp(args) -> int:
    V, y = io.read_matrix(args.V), io.read_vector(args.y)
    sol = solve_bp(V, y, feas_tol=args.feas_tol, threshold=args.threshold)
    out = _outdir(args)
    io.write_json(out / "bp.json", sol.to_dict())
    if sol.status == "infeasible":
        print("infeasible: y is not in the range of V", file=sys.stderr)
        return EXIT_INFEASIBLE
    (out / "bp.txt").write_text(sol.to_text())
    print(f"status={sol.status} objective={sol.objective:.17g} support={sol.support}")
    return EXIT_OK


def cmd_solve_l0(args) -> int:
    V, y = io.read_matrix(args.V), io.read_vector(args.y)
    rep = solve_l0(V, y, args.max_card, args.res_tol, args.threshold, args.budget)
    out = _outdir(args)
    io.write_json(out / "l0.json", rep.to_dict())
    if not rep.solutions_found:
        print("no solution within the searched cardinality", file=sys.stderr)
        return EXIT_INFEASIBLE
    (out / "l0.txt").write_text(rep.solutions_found[0].to_text())
    print(f"min_cardinality={rep.min_cardinality} count={rep.count} exhaustive={rep.exhaustive}")
    return EXIT_OK


def cmd_repro(args) -> int:
    from .repro import TARGETS, run

    targets = sorted(TARGETS) if args.target == "all" else [args.target]
    if any(t not in TARGETS for t in targets):
        raise UsageError(f"unknown target {args.target!r}; choose from {sorted(TARGETS)} or all")
    root = _outdir(args)
    code = EXIT_OK
    for t in targets:
        res = run(t)
        d = root / t
        d.mkdir(parents=True, exist_ok=True)
        for name, text in res.files.items():
            (d / name).write_text(text)
        io.write_json(d / "report.json", res.to_dict())
        print(f"{t}: {'PASS' if res.passed else 'FAIL'}")
        for c in res.checks:
            if not c.passed:
                print(f"  {c.name}: expected {c.expected}, got {c.actual} (tol {c.tol})")
        for w in res.warnings:
            print(f"  warning: {w}")
        if not res.passed:
            code = EXIT_MISMATCH
    return code


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--out", help="output directory (default $BPFAIL_OUT or .)")

    p = _Parser(prog="bpfail", description="Certify and reproduce basis pursuit failures.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", parents=[common], help="generate an instance")
    g.add_argument("kind", choices=["ctrb", "hankel", "page", "bernstein", "fuel"])
    g.add_argument("--diag", type=_floats, help="diagonal of A")
    g.add_argument("--A", help="CSV file with A")
    g.add_argument("--b", type=_floats)
    g.add_argument("--c", type=_floats)
    g.add_argument("--den", type=_floats, help="denominator of 1/den(z), descending")
    g.add_argument("--poles", type=_floats, help="poles of 1/prod(z - p)")
    g.add_argument("--N", type=int)
    g.add_argument("--M", type=int)
    g.add_argument("--g", help="CSV file with impulse-response samples")
    g.add_argument("--degree", type=int)
    g.add_argument("--points", type=_floats)
    g.add_argument("--impulse", type=_impulses, help="time:value pairs, e.g. 0:+1,9:-1")
    g.set_defaults(func=cmd_gen)

    c = sub.add_parser("check", parents=[common], help="structure analysis")
    c.add_argument("V")
    c.add_argument("--property", choices=["sc", "tp", "vb"], default="sc")
    c.add_argument("--order", type=int, required=True)
    c.add_argument("--strict", action="store_true")
    c.add_argument("--transpose", action="store_true", help="analyze V^T")
    c.set_defaults(func=cmd_check)

    ce = sub.add_parser("certify", parents=[common], help="failure certificates")
    ce.add_argument("V")
    ce.add_argument("--p-tol", type=_positive, default=P_TOL)
    ce.add_argument("--rank-tol", type=_positive, default=1e-10)
    ce.add_argument("--no-bisection", action="store_true")
    ce.add_argument("--instance", help="instance.json to also run the polynomial route")
    ce.set_defaults(func=cmd_certify)

    solvers = (
        ("solve-bp", cmd_solve_bp, "basis pursuit by simplex"),
        ("solve-l0", cmd_solve_l0, "exhaustive sparsest solutions"),
    )
    for name, func, text in solvers:
        s = sub.add_parser(name, parents=[common], help=text)
        s.add_argument("V")
        s.add_argument("y")
        s.add_argument("--threshold", type=_positive, default=1e-6)
        s.set_defaults(func=func)
        if name == "solve-bp":
            s.add_argument("--feas-tol", type=_positive, default=1e-8)
        else:
            s.add_argument("--max-card", type=int)
            s.add_argument("--res-tol", type=_positive, default=1e-8)
            s.add_argument("--budget", type=int, default=10**7)

    r = sub.add_parser("repro", parents=[common], help="reproduce a figure or example")
    r.add_argument("target")
    r.set_defaults(func=cmd_repro)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"bpfail: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ImageConditionError as exc:
        print(f"bpfail: precondition violated: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except (BpfailError, ValueError, OSError) as exc:
        print(f"bpfail: error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION if isinstance(exc, ValueError) else EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
