"""Command line front end: ``l1curve build|eval|verify|export``.

Exit codes: 0 ok, 1 check failure or resource limit, 2 usage or input error.
The environment variable ``L1CURVE_OUT`` sets the default output directory.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

import mpmath

from . import curve, verify
from .exact import format_rational, parse_rational
from .schedule import (
    DEFAULT_MAX_COEFF_BITS,
    DEFAULT_MAX_DEGREE,
    ModelFormatError,
    OmegaSpec,
    ResourceLimitError,
    build_model,
    deserialize_model,
    serialize_model,
    shape_max_coeff_bits,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
OUT_ENV = "L1CURVE_OUT"


class UsageError(Exception):
    pass


def _out_path(value: str | None, default_name: str) -> Path:
    if value:
        return Path(value)
    return Path(os.environ.get(OUT_ENV, ".")) / default_name


def _rational(text: str) -> Fraction:
    try:
        return parse_rational(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _rational_list(values) -> list:
    out = []
    for chunk in values or ():
        out.extend(_rational(p) for p in chunk.split(",") if p.strip())
    return out


def _load(path: str):
    try:
        return deserialize_model(Path(path).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read model: {exc}") from None
    except ModelFormatError as exc:
        raise UsageError(f"bad model file: {exc}") from None


def cmd_build(args) -> int:
    if args.levels < 1:
        raise UsageError("--levels must be >= 1")
    try:
        omega = OmegaSpec.parse(args.omega)
    except ValueError as exc:
        raise UsageError(f"bad --omega: {exc}") from None
    try:
        model = build_model(omega, args.levels, max_degree=args.max_degree,
                            max_coeff_bits=args.max_coeff_bits)
    except ResourceLimitError as exc:
        print(f"resource limit exceeded: {exc}", file=sys.stderr)
        return EXIT_FAIL
    path = _out_path(args.output, "model.json")
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(serialize_model(model))
    print(f"{'r':>3} {'k_r':>5} {'n_r':>5} {'max_deg':>8} {'coeff_bits':>10}")
    for e in model.schedule:
        nodes = model.nodes_at_depth(e.r)
        deg = max(node.g.degree for node in nodes)
        bits = max(shape_max_coeff_bits(node) for node in nodes)
        print(f"{e.r:>3} {e.k:>5} {e.n:>5} {deg:>8} {bits:>10}")
    print(f"wrote {path}")
    return EXIT_OK


def cmd_eval(args) -> int:
    model = _load(args.model)
    try:
        if args.z is not None:
            res = curve.eval_F_complex(model, args.t, args.z, args.r_max, args.prec)
        else:
            res = curve.eval_F_real(model, args.t, args.x, args.r_max, args.prec)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    digits = max(17, int(args.prec * 0.30103))
    print(f"value: {mpmath.nstr(res.value, digits)}")
    print(f"error_bound: {format_rational(res.error_bound)} (~{float(res.error_bound):.3e})")
    return EXIT_OK


def cmd_verify(args) -> int:
    model = _load(args.model)
    suites = []
    for chunk in args.only or ():
        suites.extend(s for s in chunk.split(",") if s)
    suites = suites or list(verify.SUITES)
    t_values = _rational_list(args.t) or list(verify.DEFAULT_T_VALUES)
    try:
        reports = verify.run_suite(model, suites, eps=args.eps, seed=args.seed,
                                   t_values=t_values, isometry_pairs=args.pairs)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    doc = verify.report_document(reports)
    path = _out_path(args.report, "report.json")
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=1) + "\n")
    for rep in reports:
        if rep.name == "secant":
            for probe in rep.witness["probes"]:
                enc = probe["ratio"]
                print(f"secant t={rep.params['t']} r={probe['r']} i={probe['i']}: "
                      f"[{float(enc.lo):.12f}, {float(enc.hi):.12f}]")
        if rep.verdict in (verify.FAIL, verify.INCONCLUSIVE):
            print(f"{rep.verdict}: {rep.name} {verify._jsonable(rep.params)}")
    summary = doc["summary"]
    print(" ".join(f"{k}={v}" for k, v in summary.items()) + f"  report: {path}")
    return verify.exit_status(reports, args.allow_inconclusive)


def cmd_export(args) -> int:
    model = _load(args.model)
    ts = _rational_list(args.t)
    xs = curve.unit_grid(args.points)
    path = _out_path(args.output, "samples.csv")
    path.parent.mkdir(parents=True, exist_ok=True)
    try:
        with path.open("w", newline="") as fh:
            curve.export_csv(model, ts, xs, args.r_max, out=fh)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    print(f"wrote {len(ts) * len(xs)} rows to {path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="l1curve", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="construct a model and write it as JSON")
    b.add_argument("--omega", default="constant:1",
                   help="constant:c | geometric:rho | factorial-reciprocal | explicit-table:a,b,...")
    b.add_argument("--levels", type=int, default=3)
    b.add_argument("-o", "--output")
    b.add_argument("--max-degree", type=int, default=DEFAULT_MAX_DEGREE)
    b.add_argument("--max-coeff-bits", type=int, default=DEFAULT_MAX_COEFF_BITS)
    b.set_defaults(func=cmd_build)

    e = sub.add_parser("eval", help="evaluate F_t at a real x or complex z")
    e.add_argument("model")
    e.add_argument("--t", type=_rational, required=True)
    where = e.add_mutually_exclusive_group(required=True)
    where.add_argument("--x", type=_rational)
    where.add_argument("--z", help="complex point such as 1/2+1/2i")
    e.add_argument("--r-max", type=int)
    e.add_argument("--prec", type=int, default=curve.DEFAULT_PRECISION, help="bits, >= 64")
    e.set_defaults(func=cmd_eval)

    v = sub.add_parser("verify", help="run verification suites and write a report")
    v.add_argument("model")
    v.add_argument("--only", action="append", help=f"comma list from {','.join(verify.SUITES)}")
    v.add_argument("--eps", type=_rational, default=verify.DEFAULT_EPS,
                   help="enclosure width relative to the expected norm")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--t", action="append", help="parameter values for derivative/secant checks")
    v.add_argument("--pairs", type=int, default=200, help="random isometry pairs")
    v.add_argument("--report")
    v.add_argument("--allow-inconclusive", action="store_true",
                   help="treat inconclusive verdicts as warnings")
    v.set_defaults(func=cmd_verify)

    x = sub.add_parser("export", help="write CSV samples of F_t(x)")
    x.add_argument("model")
    x.add_argument("--t", action="append", help="comma list of parameter values")
    x.add_argument("--points", type=int, default=101)
    x.add_argument("--r-max", type=int)
    x.add_argument("-o", "--output")
    x.set_defaults(func=cmd_export)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    if getattr(args, "eps", None) is not None and args.eps <= 0:
        print("l1curve: error: --eps must be positive", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"l1curve: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
