"""``gencore`` command line: read JSON matrices, run one analysis, emit a report.

Exit status: 0 on success, 2 when an inverse does not exist or a bound's
hypotheses fail (an error object is printed), 1 on I/O or input errors.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from typing import Sequence

from . import __version__
from .calc import FORMULAS, MatrixFamily, cross_check_product_rule, derivative_bundle, fd_check
from .errors import GencoreError, HypothesisViolated
from .geninv import (
    check_prescribed_outer,
    core_inverse,
    dual_core_inverse,
    group_inverse,
    inverse_bundle,
    mp_inverse,
    penrose_residuals,
    verify_identities,
)
from .limits import Thresholds, analyze_sequence, build_trace, sample_family
from .matcore import MatrixError, RankTolerance, range_basis
from .perturb import (
    angle_bound,
    core_diff_decomposition,
    gap_bound_pair,
    gap_bound_single,
    norm_core_bound,
)
from .serialize import (
    SchemaError,
    emit_report,
    load_json,
    parse_family_file,
    parse_matrix_file,
    parse_trace_file,
    to_jsonable,
)
from .subgeo import gap

ENV_RANK_TOL = "GENCORE_RANK_TOL"
CONFIG_KEYS = {"rank_tol", "convergence_tol", "bound_threshold", "angle_margin", "format", "output"}
INVERSES = {
    "mp": mp_inverse,
    "group": group_inverse,
    "core": core_inverse,
    "dual-core": dual_core_inverse,
}


class UsageError(ValueError):
    code = "USAGE_ERROR"


def _positive_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError(f"must be positive and finite: {text!r}")
    return v


def _float_list(text: str) -> list[float]:
    return [_positive_float(p) for p in text.split(",") if p.strip()]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--rank-tol", type=_positive_float, default=None,
                        help=f"absolute singular-value cutoff (default: ${ENV_RANK_TOL} or relative)")
    common.add_argument("--format", choices=("json", "text"), default=None)
    common.add_argument("--output", default=None, help="write the report here instead of stdout")
    common.add_argument("--config", default=None, help="JSON file with option defaults")

    parser = argparse.ArgumentParser(prog="gencore", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("inverse", parents=[common], help="compute a generalized inverse")
    p.add_argument("matrix")
    p.add_argument("--kind", choices=(*INVERSES, "all"), default="core")

    p = sub.add_parser("verify", parents=[common], help="check identities and outer-inverse conditions")
    p.add_argument("matrix")
    p.add_argument("--candidate", default=None, help="matrix to test as core or dual core inverse")
    p.add_argument("--kind", choices=("core", "dual-core"), default="core")

    p = sub.add_parser("gap", parents=[common], help="gap between the column spaces of two matrices")
    p.add_argument("first")
    p.add_argument("second")

    p = sub.add_parser("perturb", parents=[common], help="evaluate a perturbation bound")
    p.add_argument("a")
    p.add_argument("b", nargs="?", default=None)
    p.add_argument("--bound", required=True,
                   choices=("angle", "norm_core", "gap_pair", "gap_single", "decomposition"))
    p.add_argument("--variant", choices=("core", "dual", "mp"), default="core",
                   help="which angle bound: core or dual core difference, or Moore-Penrose data only")
    p.add_argument("--dual", action="store_true", help="decomposition of the dual core difference")

    p = sub.add_parser("sequence", parents=[common], help="continuity diagnostics for a sampled sequence")
    p.add_argument("trace", help="trace file, or a family file with --from-family")
    p.add_argument("--from-family", action="store_true",
                   help="sample a polynomial family at t = 1/n, n = 1..COUNT, with limit a(0)")
    p.add_argument("--count", type=int, default=20)
    p.add_argument("--convergence-tol", type=_positive_float, default=None)
    p.add_argument("--bound-threshold", type=_positive_float, default=None)
    p.add_argument("--angle-margin", type=_positive_float, default=None)

    p = sub.add_parser("derivative", parents=[common], help="derivatives along a polynomial family")
    p.add_argument("family")
    p.add_argument("--t0", type=float, required=True)
    p.add_argument("--h", type=_float_list, default=None, help="comma-separated step schedule")
    return parser


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    obj = load_json(path)
    if not isinstance(obj, dict):
        raise SchemaError("/", "config must be an object")
    unknown = sorted(set(obj) - CONFIG_KEYS)
    if unknown:
        raise SchemaError("/", f"unknown config fields {unknown}")
    for key in ("rank_tol", "convergence_tol", "bound_threshold", "angle_margin"):
        if key in obj:
            v = obj[key]
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not (v > 0 and math.isfinite(v)):
                raise SchemaError(f"/{key}", "must be a positive number")
    if "format" in obj and obj["format"] not in ("json", "text"):
        raise SchemaError("/format", "must be 'json' or 'text'")
    if "output" in obj and not isinstance(obj["output"], str):
        raise SchemaError("/output", "must be a string")
    return obj


def _resolve(args, config: dict, name: str, default=None):
    flag = getattr(args, name, None)
    if flag is not None:
        return flag
    return config.get(name, default)


def _rank_tol(args, config) -> RankTolerance:
    value = _resolve(args, config, "rank_tol")
    if value is None and os.environ.get(ENV_RANK_TOL):
        try:
            value = _positive_float(os.environ[ENV_RANK_TOL])
        except argparse.ArgumentTypeError as exc:
            raise UsageError(f"{ENV_RANK_TOL}: {exc}") from None
    return RankTolerance(value)


def _cmd_inverse(args, tol, config):
    a = parse_matrix_file(args.matrix)
    if args.kind == "all":
        return inverse_bundle(a, tol)
    return {"kind": args.kind, "matrix": INVERSES[args.kind](a, tol)}


def _cmd_verify(args, tol, config):
    a = parse_matrix_file(args.matrix)
    which = "core" if args.kind == "core" else "dual_core"
    if args.candidate is not None:
        x = parse_matrix_file(args.candidate)
        return {"kind": args.kind, "outer_check": check_prescribed_outer(a, x, which, tol)}
    b = inverse_bundle(a, tol)
    if not b.group_exists:
        core_inverse(a, tol)  # raises the existence error with rank details
    return {
        "identities": verify_identities(b),
        "penrose": penrose_residuals(a, b.mp),
        "verified": b.verified,
        "outer_check": {
            "core": check_prescribed_outer(a, b.core, "core", tol),
            "dual_core": check_prescribed_outer(a, b.dual_core, "dual_core", tol),
        },
    }


def _cmd_gap(args, tol, config):
    m = range_basis(parse_matrix_file(args.first), tol)
    n = range_basis(parse_matrix_file(args.second), tol)
    return gap(m, n)


def _cmd_perturb(args, tol, config):
    a = parse_matrix_file(args.a)
    if args.bound == "norm_core":
        return norm_core_bound(a, tol)
    if args.b is None:
        raise UsageError(f"--bound {args.bound} needs a second matrix")
    b = parse_matrix_file(args.b)
    if args.bound == "angle":
        return angle_bound(a, b, args.variant, tol)
    if args.bound == "gap_pair":
        return gap_bound_pair(a, b, tol)
    if args.bound == "gap_single":
        return gap_bound_single(a, b, tol)
    return core_diff_decomposition(a, b, tol, dual=args.dual)


def _cmd_sequence(args, tol, config):
    if args.from_family:
        if args.count < 3:
            raise UsageError("--count must be at least 3")
        samples, limit = sample_family(MatrixFamily(parse_family_file(args.trace)), args.count)
    else:
        samples, limit = parse_trace_file(args.trace)
    kw = {}
    for name in ("convergence_tol", "bound_threshold", "angle_margin"):
        v = _resolve(args, config, name)
        if v is not None:
            kw[name] = float(v)
    trace = build_trace(samples, limit, tol)
    verdict = analyze_sequence(trace, tol, Thresholds(**kw))
    return {
        "verdict": verdict,
        "per_sample": trace.per_sample,
        "limit_rank": trace.limit_rank,
        "limit_rank_sq": trace.limit_rank_sq,
        "limit_group_exists": trace.limit_group_exists,
    }


def _cmd_derivative(args, tol, config):
    fam = MatrixFamily(parse_family_file(args.family))
    bundle = derivative_bundle(fam, args.t0, tol)
    kw = {"h_schedule": args.h} if args.h else {}
    tables = {w: fd_check(fam, args.t0, w, tol_policy=tol, **kw) for w in FORMULAS}
    return {
        "bundle": bundle,
        "product_rule_residuals": cross_check_product_rule(bundle),
        "fd": {w: {**to_jsonable(t), "order": t.order} for w, t in tables.items()},
    }


COMMANDS = {
    "inverse": _cmd_inverse,
    "verify": _cmd_verify,
    "gap": _cmd_gap,
    "perturb": _cmd_perturb,
    "sequence": _cmd_sequence,
    "derivative": _cmd_derivative,
}


def _error_object(exc) -> dict:
    if isinstance(exc, GencoreError):
        obj = exc.to_dict()
        if isinstance(exc, HypothesisViolated) and exc.report is not None:
            obj["details"] = {**obj["details"], "report": exc.report}
        return {"error": obj}
    if isinstance(exc, SchemaError):
        return {"error": exc.to_dict()}
    code = "IO_ERROR" if isinstance(exc, OSError) else "INPUT_ERROR"
    return {"error": {"code": code, "message": str(exc), "details": {}}}


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    fmt, output = "json", None
    try:
        config = _load_config(args.config)
        fmt = _resolve(args, config, "format", "json")
        output = _resolve(args, config, "output")
        tol = _rank_tol(args, config)
        report = COMMANDS[args.command](args, tol, config)
        emit_report(report, fmt, output)
        return 0
    except GencoreError as exc:
        status = exc.exit_code
        err = exc
    except (SchemaError, MatrixError, UsageError, ValueError, OSError) as exc:
        status = 1
        err = exc
    print(f"gencore: {err}", file=sys.stderr)
    try:
        emit_report(_error_object(err), fmt, output)
    except OSError:
        emit_report(_error_object(err), fmt, None)
    return status


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
