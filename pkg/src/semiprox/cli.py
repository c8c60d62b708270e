"""Command-line entry point: ``semiprox {eval,table,check,solve}``.

Exit codes: 0 ok, 1 check failed, 2 invalid input, 3 numeric range,
4 solver precondition.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from typing import Any, Optional, Sequence

import numpy as np

from .check import breakpoints, cross_check
from .moreau import env_values, falpha_values, prox_base_values
from .penalty import PenaltySpec, RejectedCoeffs, f_values, load_spec
from .prox import prox_semiconvex
from .solver import RegressionProblem, SolveConfig, StepTooLarge, solve

EXIT_OK, EXIT_CHECK, EXIT_INPUT, EXIT_RANGE, EXIT_PRECOND = 0, 1, 2, 3, 4

TABLE_HEADER = ["x", "f", "env", "f_alpha", "prox_base", "prox_semi_lo", "prox_semi_hi", "set_valued", "case"]


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _token(v: float) -> Any:
    """JSON/CSV form of an extended real."""
    v = float(v)
    if v == math.inf:
        return "inf"
    if v == -math.inf:
        return "-inf"
    return v + 0.0


def _csv_field(v: float) -> str:
    t = _token(v)
    return t if isinstance(t, str) else repr(t)


def _positive(name: str, v: float) -> float:
    if not (math.isfinite(v) and v > 0):
        raise CliError(EXIT_RANGE, f"--{name} must be a positive finite number, got {v}")
    return v


def _finite(name: str, v: float) -> float:
    if not math.isfinite(v):
        raise CliError(EXIT_RANGE, f"--{name} must be finite, got {v}")
    return v


def _spec(path: str) -> PenaltySpec:
    try:
        return load_spec(path)
    except OSError as exc:
        raise CliError(EXIT_INPUT, f"cannot read spec: {exc}") from exc
    except RejectedCoeffs as exc:
        raise CliError(EXIT_INPUT, f"invalid spec: {exc}") from exc


def _record(spec: PenaltySpec, alpha: float, beta: float, x: float) -> dict:
    res, tag = prox_semiconvex(spec, alpha, beta, x)
    return {
        "x": _token(x),
        "f": _token(f_values(spec, x)),
        "env": _token(env_values(spec, alpha, x)),
        "f_alpha": _token(falpha_values(spec, alpha, x)),
        "prox_base": _token(prox_base_values(spec, alpha, x)),
        "prox_semiconvex": str(res),
        "prox_semiconvex_kind": res.kind,
        "prox_semiconvex_points": [_token(p) for p in res.points],
        "case": str(tag),
    }


def cmd_eval(args: argparse.Namespace, out: io.TextIOBase) -> int:
    spec = _spec(args.spec)
    alpha, beta = _positive("alpha", args.alpha), _positive("beta", args.beta)
    x = _finite("x", args.x)
    json.dump(_record(spec, alpha, beta, x), out, indent=2)
    out.write("\n")
    return EXIT_OK


def cmd_table(args: argparse.Namespace, out: io.TextIOBase) -> int:
    spec = _spec(args.spec)
    alpha, beta = _positive("alpha", args.alpha), _positive("beta", args.beta)
    lo, hi = _finite("lo", args.lo), _finite("hi", args.hi)
    if not lo < hi:
        raise CliError(EXIT_RANGE, f"need lo < hi, got [{lo}, {hi}]")
    if args.n < 2:
        raise CliError(EXIT_RANGE, f"need n >= 2, got {args.n}")
    xs = np.linspace(lo, hi, args.n)
    f = f_values(spec, xs)
    e = env_values(spec, alpha, xs)
    fa = falpha_values(spec, alpha, xs)
    pb = prox_base_values(spec, alpha, xs)
    w = csv.writer(out, lineterminator="\n")
    w.writerow(TABLE_HEADER)
    for i, x in enumerate(xs):
        res, tag = prox_semiconvex(spec, alpha, beta, float(x))
        w.writerow([
            _csv_field(x), _csv_field(f[i]), _csv_field(e[i]), _csv_field(fa[i]), _csv_field(pb[i]),
            _csv_field(res.lo), _csv_field(res.hi), "true" if res.is_set_valued else "false", str(tag),
        ])
    return EXIT_OK


def cmd_check(args: argparse.Namespace, out: io.TextIOBase) -> int:
    spec = _spec(args.spec)
    alpha, beta = _positive("alpha", args.alpha), _positive("beta", args.beta)
    if args.samples < 1:
        raise CliError(EXIT_RANGE, f"need samples >= 1, got {args.samples}")
    c = spec.coeffs
    reach = 3.0 * max(alpha, beta, 1.0) * max(abs(c.b1), abs(c.b2), 1.0)
    rng = np.random.default_rng(args.seed)
    xs = list(rng.uniform(-reach, reach, args.samples)) + breakpoints(spec, alpha, beta)
    report = cross_check(spec, alpha, beta, xs)
    out.write(f"checked {report.checked} points, max deviation {report.max_deviation:.3e}\n")
    for m in report.mismatches:
        out.write(f"MISMATCH x={m.x!r}: closed form {m.result}, oracle {list(m.oracle)[:6]}\n")
    out.write("PASS\n" if report.ok else "FAIL\n")
    return EXIT_OK if report.ok else EXIT_CHECK


def _read_matrix(path: str) -> np.ndarray:
    """Numeric CSV; a first row that does not parse as numbers is taken as a header."""
    try:
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and any(cell.strip() for cell in r)]
    except OSError as exc:
        raise CliError(EXIT_INPUT, f"cannot read {path}: {exc}") from exc
    if rows:
        try:
            [float(v) for v in rows[0]]
        except ValueError:
            rows = rows[1:]
    if not rows:
        raise CliError(EXIT_INPUT, f"{path}: no data rows")
    if len({len(r) for r in rows}) != 1:
        raise CliError(EXIT_INPUT, f"{path}: ragged rows")
    try:
        return np.array([[float(v) for v in r] for r in rows])
    except ValueError as exc:
        raise CliError(EXIT_INPUT, f"{path}: {exc}") from exc


def cmd_solve(args: argparse.Namespace, out: io.TextIOBase) -> int:
    spec = _spec(args.spec)
    alpha, beta = _positive("alpha", args.alpha), _positive("beta", args.beta)
    lam = _finite("lambda", args.lam)
    if lam < 0:
        raise CliError(EXIT_RANGE, f"--lambda must be nonnegative, got {lam}")
    if args.max_iter < 1 or not args.tol > 0:
        raise CliError(EXIT_RANGE, "--max-iter must be >= 1 and --tol > 0")
    X = _read_matrix(args.X)
    y = _read_matrix(args.y)
    if y.ndim != 2 or y.shape[1] != 1:
        raise CliError(EXIT_INPUT, f"y must have one column, got {y.shape[1]}")
    if y.shape[0] != X.shape[0]:
        raise CliError(EXIT_INPUT, f"X has {X.shape[0]} rows but y has {y.shape[0]}")
    if not (np.isfinite(X).all() and np.isfinite(y).all()):
        raise CliError(EXIT_INPUT, "X and y must be finite")
    problem = RegressionProblem(X, y[:, 0], spec, alpha, lam)
    try:
        report = solve(problem, SolveConfig(beta, args.max_iter, args.tol))
    except StepTooLarge as exc:
        raise CliError(EXIT_PRECOND, str(exc)) from exc
    doc = report.to_dict()
    doc["support"] = [j + 1 for j in report.support]
    json.dump(doc, out, indent=2)
    out.write("\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="semiprox", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--spec", required=True, metavar="PATH", help="penalty spec JSON")
    common.add_argument("--alpha", type=float, required=True)
    common.add_argument("--beta", type=float, required=True)

    p = sub.add_parser("eval", parents=[common], help="evaluate everything at one point")
    p.add_argument("--x", type=float, required=True)
    p.set_defaults(run=cmd_eval)

    p = sub.add_parser("table", parents=[common], help="CSV table on a uniform grid")
    p.add_argument("--lo", type=float, required=True)
    p.add_argument("--hi", type=float, required=True)
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(run=cmd_table)

    p = sub.add_parser("check", parents=[common], help="cross-check the prox against the grid oracle")
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(run=cmd_check)

    p = sub.add_parser("solve", parents=[common], help="penalized least squares")
    p.add_argument("--X", required=True, metavar="PATH")
    p.add_argument("--y", required=True, metavar="PATH")
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--max-iter", type=int, default=10000)
    p.add_argument("--tol", type=float, default=1e-10)
    p.set_defaults(run=cmd_solve)
    return parser


def main(argv: Optional[Sequence[str]] = None, out: Optional[io.TextIOBase] = None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors, which matches the invalid-input code
        return int(exc.code or 0)
    try:
        return args.run(args, out)
    except CliError as exc:
        print(f"semiprox: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    raise SystemExit(main())
