"""Command-line front end: ``zeno-rank {table, verify, scan, eta}``.

Exit codes: 0 success, 2 input error, 3 size-limit or conditioning error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

from .criterion import Tolerances, oracle_compare, predict_rank
from .errors import ConditioningError, InputError, SizeLimitError, ZenoRankError
from .xxz import ChainSpec, orientation, overlap_eta, overlap_eta_pochhammer

logger = logging.getLogger("zeno_rank")

TABLE_COLUMNS = [
    "N", "phi_over_pi", "orientation", "predicted_rank", "full_rank",
    "deg_lambda0", "condA", "condB", "condC", "warnings",
]
SCAN_COLUMNS = TABLE_COLUMNS[:2] + ["theta"] + TABLE_COLUMNS[2:]
ETA_COLUMNS = ["N", "phi_over_pi", "orientation", "eta_re", "eta_im", "abs_eta",
               "closed_form_re", "closed_form_im", "abs_difference"]
N_TABLE_MAX = 13


def format_phi(x):
    """``φ/π`` as a reduced fraction when it is one with a small denominator."""
    frac = Fraction(x).limit_denominator(1000)
    if abs(float(frac) - x) <= 1e-12:
        return str(frac)
    return f"{x:.12g}"


def parse_phi(value):
    try:
        return float(Fraction(str(value)))
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"cannot parse phi_over_pi value {value!r}") from exc


def criterion_row(N, phi_over_pi, theta, tol, with_theta=False):
    """One CSV row of criterion verdicts for the helix-matched point (N, φ, θ)."""
    spec = ChainSpec.helix(N, math.pi * phi_over_pi, theta)
    report = predict_rank(spec, tol)
    row = {
        "N": N,
        "phi_over_pi": format_phi(phi_over_pi),
        "orientation": orientation(spec),
        "predicted_rank": report.rank_label(),
        "full_rank": report.full_rank,
        "deg_lambda0": report.lambda0_degeneracy,
        "condA": report.cond_A.status,
        "condB": report.cond_B.status,
        "condC": report.cond_C.status,
        "warnings": "; ".join(report.warnings),
    }
    if with_theta:
        row["theta"] = f"{theta:.12g}"
    return row


def _row_job(args):
    return criterion_row(*args)


def run_jobs(jobs, workers):
    """Evaluate jobs, in parallel if asked; output order follows input order."""
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(workers) as pool:
            return list(pool.map(_row_job, jobs))
    return [_row_job(j) for j in jobs]


def table_jobs(n_min, n_max, theta, tol):
    if not 3 <= n_min <= n_max <= N_TABLE_MAX:
        raise InputError(f"need 3 <= n-min <= n-max <= {N_TABLE_MAX}")
    return [(N, m / (N - 1), theta, tol) for N in range(n_min, n_max + 1) for m in range(1, N - 1)]


def write_csv(rows, columns, out):
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    _emit(buf.getvalue(), out)


def _emit(text, out):
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def cmd_table(args, tol):
    rows = run_jobs(table_jobs(args.n_min, args.n_max, args.theta, tol), args.workers)
    write_csv(rows, TABLE_COLUMNS, args.out)


def _load_json(path, what):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {what} {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{what} {path} is not valid JSON: line {exc.lineno} col {exc.colno}: {exc.msg}") from exc


def parse_gammas(text):
    try:
        gammas = [float(g) for g in text.split(",") if g.strip()]
    except ValueError as exc:
        raise InputError(f"bad gamma list {text!r}") from exc
    if not gammas or any(not g > 0 for g in gammas):
        raise InputError("gamma list must be non-empty and positive")
    return gammas


def cmd_verify(args, tol):
    spec = ChainSpec.from_json(_load_json(args.spec, "spec"))
    gammas = parse_gammas(args.gammas)
    report = predict_rank(spec, tol, assemble=True)
    comparison = oracle_compare(spec, report, gammas, workers=args.workers)
    out = report.to_json()
    out["oracle"] = comparison.to_json()
    _emit(json.dumps(out, indent=2) + "\n", args.out)


def scan_points(grid):
    """Grid JSON: axes ``N``, ``phi_over_pi``, ``theta`` (Cartesian) and/or explicit ``points``."""
    if not isinstance(grid, dict):
        raise InputError("grid must be a JSON object")
    points = []
    if any(k in grid for k in ("N", "phi_over_pi", "theta")):
        try:
            ns = [int(n) for n in grid["N"]]
            phis = [parse_phi(p) for p in grid["phi_over_pi"]]
        except KeyError as exc:
            raise InputError(f"grid axis {exc} missing") from exc
        thetas = [float(t) for t in grid.get("theta", [math.pi / 2])]
        points += [(n, p, t) for n in ns for p in phis for t in thetas]
    for p in grid.get("points", []):
        try:
            points.append((int(p["N"]), parse_phi(p["phi_over_pi"]), float(p.get("theta", math.pi / 2))))
        except (KeyError, TypeError) as exc:
            raise InputError(f"bad grid point {p!r}") from exc
    if not points:
        raise InputError("grid is empty")
    return points


def cmd_scan(args, tol):
    points = scan_points(_load_json(args.grid, "grid"))
    jobs = [(n, p, t, tol, True) for n, p, t in points]
    write_csv(run_jobs(jobs, args.workers), SCAN_COLUMNS, args.out)


def eta_rows(n_min, n_max, theta):
    rows = []
    for N in range(n_min, n_max + 1):
        for m in range(1, N - 1):
            phi = math.pi * m / (N - 1)
            eta = overlap_eta(theta, phi, N)
            try:
                closed = overlap_eta_pochhammer(theta, phi, N)
            except (ZeroDivisionError, OverflowError):
                closed = complex("nan")
            rows.append({
                "N": N,
                "phi_over_pi": format_phi(m / (N - 1)),
                "orientation": "parallel" if m % 2 == 0 else "antiparallel",
                "eta_re": repr(eta.real),
                "eta_im": repr(eta.imag),
                "abs_eta": repr(abs(eta)),
                "closed_form_re": repr(closed.real),
                "closed_form_im": repr(closed.imag),
                "abs_difference": repr(abs(eta - closed)),
            })
    return rows


def cmd_eta(args, tol):
    if not 3 <= args.n_min <= args.n_max:
        raise InputError("need 3 <= n-min <= n-max")
    write_csv(eta_rows(args.n_min, args.n_max, args.theta), ETA_COLUMNS, args.out)


def build_parser():
    p = argparse.ArgumentParser(prog="zeno-rank", description=__doc__.splitlines()[0])
    p.add_argument("--tol", default=None, help="tolerance overrides, e.g. eps=1e-10,c=1e-8 (also $ZENO_RANK_TOL)")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("table", help="ranks for parallel/antiparallel helix boundaries")
    t.add_argument("--n-min", type=int, default=3)
    t.add_argument("--n-max", type=int, default=12)
    t.add_argument("--theta", type=float, default=math.pi / 2)
    t.add_argument("--workers", type=int, default=1)
    t.add_argument("--out", default="-")
    t.set_defaults(func=cmd_table)

    v = sub.add_parser("verify", help="criterion plus brute-force steady-state comparison")
    v.add_argument("--spec", required=True, help="ChainSpec JSON file")
    v.add_argument("--gammas", default="50,100,200")
    v.add_argument("--workers", type=int, default=1)
    v.add_argument("--out", default="-")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("scan", help="criterion rows over an (N, phi, theta) grid")
    s.add_argument("--grid", required=True, help="grid JSON file")
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--out", default="-")
    s.set_defaults(func=cmd_scan)

    e = sub.add_parser("eta", help="helix overlap by product and closed form")
    e.add_argument("--n-min", type=int, default=3)
    e.add_argument("--n-max", type=int, default=12)
    e.add_argument("--theta", type=float, default=math.pi / 2)
    e.add_argument("--out", default="-")
    e.set_defaults(func=cmd_eta)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        tol = Tolerances.from_env()
        if args.tol:
            tol = Tolerances.from_string(args.tol, tol)
        if getattr(args, "workers", 1) < 1:
            raise InputError("--workers must be >= 1")
        args.func(args, tol)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (SizeLimitError, ConditioningError, ZenoRankError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
