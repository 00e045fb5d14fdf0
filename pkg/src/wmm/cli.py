"""Command-line entry point ``wmm``.

Exit codes: 0 when every check passes, 1 when a mathematical check fails,
2 for usage or input errors.  Reports go to standard output, diagnostics to
standard error.  Floats are written as shortest round-trip decimals.
"""

import argparse
import csv
import json
import statistics
import sys
import time

import numpy as np

from . import bounds, hadamard, oracle, sinkhorn, verify
from .config import dense_limit
from .core import new_1d, new_2d
from .errors import ConvergenceError, DenseLimitError, SinkhornUnderflowError, WmmError

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
NOT_APPLICABLE_N1 = "not applicable (n=1)"


class UsageError(Exception):
    pass


def _positive_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def _unit_interval(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a real number, got {text!r}") from None
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError(f"lambda must lie in (0, 1), got {text}")
    return value


def _int_list(text):
    try:
        return verify.parse_int_range(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _real_list(text):
    try:
        return verify.parse_real_range(text)
    except (ValueError, ArithmeticError):
        raise argparse.ArgumentTypeError(f"bad list or range {text!r}") from None


def _cell(x):
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    return repr(x) if isinstance(x, float) else str(x)


def _write_csv(out, header, rows):
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(x) for x in row])


def _write_json(out, obj):
    out.write(json.dumps(obj, indent=2, allow_nan=False))
    out.write("\n")


def cmd_bounds(args, out):
    if (args.m is None) != (args.lambda2 is None):
        raise UsageError("--m and --lambda2 must be given together")
    if args.m is None:
        report = bounds.bounds_1d(new_1d(args.n, args.lam), with_exact=args.exact)
    else:
        report = bounds.bounds_2d(new_2d(args.n, args.lam, args.m, args.lambda2), with_exact=args.exact)
    if args.format == "json":
        _write_json(out, report.to_dict())
    else:
        _write_csv(out, bounds.CSV_FIELDS, report.csv_rows())
    for e in report.failures():
        print(f"violated: {e.name} exact={e.exact!r} lower={e.lower!r} upper={e.upper!r}", file=sys.stderr)
    return EXIT_OK if report.all_pass else EXIT_FAIL


def cmd_verify(args, out):
    lams = set(args.lam)
    if args.add_lambda:
        lams.update(args.add_lambda)
    suites = tuple(args.suites.split(",")) if args.suites else verify.SUITES
    try:
        config = verify.VerifyConfig(
            ns=args.n,
            lams=tuple(lams),
            suites=suites,
            tol=args.tol,
            jobs=args.jobs,
            dense_limit=args.dense_limit,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    results = verify.run_verify(config)
    if args.format == "json":
        _write_json(out, {"suites": [r.to_dict() for r in results],
                          "all_pass": all(r.ok for r in results)})
    else:
        _write_csv(out, ("suite", "checks", "passed", "failed", "skipped_points", "worst_slack", "worst_at"),
                   ([r.name, r.checks, r.passed, r.checks - r.passed, r.skipped, r.worst_slack, r.worst_at]
                    for r in results))
    for r in results:
        for c in r.failures:
            print(f"FAIL {r.name} {c.label()}: {c.detail}", file=sys.stderr)
    return EXIT_OK if all(r.ok for r in results) else EXIT_FAIL


def cmd_table1(args, out):
    rows = hadamard.table1(args.lam, args.ns)
    if args.format == "json":
        _write_json(out, [{"n": r.n, "y1": r.y1, "y2": r.y2, "diff": r.diff} for r in rows])
    else:
        _write_csv(out, ("n", "y1", "y2", "diff"), ([r.n, r.y1, r.y2, r.diff] for r in rows))
    return EXIT_OK


def cmd_spectrum(args, out):
    q = new_1d(args.n, args.lam)
    disc = bounds.gershgorin_region(q)
    full = q.n >= 2
    report = {
        "n": q.n,
        "lambda": q.lam,
        "gershgorin": disc.to_dict(),
        "eigenvalues_in_0_2_guaranteed": disc.in_open_0_2,
        "numerical_range": bounds.numerical_range_interval(q).to_dict() if full else NOT_APPLICABLE_N1,
        "spectral_radius_lower": bounds.spectral_radius_lower(q.lam) if full else NOT_APPLICABLE_N1,
    }
    ok = True
    if args.dense:
        try:
            Q = q.todense()
        except DenseLimitError as exc:
            raise UsageError(str(exc)) from None
        eig = oracle.dense_eigs_symmetric(Q).values
        tol = 1e-10 * max(1.0, disc.radii[0] + 1.0)
        verdicts = {"gershgorin": all(disc.contains(z, tol) for z in eig)}
        if full:
            iv = bounds.numerical_range_interval(q)
            verdicts["numerical_range"] = all(iv.contains(z, tol) for z in eig)
            verdicts["spectral_radius"] = bool(eig[-1] >= bounds.spectral_radius_lower(q.lam) - tol)
        else:
            verdicts["numerical_range"] = NOT_APPLICABLE_N1
            verdicts["spectral_radius"] = NOT_APPLICABLE_N1
        if disc.in_open_0_2:
            verdicts["eigenvalues_in_0_2"] = bool(eig[0] > 0 and eig[-1] < 2)
        report["eigenvalues"] = [float(z) for z in eig]
        report["containment"] = verdicts
        ok = all(v is True for v in verdicts.values() if isinstance(v, bool))
    _write_json(out, report)
    return EXIT_OK if ok else EXIT_FAIL


def _grid2d(text):
    try:
        n, m = (int(p) for p in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected N,M, got {text!r}") from None
    if n < 1 or m < 1:
        raise argparse.ArgumentTypeError(f"grid sizes must be positive, got {text!r}")
    return (n, m)


def _spacing(text):
    try:
        values = tuple(float(p) for p in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected H or H1,H2, got {text!r}") from None
    if len(values) not in (1, 2):
        raise argparse.ArgumentTypeError(f"expected H or H1,H2, got {text!r}")
    return values[0] if len(values) == 1 else values


def cmd_sinkhorn(args, out):
    shape = args.grid2d
    u = sinkhorn.load_distribution(args.source, shape)
    v = sinkhorn.load_distribution(args.target, shape)
    if u.shape != v.shape:
        raise UsageError(f"source shape {u.shape} and target shape {v.shape} differ")
    p = sinkhorn.SinkhornProblem(u, v, args.h, args.epsilon)
    result = sinkhorn.sinkhorn(p, tol=args.tol, max_iter=args.max_iter)
    _write_json(out, result.to_dict())
    if not result.converged:
        print(f"did not converge in {result.iterations} iterations "
              f"(marginal error {result.marginal_error!r})", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_bench(args, out):
    rng = np.random.default_rng(0)
    rows = []
    for n in args.sizes:
        q = new_1d(n, args.lam)
        x = rng.standard_normal(n)
        op = q.matvec if args.op == "matvec" else q.solve
        op(x)  # compile and warm caches
        times = []
        for _ in range(args.reps):
            t0 = time.perf_counter()
            op(x)
            times.append(time.perf_counter() - t0)
        rows.append([n, statistics.median(times)])
    _write_csv(out, ("n", "seconds"), rows)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="wmm",
        description="Structured Wasserstein-1 metric matrices: bounds, checks and transport.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bounds", help="closed-form bounds, optionally against exact values")
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--lambda", dest="lam", type=_unit_interval, required=True)
    p.add_argument("--m", type=_positive_int)
    p.add_argument("--lambda2", type=_unit_interval)
    p.add_argument("--exact", action="store_true", help="compute exact values and pass flags")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("verify", help="run the verification suites over a grid")
    p.add_argument("--n", type=_int_list, default=tuple(range(1, 65)), help="orders, e.g. 1:64 or 2,5,9")
    p.add_argument("--lambda", dest="lam", type=_real_list, default=verify.VerifyConfig.lams,
                   help="lambda values, e.g. 0.05:0.95:0.05 or 0.1,0.5")
    p.add_argument("--add-lambda", type=_unit_interval, action="append", help="extra lambda value")
    p.add_argument("--suites", help=f"comma-separated subset of {','.join(verify.SUITES)}")
    p.add_argument("--tol", type=float, default=verify.VerifyConfig.tol, help="relative bound slack")
    p.add_argument("--jobs", type=_positive_int, default=1)
    p.add_argument("--dense-limit", type=_positive_int)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("table1", help="Hadamard-inverse bound against the inverse bound")
    p.add_argument("--lambda", dest="lam", type=_unit_interval, default=0.5)
    p.add_argument("--ns", type=_int_list, default=(1, 2, 3, 4, 5, 10))
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_table1)

    p = sub.add_parser("spectrum", help="eigenvalue inclusion regions")
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--lambda", dest="lam", type=_unit_interval, required=True)
    p.add_argument("--dense", action="store_true", help="add oracle eigenvalues and containment verdicts")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("sinkhorn", help="entropy-regularized transport between two distributions")
    p.add_argument("--source", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--h", type=_spacing, required=True, help="grid spacing H, or H1,H2 on a 2D grid")
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--tol", type=float, default=sinkhorn.TOL.sinkhorn_tol)
    p.add_argument("--max-iter", type=_positive_int, default=sinkhorn.TOL.sinkhorn_max_iter)
    p.add_argument("--grid2d", type=_grid2d, help="N,M: N columns and M rows per file")
    p.set_defaults(func=cmd_sinkhorn)

    p = sub.add_parser("bench", help="median wall time of structured operations")
    p.add_argument("--op", choices=("matvec", "solve"), required=True)
    p.add_argument("--sizes", type=_int_list, required=True)
    p.add_argument("--reps", type=_positive_int, default=5)
    p.add_argument("--lambda", dest="lam", type=_unit_interval, default=0.5)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None, out=None):
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code
    try:
        dense_limit()
        return args.func(args, out)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"wmm {args.command}: error: {exc}", file=sys.stderr)
    except (SinkhornUnderflowError, ConvergenceError) as exc:
        print(f"wmm {args.command}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (WmmError, ValueError) as exc:
        print(f"wmm {args.command}: error: {exc}", file=sys.stderr)
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
