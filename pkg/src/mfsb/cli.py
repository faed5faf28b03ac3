"""Command-line entry point: ``mfsb {tree,pressure,spectrum,verify,rates}``.

Exit codes: 0 success, 1 verification or numerical failure, 2 usage error,
3 resource cap exceeded.
"""
from __future__ import annotations

import argparse
import contextlib
import csv
import json
import os
import sys
from typing import IO, Iterator, Sequence

import numpy as np

from . import __version__
from .cont_frac import CFWord, DomainError
from .core import TWO_LOG_GAMMA, fmt_float

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_CAP = 0, 1, 2, 3


class UsageError(Exception):
    pass


def default_threads() -> int:
    env = os.environ.get("MFSB_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise UsageError(f"MFSB_THREADS must be a positive integer, got {env!r}") from None
        if n < 1:
            raise UsageError(f"MFSB_THREADS must be a positive integer, got {env!r}")
        return n
    return os.cpu_count() or 1


@contextlib.contextmanager
def _output(path: str | None) -> Iterator[IO[str]]:
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _grid(lo: float, hi: float, steps: int, name: str) -> np.ndarray:
    if steps < 1:
        raise UsageError(f"--{name}-steps must be >= 1")
    if steps > 1 and not lo < hi:
        raise UsageError(f"--{name}-min must be below --{name}-max")
    return np.linspace(lo, hi, steps)


# ----------------------------------------------------------------- commands


def cmd_tree(args) -> int:
    from .stern_brocot import _check_depth, iter_level_chunks

    n = args.depth
    _check_depth(n, args.cap)
    with _output(args.out) as fh:
        if args.format == "json":
            rows = list(_tree_rows(n, args.vertices, iter_level_chunks))
            keys = _tree_columns(args.vertices)
            json.dump({"order": n, "rows": [dict(zip(keys, r)) for r in rows]}, fh, indent=1)
            fh.write("\n")
        else:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(_tree_columns(args.vertices))
            writer.writerows(_tree_rows(n, args.vertices, iter_level_chunks))
    return EXIT_OK


def _tree_columns(vertices: bool) -> tuple[str, ...]:
    if vertices:
        return ("order", "position", "num", "den")
    return ("order", "index", "left_num", "left_den", "right_num", "right_den", "length_num", "length_den")


def _tree_rows(n: int, vertices: bool, chunks) -> Iterator[tuple[int, ...]]:
    for first, num, den in chunks(n, cap=n):
        s, t = num.tolist(), den.tolist()
        if vertices:
            # chunks overlap in one endpoint; emit it once
            start = 0 if first == 1 else 1
            for i in range(start, len(t)):
                yield (n, first - 1 + i, s[i], t[i])
        else:
            for i in range(len(t) - 1):
                yield (n, first + i, s[i], t[i], s[i + 1], t[i + 1], 1, t[i] * t[i + 1])


_PRESSURE_DEFAULT_GRID = {
    "direct-level": (-10.0, 0.99, 111),
    "denominators": (-10.0, 0.99, 111),
    "induced-root": (-10.0, 0.99, 111),
    "operator-eig": (0.6, 5.0, 45),
    "word-sum": (0.6, 5.0, 12),
}


def cmd_pressure(args) -> int:
    from .pressure import METHODS, pressure_curve

    method = args.method
    if method not in _PRESSURE_DEFAULT_GRID:
        raise UsageError(f"--method must be one of {tuple(_PRESSURE_DEFAULT_GRID)}; {METHODS[-1]!r} takes caller data")
    lo, hi, steps = _PRESSURE_DEFAULT_GRID[method]
    thetas = _grid(
        lo if args.theta_min is None else args.theta_min,
        hi if args.theta_max is None else args.theta_max,
        steps if args.theta_steps is None else args.theta_steps,
        "theta",
    )
    depth = args.depth if args.depth is not None else (6 if method == "word-sum" else 18)
    kw = {"degree": args.degree, "digit_cap": args.digit_cap, "threads": args.threads}
    if method == "word-sum":
        kw.update(k=depth, rtol=args.tol)
    else:
        kw["level"] = depth
    curve = pressure_curve(method, thetas, **kw)
    ref = pressure_curve(args.reference, thetas, level=depth, degree=args.degree, digit_cap=args.digit_cap) if args.reference else None

    with _output(args.out) as fh:
        if args.format == "json":
            rows = []
            for i, th in enumerate(curve.theta_grid):
                row = {
                    "theta": float(th),
                    "value": float(curve.values[i]),
                    "method": method,
                    "n_or_degree": _n_or_degree(curve.params),
                    "error_bound": float(curve.error_bounds[i]),
                }
                if ref is not None:
                    row["reference"] = float(ref.values[i])
                    row["difference"] = float(curve.values[i] - ref.values[i])
                rows.append(row)
            json.dump({"method": method, "params": curve.params, "rows": rows}, fh, indent=1)
            fh.write("\n")
        elif ref is None:
            curve.to_csv(fh)
        else:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["theta", "value", "method", "n_or_degree", "error_bound", "reference", "difference"])
            for i, th in enumerate(curve.theta_grid):
                writer.writerow(
                    [
                        fmt_float(th),
                        fmt_float(curve.values[i]),
                        method,
                        _n_or_degree(curve.params),
                        fmt_float(curve.error_bounds[i]),
                        fmt_float(ref.values[i]),
                        fmt_float(curve.values[i] - ref.values[i]),
                    ]
                )
    return EXIT_OK


def _n_or_degree(params: dict) -> int:
    return params.get("n", params.get("k", params.get("degree")))


def cmd_spectrum(args) -> int:
    from .spectrum import ALPHA_MAX, FareySpectrum, GaussSpectrum

    if args.kind == "farey-tau":
        lo, hi = 0.0, TWO_LOG_GAMMA
        side = FareySpectrum(degree=args.degree, digit_cap=args.digit_cap, threads=args.threads)
    else:
        lo, hi = TWO_LOG_GAMMA, ALPHA_MAX
        alpha_max = max(ALPHA_MAX, args.alpha_max) if args.alpha_max is not None else ALPHA_MAX
        side = GaussSpectrum(degree=args.degree, digit_cap=args.digit_cap, alpha_max=alpha_max)
    alphas = _grid(
        lo if args.alpha_min is None else args.alpha_min,
        hi if args.alpha_max is None else args.alpha_max,
        args.alpha_steps,
        "alpha",
    )
    curve = side.curve(alphas, polish=not args.no_polish)
    with _output(args.out) as fh:
        if args.format == "json":
            fh.write(curve.to_json() + "\n")
        else:
            curve.to_csv(fh)
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verify import CLAIMS, UnknownClaim, run_claims

    if args.list:
        for cid, claim in CLAIMS.items():
            print(f"{cid}\t{claim.anchor}")
        return EXIT_OK
    try:
        report = run_claims(args.claims or None, budget=args.budget, skip=set(args.skip))
    except UnknownClaim as exc:
        raise UsageError(f"unknown claim id(s): {exc.args[0]}; see 'mfsb verify --list'") from None
    with _output(args.out) as fh:
        if args.format == "json":
            fh.write(report.to_json() + "\n")
        else:
            report.to_csv(fh)
    for r in report.results:
        print(f"{r.status.upper():4s} {r.id} ({r.runtime:.2f}s)", file=sys.stderr)
    return EXIT_OK if report.ok else EXIT_FAIL


def cmd_rates(args) -> int:
    from .growth import MonteCarloResult, monte_carlo_ell6, monte_carlo_levy, rate_report

    if args.montecarlo:
        if args.depth is None:
            raise UsageError("--montecarlo needs --depth")
        run = monte_carlo_ell6 if args.statistic == "ell6" else monte_carlo_levy
        res = run(args.samples, args.depth, args.seed, workers=args.threads)
        with _output(args.out) as fh:
            if args.format == "json":
                fh.write(json.dumps(res.to_dict(), indent=1) + "\n")
            else:
                writer = csv.writer(fh, lineterminator="\n")
                writer.writerow(MonteCarloResult.CSV_COLUMNS)
                writer.writerow(res.csv_row())
        return EXIT_OK

    sources = [s for s in (args.cf, args.rational, args.input) if s is not None]
    if len(sources) != 1:
        raise UsageError("give exactly one of --cf, --rational, a positional input or --montecarlo")
    if args.repeat is not None and args.cf is None:
        raise UsageError("--repeat applies to --cf only")
    if args.cf is not None:
        try:
            digits = tuple(int(d) for d in args.cf.replace(" ", "").strip("[]").split(","))
        except ValueError:
            raise UsageError(f"--cf expects comma-separated positive integers, got {args.cf!r}") from None
        if args.repeat is not None:
            if args.repeat < 1:
                raise UsageError("--repeat must be >= 1")
            point = CFWord(digits * args.repeat, truncated=True)
        else:
            point = CFWord(digits)
    elif args.rational is not None:
        if "/" not in args.rational:
            raise UsageError(f"--rational expects p/q, got {args.rational!r}")
        point = args.rational
    else:
        point = args.input
    report = rate_report(point, args.depth)
    with _output(args.out) as fh:
        fh.write(report.to_json() + "\n")
    return EXIT_OK


# ------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    from .stern_brocot import DEFAULT_DEPTH_CAP
    from .transfer import DEFAULT_DEGREE, DEFAULT_DIGIT_CAP

    parser = argparse.ArgumentParser(prog="mfsb", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--threads", type=int, default=None, help="worker count (default: $MFSB_THREADS or all cores)")
    common.add_argument("--seed", type=int, default=0)

    numeric = argparse.ArgumentParser(add_help=False)
    numeric.add_argument("--degree", type=int, default=DEFAULT_DEGREE, help="collocation degree")
    numeric.add_argument("--digit-cap", type=int, default=DEFAULT_DIGIT_CAP, help="explicit digit branches")

    p = sub.add_parser("tree", parents=[common], help="Stern-Brocot intervals or vertices of one order")
    p.add_argument("--depth", type=int, required=True, help="order n")
    p.add_argument("--vertices", action="store_true", help="emit the 2**n + 1 vertices instead of intervals")
    p.add_argument("--cap", type=int, default=DEFAULT_DEPTH_CAP, help="depth cap")
    p.set_defaults(func=cmd_tree)

    p = sub.add_parser("pressure", parents=[common, numeric], help="pressure curve on a theta grid")
    p.add_argument("--method", default="induced-root")
    p.add_argument("--theta-min", type=float)
    p.add_argument("--theta-max", type=float)
    p.add_argument("--theta-steps", type=int)
    p.add_argument("--depth", type=int, help="level n for direct methods, word length k for word-sum")
    p.add_argument("--tol", type=float, default=1e-5, help="relative pruning tolerance of word-sum")
    p.add_argument("--reference", help="second method; adds reference and difference columns")
    p.set_defaults(func=cmd_pressure)

    p = sub.add_parser("spectrum", parents=[common, numeric], help="tau or tau_D on an alpha grid")
    p.add_argument("kind", choices=("farey-tau", "gauss-tauD"))
    p.add_argument("--alpha-min", type=float)
    p.add_argument("--alpha-max", type=float)
    p.add_argument("--alpha-steps", type=int, default=200)
    p.add_argument("--no-polish", action="store_true", help="skip the root polish of t(alpha)")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("verify", parents=[common], help="run the claim registry")
    p.add_argument("claims", nargs="*", help="claim ids (default: all)")
    p.add_argument("--budget", choices=("quick", "full"), default="full")
    p.add_argument("--skip", action="append", default=[], help="claim id to skip (repeatable)")
    p.add_argument("--list", action="store_true", help="list claim ids and exit")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("rates", parents=[common], help="growth-rate approximants or Monte Carlo")
    p.add_argument("input", nargs="?", help="CF word '[a1,...]', rational 'p/q' or decimal")
    p.add_argument("--cf", help="comma-separated CF digits")
    p.add_argument("--repeat", type=int, help="repeat the --cf block this many times (periodic point)")
    p.add_argument("--rational")
    p.add_argument("--depth", type=int, help="CF depth k")
    p.add_argument("--montecarlo", action="store_true")
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--statistic", choices=("levy", "ell6"), default="levy")
    p.set_defaults(func=cmd_rates, format=None)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    from .pressure import BracketError, NumericalFailure, SingularDomainError
    from .spectrum import ConjugateDomainError, SpectrumDomainError
    from .stern_brocot import DepthCapError

    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.threads is None:
            args.threads = default_threads()
        elif args.threads < 1:
            raise UsageError("--threads must be >= 1")
        if args.command == "rates" and args.format is None:
            args.format = "csv" if args.montecarlo else "json"
        return args.func(args)
    except DepthCapError as exc:
        print(f"mfsb: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (UsageError, DomainError, SingularDomainError, SpectrumDomainError, ConjugateDomainError) as exc:
        print(f"mfsb: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericalFailure, BracketError, ArithmeticError) as exc:
        print(f"mfsb: numerical failure: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except ValueError as exc:
        print(f"mfsb: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
