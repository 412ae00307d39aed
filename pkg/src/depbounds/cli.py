"""
Command-line entry point.

Subcommands
-----------
report      bounds for S_beta under given marginals
estimate    S_beta or the energy distance between two laws
score       energy score of a forecast at an observation
optimize    swap search over permutation copulas
reproduce   recompute every reference value, one pass/fail row each
figure      point sets for the counterexample, parallel and spherical plots

Exit codes: 0 ok, 1 a check failed, 2 bad input, 3 method not capable.
Stochastic subcommands take ``--seed`` (default 0, never the clock), so
identical invocations write identical bytes.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from .bounds import bounds_report, lower_bound_score, sharp_upper_scc
from .copulas import (
    JointDist,
    comonotone,
    countermonotone,
    parallel,
    parse_copula,
    sample_copula,
    spherical,
    write_discrete_copula,
)
from .functionals import (
    CapabilityError,
    FunctionalParams,
    energy_distance,
    energy_score,
    s_beta,
    supported_methods,
)
from .marginals import DegenerateInputError, parse_marginal, uniform
from .optimizer import OBJECTIVES, SearchProblem, local_search
from .reproduce import run_checks

FIGURES = ("counterex-left", "counterex-right", "parallel-support", "spherical-scatter")

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_CAPABILITY = 0, 1, 2, 3


class UsageError(ValueError):
    pass


# -- output -------------------------------------------------------------------


def _fmt(v):
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return "" if v is None else str(v)


def records_to_csv(records: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    keys = list(dict.fromkeys(k for r in records for k in r))
    writer.writerow(keys)
    for r in records:
        writer.writerow([_fmt(r.get(k)) for k in keys])
    return buf.getvalue()


def _jsonable(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    return v


def records_to_json(records: list[dict]) -> str:
    clean = [{k: _jsonable(v) for k, v in r.items()} for r in records]
    return json.dumps(clean, indent=2) + "\n"


def render(records: list[dict], fmt: str) -> str:
    return records_to_csv(records) if fmt == "csv" else records_to_json(records)


def atomic_write(path, text: str) -> None:
    """Write through a sibling temporary file so readers never see a partial file."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def _emit(text: str, out) -> None:
    if out:
        atomic_write(out, text)
    else:
        sys.stdout.write(text)


def _check_out(path) -> None:
    if path and not Path(path).resolve().parent.is_dir():
        raise UsageError(f"output directory for {path} does not exist")


# -- argument helpers ---------------------------------------------------------


def _workers(args) -> int:
    raw = args.threads if args.threads is not None else os.environ.get("DEPBOUNDS_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"thread count must be an integer, got {raw!r}") from None
    if n < 1:
        raise UsageError("thread count must be at least 1")
    return n


def _vector(text: str | None, d: int, what: str):
    if text is None:
        return None
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"{what} must be comma-separated numbers, got {text!r}") from None
    if len(vals) == 1:
        vals = vals * d
    if len(vals) != d:
        raise UsageError(f"{what} has {len(vals)} entries, expected {d}")
    return np.array(vals)


def _marginals(specs: list[str] | None, d: int, default=None):
    if not specs:
        return default if default is not None else [uniform(0.0, 1.0)] * d
    ms = [parse_marginal(s) for s in specs]
    if len(ms) == 1:
        ms = ms * d
    if len(ms) != d:
        raise UsageError(f"{len(ms)} marginals given for dimension {d}")
    return ms


def _params(args, workers: int) -> FunctionalParams:
    return FunctionalParams(args.beta, args.method, args.samples, args.order, args.seed, workers)


def _capability_message(exc, f, g=None) -> str:
    ok = supported_methods(f, g)
    return f"{exc}; supported methods for these inputs: {', '.join(ok)}"


# -- subcommands --------------------------------------------------------------


def cmd_report(args) -> int:
    workers = _workers(args)
    f = _marginals(args.f_marginal, args.d)
    g = _marginals(args.g_marginal, args.d) if args.g_marginal else None
    estimate = None
    if args.copula:
        c = parse_copula(args.copula, args.d)
        if g is not None:
            raise UsageError("--copula estimates S(C, C) and needs a single marginal set")
        dist = JointDist(c, f)
        estimate = s_beta(dist, dist, _params(args, workers))
    report = bounds_report(f, g, d=args.d, beta=args.beta, estimate=estimate)
    _emit(report.to_csv() if args.format == "csv" else report.to_json(), args.out)
    return EXIT_OK if report.ok else EXIT_CHECK


def cmd_estimate(args) -> int:
    workers = _workers(args)
    f_m = _marginals(args.f_marginal, args.d)
    g_m = _marginals(args.g_marginal, args.d, default=f_m)
    f = JointDist(parse_copula(args.f, args.d), f_m)
    g = JointDist(parse_copula(args.g, args.d), g_m)
    params = _params(args, workers)
    try:
        if args.quantity == "s":
            est = s_beta(f, g, params)
        else:
            est = energy_distance(f, g, params)
    except CapabilityError as exc:
        raise CapabilityError(_capability_message(exc, f, g)) from None
    record = {"quantity": args.quantity, "f": args.f, "g": args.g, **est.to_record()}
    _emit(render([record], args.format), args.out)
    return EXIT_OK


def cmd_score(args) -> int:
    workers = _workers(args)
    f = JointDist(parse_copula(args.f, args.d), _marginals(args.f_marginal, args.d))
    y = _vector(args.y, args.d, "--y")
    try:
        est = energy_score(f, y, _params(args, workers))
    except CapabilityError as exc:
        raise CapabilityError(_capability_message(exc, f)) from None
    record = {"quantity": "energy-score", "f": args.f, "y": args.y, **est.to_record()}
    _emit(render([record], args.format), args.out)
    return EXIT_OK


def cmd_optimize(args) -> int:
    workers = _workers(args)
    y = _vector(args.y, args.d, "--y")
    problem = SearchProblem(
        args.objective, beta=args.beta, d=args.d, n=args.n,
        y=None if y is None else tuple(y), restarts=args.restarts, seed=args.seed,
        max_passes=args.max_passes, workers=workers,
    )
    for path in (args.out, args.copula_out, args.trace):
        _check_out(path)
    result = local_search(problem)
    record = {
        "objective": args.objective,
        "n": args.n,
        "d": args.d,
        "beta": args.beta,
        "value": result.value,
        "best_restart": result.best_restart,
        "evaluations": result.evaluations,
        "permutations": ";".join(" ".join(map(str, p)) for p in result.permutations),
    }
    if problem.uses_y and args.beta == 1 and args.d >= 2:
        record["floor"] = lower_bound_score(args.d, 1.0) - 0.5 * sharp_upper_scc(args.d)[0]

    if args.copula_out:
        _write_via_temp(args.copula_out, lambda p: write_discrete_copula(result.best, p))
    if args.trace:
        _write_via_temp(args.trace, result.write_trace)
    _emit(render([record], args.format), args.out)
    return EXIT_OK


def _write_via_temp(path, writer) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    os.close(fd)
    try:
        writer(tmp)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def cmd_reproduce(args) -> int:
    workers = _workers(args)
    rows = run_checks(samples=args.samples, seed=args.seed, workers=workers)
    _emit(render([r.to_record() for r in rows], args.format), args.out)
    failed = [r.name for r in rows if not r.passed]
    print(f"{len(rows) - len(failed)} of {len(rows)} checks passed", file=sys.stderr)
    for name in failed:
        print(f"failed: {name}", file=sys.stderr)
    return EXIT_CHECK if failed else EXIT_OK


def figure_points(name: str, points: int, seed: int, workers: int = 1) -> list[dict]:
    """Point sets that redraw the named figure."""
    if name not in FIGURES:
        raise UsageError(f"unknown figure {name!r}; choose from {', '.join(FIGURES)}")
    if points < 1:
        raise UsageError("--points must be positive")
    if name.startswith("counterex"):
        c = comonotone() if name == "counterex-left" else countermonotone()
        u1 = sample_copula(c, points, np.random.SeedSequence(seed, spawn_key=(0,)), workers)
        u2 = sample_copula(comonotone(), points, np.random.SeedSequence(seed, spawn_key=(1,)), workers)
        x = np.column_stack([4.0 * u1[:, 0], u1[:, 1]])
        y = np.column_stack([u2[:, 0], 4.0 * u2[:, 1]])
        z = np.abs(x - y)
        return [{"z1": a, "z2": b} for a, b in z]
    if name == "parallel-support":
        half = max(1, points // 2)
        rows = []
        for segment, (lo, shift) in enumerate(((0.0, 0.5), (0.5, -0.5))):
            for u in np.linspace(lo, lo + 0.5, half):
                rows.append({"segment": segment, "u": u, "v": u + shift})
        return rows
    pts = sample_copula(spherical(2), points, seed, workers)
    return [{"u": a, "v": b} for a, b in pts]


def cmd_figure(args) -> int:
    workers = _workers(args)
    rows = figure_points(args.name, args.points, args.seed, workers)
    _emit(render(rows, args.format), args.out)
    return EXIT_OK


# -- parser -------------------------------------------------------------------


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out", help="output file (written atomically); stdout if omitted")
    common.add_argument("--threads", type=int, default=None,
                        help="worker threads (default: $DEPBOUNDS_THREADS or 1)")
    common.add_argument("--seed", type=int, default=0, help="random seed (default 0)")

    estim = argparse.ArgumentParser(add_help=False)
    estim.add_argument("--d", type=_positive_int, default=2)
    estim.add_argument("--beta", type=float, default=1.0)
    estim.add_argument("--method", default="auto",
                       help="auto, exact, quadrature (quad) or monte-carlo (mc)")
    estim.add_argument("--samples", type=_positive_int, default=100_000)
    estim.add_argument("--order", type=_positive_int, default=64)
    estim.add_argument("--f-marginal", action="append",
                       help="uniform:a,b | point:c | empirical:path; repeat per coordinate or give once")

    parser = argparse.ArgumentParser(prog="depbounds", description="Dependence-uncertainty bounds for energy-type distance moments.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("report", parents=[common, estim], help="bounds for S_beta")
    p.add_argument("--g-marginal", action="append")
    p.add_argument("--copula", help="also estimate S(C, C) for this copula and check it")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("estimate", parents=[common, estim], help="S_beta or energy distance")
    p.add_argument("--f", required=True, help="copula of the first law")
    p.add_argument("--g", required=True, help="copula of the second law")
    p.add_argument("--g-marginal", action="append")
    p.add_argument("--quantity", choices=("s", "energy-distance"), default="s")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("score", parents=[common, estim], help="energy score at an observation")
    p.add_argument("--f", required=True, help="copula of the forecast")
    p.add_argument("--y", required=True, help="observation, comma-separated")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("optimize", parents=[common], help="swap search over permutation copulas")
    p.add_argument("--objective", choices=OBJECTIVES, required=True)
    p.add_argument("--n", type=_positive_int, default=8)
    p.add_argument("--d", type=_positive_int, default=2)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--y", help="observation for the energy-score objectives")
    p.add_argument("--restarts", type=_positive_int, default=10)
    p.add_argument("--max-passes", type=_positive_int, default=10_000)
    p.add_argument("--copula-out", help="write the best copula here")
    p.add_argument("--trace", help="write the search trace CSV here")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("reproduce", parents=[common], help="recompute every reference value")
    p.add_argument("--samples", type=_positive_int, default=1_000_000)
    p.set_defaults(func=cmd_reproduce, seed=7)

    p = sub.add_parser("figure", parents=[common], help="point sets for figures")
    p.add_argument("--name", required=True, help=", ".join(FIGURES))
    p.add_argument("--points", type=int, default=2000)
    p.set_defaults(func=cmd_figure)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if getattr(args, "out", None):
            _check_out(args.out)
        return args.func(args)
    except CapabilityError as exc:
        print(f"depbounds: {exc}", file=sys.stderr)
        return EXIT_CAPABILITY
    except NotImplementedError as exc:
        print(f"depbounds: {exc}", file=sys.stderr)
        return EXIT_CAPABILITY
    except (ValueError, DegenerateInputError, OSError) as exc:
        print(f"depbounds: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
