"""Command-line entry point: ``cowpath {generate,evaluate,audit,verify,cap}``.

Exit codes: 0 success or passing verdict, 1 input/usage error, 2 failing
verdict.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .auditor import audit, corollary_check
from .coverage import EXACT, SAMPLED, cap_bound, cap_fraction_exact, covers, worst_case_ratio
from .geometry import ATOL, DomainError, Polyline
from .lemmas import (
    LEMMA_IDS,
    check_ball_containment,
    check_cap_bound,
    check_confined_paths,
    check_point_visibility,
)
from .pathio import PathFormatError, dumps_csv, dumps_json, load_path
from .strategies import (
    confined_random_path,
    cross_polytope_tour,
    doubling_1d,
    log_spiral_2d,
)

EXIT_OK, EXIT_INPUT, EXIT_FAIL = 0, 1, 2

KIND_ALIASES = {
    "doubling1d": "doubling-1d",
    "doubling-1d": "doubling-1d",
    "log-spiral": "log-spiral-2d",
    "log-spiral-2d": "log-spiral-2d",
    "cross-polytope": "cross-polytope-tour",
    "cross-polytope-tour": "cross-polytope-tour",
    "confined-random": "confined-random",
}

# execution-only flags that never change a result
_NOT_CONFIG = {"func", "workers", "out", "emit_points"}


class UsageError(Exception):
    pass


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=["json", "csv-summary"], default="json")
    p.add_argument("--out", help="write the report/path here instead of stdout")
    p.add_argument("--tolerance", type=float, default=ATOL, help="absolute slack at predicate boundaries")
    p.add_argument("--workers", type=int, default=1, help="threads for sampling (results do not depend on it)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cowpath", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"cowpath {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a strategy or test path")
    g.add_argument("--kind", required=True, choices=sorted(KIND_ALIASES))
    g.add_argument("--dim", type=int)
    g.add_argument("--kmax", type=int, default=10)
    g.add_argument("--growth", type=float, default=0.21)
    g.add_argument("--theta-max", type=float)
    g.add_argument("--points-per-turn", type=int, default=256)
    g.add_argument("--scale", type=float)
    g.add_argument("--radius", type=float, default=2.0)
    g.add_argument("--length", type=float)
    g.add_argument("--steps", type=int, default=12)
    g.add_argument("--emit-points", help="also write the vertices as CSV (d <= 3)")
    _common(g)
    g.set_defaults(func=cmd_generate)

    e = sub.add_parser("evaluate", help="coverage verdict and worst-case ratio")
    e.add_argument("path")
    e.add_argument("--mode", choices=["auto", SAMPLED, EXACT], default="auto")
    e.add_argument("--samples", type=int, default=100_000)
    e.add_argument("--directions", type=int, default=256)
    e.add_argument("--offsets", type=int, default=64)
    e.add_argument("--r-max", type=float)
    e.add_argument("--dim", type=int, help="expected dimension (checked)")
    e.add_argument("--emit-points")
    _common(e)
    e.set_defaults(func=cmd_evaluate)

    a = sub.add_parser("audit", help="projection-cascade lower-bound certificate")
    a.add_argument("path")
    a.add_argument("--tau", type=float, help="override the milestone radius (needed for d < 4)")
    a.add_argument("--samples", type=int, default=20_000)
    a.add_argument("--dim", type=int, help="expected dimension (checked)")
    a.add_argument("--emit-points")
    _common(a)
    a.set_defaults(func=cmd_audit)

    v = sub.add_parser("verify", help="run the lemma verifiers")
    v.add_argument("--all", action="store_true")
    v.add_argument("--suite", action="append", choices=list(LEMMA_IDS), default=[])
    v.add_argument("--samples", type=int, default=100_000)
    v.add_argument("--trials", type=int, default=100_000, help="ball-containment trials per dimension")
    _common(v)
    v.set_defaults(func=cmd_verify)

    c = sub.add_parser("cap", help="exact cap measure against the exponential bound")
    c.add_argument("--dim", type=int, action="append", help="repeatable; default 2..64")
    c.add_argument("--eps", type=float, action="append", help="repeatable; default 0, 0.05, ..., 1")
    _common(c)
    c.set_defaults(func=cmd_cap)
    return parser


# --------------------------------------------------------------------------
# helpers


def _config(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in _NOT_CONFIG}


def _document(args, body: dict, input_digest: str | None = None) -> dict:
    return {
        "tool": "cowpath",
        "version": __version__,
        "config": _config(args),
        "seed": args.seed,
        "input_digest": input_digest,
        **body,
    }


def _write(args, text: str) -> None:
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _emit(args, doc: dict, summary: dict) -> None:
    if args.format == "json":
        _write(args, json.dumps(doc, indent=2, sort_keys=False, allow_nan=True) + "\n")
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(list(summary))
        w.writerow(list(summary.values()))
        _write(args, buf.getvalue())


def _emit_points(args, path: Polyline) -> None:
    if not getattr(args, "emit_points", None):
        return
    if path.dimension > 3:
        raise UsageError("--emit-points is only available for paths with d <= 3")
    Path(args.emit_points).write_text(dumps_csv(path))


def _load(args) -> tuple[Polyline, str]:
    path, dig = load_path(args.path)
    if args.dim is not None and args.dim != path.dimension:
        raise UsageError(f"--dim {args.dim} does not match the file's dimension {path.dimension}")
    return path, dig


# --------------------------------------------------------------------------
# subcommands


def cmd_generate(args) -> int:
    kind = KIND_ALIASES[args.kind]
    if kind == "doubling-1d":
        path = doubling_1d(args.kmax)
    elif kind == "log-spiral-2d":
        path = log_spiral_2d(args.growth, args.theta_max, args.points_per_turn)
    else:
        if args.dim is None:
            raise UsageError(f"--dim is required for --kind {args.kind}")
        if kind == "cross-polytope-tour":
            path = cross_polytope_tour(args.dim, args.scale)
        else:
            if args.length is None:
                raise UsageError("--length is required for --kind confined-random")
            path = confined_random_path(args.dim, args.radius, args.length, args.steps, args.seed)
    summary = f"d={path.dimension} vertices={len(path)} length={path.length:.6f}\n"
    if args.out:
        Path(args.out).write_text(dumps_csv(path) if args.out.lower().endswith(".csv") else dumps_json(path) + "\n")
        sys.stdout.write(summary)
    else:
        sys.stdout.write(dumps_json(path) + "\n")
        sys.stderr.write(summary)
    _emit_points(args, path)
    return EXIT_OK


def cmd_evaluate(args) -> int:
    path, dig = _load(args)
    mode = args.mode
    if mode == "auto":
        mode = EXACT if path.dimension <= 3 else SAMPLED
    cov = covers(path, mode, args.samples, args.seed, workers=args.workers, tol=args.tolerance)
    ratio = worst_case_ratio(
        path, args.directions, args.offsets, args.seed, r_max=args.r_max, workers=args.workers
    )
    body = {"d": path.dimension, "vertices": len(path), "length": path.length}
    doc = _document(args, {**body, "coverage": cov.to_dict(), "ratio": ratio.to_dict()}, dig)
    _emit(
        args,
        doc,
        {
            "d": path.dimension,
            "length": path.length,
            "mode": cov.mode,
            "covers": cov.verdict,
            "fraction_visible": cov.fraction_visible,
            "min_support_margin": cov.min_support_margin,
            "sup_ratio": ratio.sup_ratio,
            "unbounded": ratio.unbounded,
            "seed": args.seed,
        },
    )
    _emit_points(args, path)
    return EXIT_OK if cov.verdict else EXIT_FAIL


def cmd_audit(args) -> int:
    path, dig = _load(args)
    d = path.dimension
    if d < 4 and args.tau is None:
        raise DomainError(
            f"tau(d) = sqrt((d/2) / (16 ln(d/2))) is undefined for d={d} < 4; pass --tau"
        )
    rep = audit(path, args.tau)
    try:
        cor = corollary_check(path, args.samples, args.seed).to_dict()
    except DomainError as exc:
        cor = {"branch": None, "error": str(exc)}
    doc = _document(args, {"audit": rep.to_dict(), "corollary": cor}, dig)
    _emit(
        args,
        doc,
        {
            "d": d,
            "tau": rep.tau,
            "m": rep.m,
            "certified_lower_bound": rep.certified_lower_bound,
            "measured_length": rep.measured_length,
            "monotone_ok": rep.monotone_ok,
            "corollary_branch": cor.get("branch"),
            "seed": args.seed,
        },
    )
    _emit_points(args, path)
    return EXIT_OK


def run_suite(name: str, seed: int, samples: int, trials: int) -> list:
    if name == "cap":
        return [check_cap_bound(range(2, 65), [round(0.05 * k, 2) for k in range(21)])]
    if name == "point-visibility":
        return [check_point_visibility(d, [1, 2, 4, 8], samples, seed) for d in (3, 8, 32)]
    if name == "ball-containment":
        return [check_ball_containment(d, trials, seed) for d in (2, 3, 8, 32)]
    paths = [confined_random_path(64, 2.0, 6.0, 6, seed + i) for i in range(20)]
    return [check_confined_paths(paths, 2.0, min(samples, 20_000), seed)]


def cmd_verify(args) -> int:
    suites = list(LEMMA_IDS) if args.all or not args.suite else list(dict.fromkeys(args.suite))
    verdicts = [v for name in suites for v in run_suite(name, args.seed, args.samples, args.trials)]
    ok = all(v.violations == 0 for v in verdicts)
    doc = _document(args, {"verdicts": [v.to_dict() for v in verdicts], "all_passed": ok})
    if args.format == "json":
        _emit(args, doc, {})
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["lemma_id", "dimension", "trials", "violations", "worst_margin", "seed"])
        for v in verdicts:
            w.writerow([v.lemma_id, v.params.get("d", ""), v.trials, v.violations, v.worst_margin, v.seed])
        _write(args, buf.getvalue())
    return EXIT_OK if ok else EXIT_FAIL


def cmd_cap(args) -> int:
    dims = args.dim or list(range(2, 65))
    eps = args.eps or [round(0.05 * k, 2) for k in range(21)]
    if min(dims) < 2:
        raise UsageError("--dim must be >= 2")
    rows = [
        {"d": d, "epsilon": e, "exact": cap_fraction_exact(d, e), "bound": cap_bound(d, e)}
        for d in dims
        for e in eps
    ]
    if args.format == "json":
        _emit(args, _document(args, {"table": rows}), {})
    else:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=["d", "epsilon", "exact", "bound"], lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
        _write(args, buf.getvalue())
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (PathFormatError, DomainError, UsageError, OSError) as exc:
        sys.stderr.write(f"cowpath {args.command}: error: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
