"""``bench`` command line: sweep, ratio and crossover subcommands.

Exit status: 0 on success, 1 when a timed result fails validation, 2 on
usage errors (bad flags, unreadable or mismatched CSVs, unwritable output).
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

from ..variants import TriangularSpec
from .harness import (
    BenchConfig,
    JoinError,
    ValidationError,
    crossover_scan,
    ratio_report,
    run_sweep,
)


def _int_list(text: str) -> list[int]:
    try:
        values = [int(v) for v in text.split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not values or min(values) < 1:
        raise argparse.ArgumentTypeError("sizes must be positive")
    return values


def _threshold(text: str) -> int | None:
    if text == "n":
        return None
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("threshold must be >= 1")
    return value


def _threshold_list(text: str) -> list[int | None]:
    return [_threshold(t) for t in text.split(",") if t]


def _add_problem_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--op", choices=["trmm", "trsm"], required=True)
    p.add_argument("--side", choices=["left", "right"], default="left")
    p.add_argument("--uplo", choices=["lower", "upper"], default="lower")
    p.add_argument("--trans", choices=["n", "t", "c"], default="n")
    p.add_argument("--diag", choices=["unit", "nonunit"], default="nonunit")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--sizes", type=_int_list, required=True, help="e.g. 256,512,1024")
    p.add_argument("--m", dest="m_mode", default="fixed:256", help="fixed:<width> or square")
    p.add_argument("--backend", choices=["seq", "par"], default="seq")
    p.add_argument("--reps", type=int, default=5)
    p.add_argument("--warmup", type=int, default=2)
    p.add_argument("--elem", choices=["f32", "f64"], default="f32")
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bench", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true", help="log each measurement")
    sub = parser.add_subparsers(dest="command", required=True)

    sweep = sub.add_parser("sweep", parents=[common], help="runtime vs. size sweep")
    _add_problem_args(sweep)
    sweep.add_argument("--threshold", type=_threshold, default=256, help="integer or 'n'")
    sweep.add_argument("--out", type=Path, required=True)

    ratio = sub.add_parser("ratio", parents=[common], help="runtime ratio between two sweep CSVs")
    ratio.add_argument("--baseline", type=Path, required=True)
    ratio.add_argument("--candidate", type=Path, required=True)
    ratio.add_argument("--out", type=Path, required=True)

    cross = sub.add_parser("crossover", parents=[common], help="median time over a size x threshold grid")
    _add_problem_args(cross)
    cross.add_argument("--thresholds", type=_threshold_list, required=True,
                       help="comma-separated integers; 'n' means the problem size")
    cross.add_argument("--out", type=Path, required=True)
    return parser


def _spec(args) -> TriangularSpec:
    return TriangularSpec(args.side, args.uplo, args.trans, args.diag, args.alpha)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "sweep":
            config = BenchConfig(args.op, _spec(args), args.sizes, args.m_mode,
                                 args.threshold, args.backend, args.reps, args.warmup,
                                 args.out, args.elem, args.seed)
            for rec in run_sweep(config):
                print(f"{rec.op} {rec.variant} n={rec.n} m={rec.m} t={rec.threshold} "
                      f"median={rec.median_time_s:.4g}s gflops={rec.gflops:.3g}")
        elif args.command == "ratio":
            for rec in ratio_report(args.baseline, args.candidate, args.out):
                print(f"{rec.op} {rec.variant} n={rec.n} m={rec.m} ratio={rec.ratio_percent:.1f}%")
        else:
            table = crossover_scan(args.op, _spec(args), args.sizes, args.thresholds,
                                   m_mode=args.m_mode, backend=args.backend, reps=args.reps,
                                   warmup=args.warmup, elem=args.elem, seed=args.seed)
            with open(args.out, "w", newline="") as fh:
                writer = csv.writer(fh, lineterminator="\n")
                writer.writerow(["n", "threshold", "median_time_s"])
                for n, t, median in table:
                    writer.writerow([n, t, repr(median)])
                    print(f"n={n} threshold={t} median={median:.4g}s")
    except ValidationError as exc:
        print(f"bench: validation failed: {exc}", file=sys.stderr)
        return 1
    except (JoinError, ValueError, OSError) as exc:
        print(f"bench: {exc}", file=sys.stderr)
        return 2
    return 0
