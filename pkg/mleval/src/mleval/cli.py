"""Command line interface: score one train/test pair, or a whole batch.

Exit codes: 0 on success, 2 for bad parameters/configs/column mismatches,
3 for unusable data (parse failures, single-class training sets, missing
inputs).
"""

from __future__ import annotations

import argparse
import sys

from .batch import batch_eval, load_manifest, write_batch_csv
from .errors import MlevalError, UsageError
from .scoring import (
    DEFAULT_TREES,
    train_and_score,
    write_report_csv,
    write_report_json,
)
from .tables import read_table

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3

__all__ = ["main"]


def _cmd_score(args) -> int:
    train = read_table(args.train, args.class_column)
    test = read_table(args.test, args.class_column)
    report = train_and_score(train, test, args.seed, args.trees)
    write_report_csv(report, args.report)
    if args.json is not None:
        write_report_json(report, args.json)
    summary = ", ".join(
        f"{s.label}: F={s.f_measure:.4f}" for s in report.classes
    )
    print(f"wrote {args.report} ({summary})")
    return EXIT_OK


def _cmd_batch(args) -> int:
    manifest = load_manifest(args.manifest)
    rows = batch_eval(manifest)
    write_batch_csv(rows, args.output)
    averages = sum(1 for r in rows if r.run == "avg")
    print(f"wrote {args.output} ({len(rows) - averages} run rows, "
          f"{averages} averages)")
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mleval",
        description="Random-forest utility benchmark for masked tables.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    score = sub.add_parser(
        "score", help="train on one CSV, report per-class P/R/F on another")
    score.add_argument("--train", required=True)
    score.add_argument("--test", required=True)
    score.add_argument("--class-column", required=True)
    score.add_argument("--seed", required=True, type=int)
    score.add_argument("--trees", type=int, default=DEFAULT_TREES)
    score.add_argument("--report", required=True,
                       help="per-class CSV report path")
    score.add_argument("--json", default=None,
                       help="full JSON report with confusion counts")
    score.set_defaults(func=_cmd_score)

    batch = sub.add_parser(
        "batch", help="score every run in a JSON manifest")
    batch.add_argument("--manifest", required=True)
    batch.add_argument("--output", required=True)
    batch.set_defaults(func=_cmd_batch)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except MlevalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
