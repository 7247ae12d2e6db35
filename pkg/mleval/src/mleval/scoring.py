"""Random-forest scoring with self-computed confusion counts.

The forest hyperparameters are fixed (100 trees, unlimited depth,
sqrt-feature subsampling, seeded) and echoed into every report, so runs
are comparable across machines.  Precision, recall, and F are computed
here from raw counts, never taken from the library, which keeps the
report self-verifying: F must equal 2PR/(P+R) for the emitted counts.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from sklearn.ensemble import RandomForestClassifier

from .errors import SingleClassError, UsageError
from .tables import LabeledTable, check_compatible

MAX_FEATURES = "sqrt"
DEFAULT_TREES = 100

REPORT_COLUMNS = ("class", "precision", "recall", "f_measure")
REPORT_SCHEMA_VERSION = 1

__all__ = [
    "ClassScore",
    "RunReport",
    "train_and_score",
    "write_report_csv",
    "write_report_json",
]


@dataclass(frozen=True)
class ClassScore:
    label: str
    tp: int
    fp: int
    fn: int
    support: int
    precision: float
    recall: float
    f_measure: float


@dataclass(frozen=True)
class RunReport:
    classes: tuple[ClassScore, ...]
    seed: int
    trees: int
    train_rows: int
    test_rows: int


def _ratio(numerator: int, denominator: int) -> float:
    return numerator / denominator if denominator else 0.0


def _score_class(label: str, truth: np.ndarray, pred: np.ndarray) -> ClassScore:
    tp = int(np.sum((pred == label) & (truth == label)))
    fp = int(np.sum((pred == label) & (truth != label)))
    fn = int(np.sum((pred != label) & (truth == label)))
    precision = _ratio(tp, tp + fp)
    recall = _ratio(tp, tp + fn)
    f = 2 * precision * recall / (precision + recall) \
        if precision + recall else 0.0
    return ClassScore(
        label=label, tp=tp, fp=fp, fn=fn, support=tp + fn,
        precision=precision, recall=recall, f_measure=f,
    )


def train_and_score(
    train: LabeledTable,
    test: LabeledTable,
    seed: int,
    trees: int = DEFAULT_TREES,
) -> RunReport:
    """Fit on the training table, score per class on the test table."""
    check_compatible(train, test)
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        raise UsageError(f"seed must be a non-negative integer, got {seed!r}")
    if trees < 1:
        raise UsageError(f"trees must be >= 1, got {trees}")
    if len(set(train.labels)) < 2:
        raise SingleClassError(
            f"training data has a single class "
            f"{train.labels[0]!r}; a masked run this degenerate cannot be "
            f"scored"
        )
    forest = RandomForestClassifier(
        n_estimators=trees,
        max_features=MAX_FEATURES,
        random_state=seed,
    )
    forest.fit(train.values, train.labels)
    pred = np.asarray(forest.predict(test.values))
    truth = np.asarray(test.labels)
    labels = sorted(set(train.labels) | set(test.labels))
    return RunReport(
        classes=tuple(_score_class(label, truth, pred) for label in labels),
        seed=seed,
        trees=trees,
        train_rows=train.n,
        test_rows=test.n,
    )


def write_report_csv(report: RunReport, path: str | Path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(REPORT_COLUMNS)
        for score in report.classes:
            writer.writerow([score.label, repr(score.precision),
                             repr(score.recall), repr(score.f_measure)])


def write_report_json(report: RunReport, path: str | Path) -> None:
    payload = {
        "tool": "mleval",
        "schema_version": REPORT_SCHEMA_VERSION,
        "seed": report.seed,
        "forest": {
            "trees": report.trees,
            "max_features": MAX_FEATURES,
            "max_depth": None,
        },
        "train_rows": report.train_rows,
        "test_rows": report.test_rows,
        "classes": [
            {
                "class": s.label,
                "tp": s.tp,
                "fp": s.fp,
                "fn": s.fn,
                "support": s.support,
                "precision": s.precision,
                "recall": s.recall,
                "f_measure": s.f_measure,
            }
            for s in report.classes
        ],
    }
    Path(path).write_text(json.dumps(payload, indent=2) + "\n",
                          encoding="utf-8")
