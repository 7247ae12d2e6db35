"""Batch evaluation of masked runs listed in a JSON manifest.

The manifest points at train/test CSV pairs the masking CLI's ``split``
command produced, tagged with the masking parameters.  Output is one
plot-ready CSV row per (run, class) plus per-cell average rows whose
``run`` field is the literal string "avg".  The classifier seed is the
manifest-level seed for every run: run-to-run variation measures the
masking noise, not forest randomness.  ``alpha`` is bookkeeping only
(use 0.0 for methods that take no domain factor).
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass
from pathlib import Path

from .errors import ManifestError
from .scoring import DEFAULT_TREES, train_and_score
from .tables import read_table

MANIFEST_SCHEMA_VERSION = 1

BATCH_COLUMNS = ("method", "epsilon", "k", "alpha", "run", "class",
                 "f_measure")

_TOP_KEYS = {
    "schema_version": int,
    "class_column": str,
    "seed": int,
    "trees": int,
    "runs": list,
}
_TOP_REQUIRED = ("schema_version", "class_column", "seed", "runs")
_RUN_KEYS = ("method", "epsilon", "k", "alpha", "run", "train", "test")

__all__ = [
    "RunSpec",
    "Manifest",
    "BatchRow",
    "load_manifest",
    "batch_eval",
    "write_batch_csv",
]


@dataclass(frozen=True)
class RunSpec:
    method: str
    epsilon: float
    k: int
    alpha: float
    run: int
    train: str
    test: str


@dataclass(frozen=True)
class Manifest:
    class_column: str
    seed: int
    trees: int
    runs: tuple[RunSpec, ...]


@dataclass(frozen=True)
class BatchRow:
    method: str
    epsilon: float
    k: int
    alpha: float
    run: int | str  # run number, or "avg" for a per-cell average row
    label: str
    f_measure: float


def load_manifest(path: str | Path) -> Manifest:
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ManifestError(f"manifest not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ManifestError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ManifestError(f"{path}: manifest must be a JSON object")
    unknown = sorted(set(raw) - set(_TOP_KEYS))
    if unknown:
        raise ManifestError(f"{path}: unknown key(s) {unknown}")
    missing = [key for key in _TOP_REQUIRED if key not in raw]
    if missing:
        raise ManifestError(f"{path}: missing key(s) {missing}")
    for key, kind in _TOP_KEYS.items():
        if key in raw and not isinstance(raw[key], kind):
            raise ManifestError(f"{path}: {key!r} must be {kind.__name__}")
    if raw["schema_version"] != MANIFEST_SCHEMA_VERSION:
        raise ManifestError(
            f"{path}: schema_version {raw['schema_version']} unsupported "
            f"(expected {MANIFEST_SCHEMA_VERSION})"
        )
    if not raw["runs"]:
        raise ManifestError(f"{path}: empty manifest, no runs to evaluate")
    runs = []
    for i, entry in enumerate(raw["runs"]):
        if not isinstance(entry, dict):
            raise ManifestError(f"{path}: run {i} must be an object")
        missing = [key for key in _RUN_KEYS if key not in entry]
        if missing:
            raise ManifestError(f"{path}: run {i} missing {missing}")
        extra = sorted(set(entry) - set(_RUN_KEYS))
        if extra:
            raise ManifestError(f"{path}: run {i} has unknown key(s) {extra}")
        runs.append(RunSpec(
            method=str(entry["method"]),
            epsilon=float(entry["epsilon"]),
            k=int(entry["k"]),
            alpha=float(entry["alpha"]),
            run=int(entry["run"]),
            train=str(entry["train"]),
            test=str(entry["test"]),
        ))
    return Manifest(
        class_column=raw["class_column"],
        seed=raw["seed"],
        trees=raw.get("trees", DEFAULT_TREES),
        runs=tuple(runs),
    )


def batch_eval(manifest: Manifest) -> list[BatchRow]:
    """Score every run; rows for missing files are skipped with a warning.

    Per-cell average rows (over the runs that scored) follow the
    per-run rows, in first-seen cell order.
    """
    rows: list[BatchRow] = []
    order: list[tuple] = []
    grouped: dict[tuple, list[BatchRow]] = {}
    for spec in manifest.runs:
        missing = [p for p in (spec.train, spec.test)
                   if not Path(p).exists()]
        if missing:
            warnings.warn(
                f"skipping {spec.method} eps={spec.epsilon} run={spec.run}: "
                f"missing file(s) {missing}",
                stacklevel=2,
            )
            continue
        train = read_table(spec.train, manifest.class_column)
        test = read_table(spec.test, manifest.class_column)
        report = train_and_score(train, test, manifest.seed, manifest.trees)
        for score in report.classes:
            row = BatchRow(
                method=spec.method, epsilon=spec.epsilon, k=spec.k,
                alpha=spec.alpha, run=spec.run, label=score.label,
                f_measure=score.f_measure,
            )
            rows.append(row)
            key = (spec.method, spec.epsilon, spec.k, spec.alpha, score.label)
            if key not in grouped:
                grouped[key] = []
                order.append(key)
            grouped[key].append(row)
    for key in order:
        cell = grouped[key]
        rows.append(BatchRow(
            method=key[0], epsilon=key[1], k=key[2], alpha=key[3],
            run="avg", label=key[4],
            f_measure=math.fsum(r.f_measure for r in cell) / len(cell),
        ))
    return rows


def write_batch_csv(rows: list[BatchRow], path: str | Path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(BATCH_COLUMNS)
        for row in rows:
            writer.writerow([
                row.method, repr(row.epsilon), row.k, repr(row.alpha),
                row.run, row.label, repr(row.f_measure),
            ])
