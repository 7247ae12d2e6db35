"""End-to-end utility checks against the masking CLI.

Protocol: derive a two-valued class from a quality score (low <= 6 <
high), mask the features with cluster-calibrated noise (k=10), train a
seeded random forest on the first 66% of each masked run, score it on
the untouched remainder, and average per-class F over 10 runs.  The
averages must track a forest trained on the original head: within 0.05
at epsilon=1.0 and within 0.15 at epsilon=0.01.

The public wine-quality dataset is used when data/winequality-white.csv
exists (see scripts/fetch_winequality.py); a frozen synthetic table of
the same shape keeps the trend covered offline.  A separate check
recomputes every reported F-measure from the emitted confusion counts.
"""

from __future__ import annotations

import csv
import json
import shutil
import subprocess
import time
from pathlib import Path

import numpy as np
import pytest

from mleval.cli import main
from mleval.scoring import train_and_score, write_report_csv, write_report_json
from mleval.tables import LabeledTable

IDPMASK = shutil.which("idpmask")

WINE_CSV = Path(__file__).resolve().parents[2] / "data" / "winequality-white.csv"

CLASSIFIER_SEED = 1
MASK_K = 10
RUNS = 10
EPSILONS = (1.0, 0.01)
# absolute tolerance on |avg masked F - baseline F| per epsilon
BANDS = {1.0: 0.05, 0.01: 0.15}
TIME_BUDGET_SECONDS = 600.0

needs_idpmask = pytest.mark.skipif(
    IDPMASK is None, reason="masking CLI (idpmask) is not on PATH")


def _idpmask(*args: str) -> None:
    proc = subprocess.run([IDPMASK, *args], capture_output=True, text=True)
    assert proc.returncode == 0, f"idpmask {args[0]} failed: {proc.stderr}"


def _write_synthetic_survey(path: Path) -> None:
    """Frozen stand-in with the wine table's shape: 4898 rows, 11
    correlated numeric features, an integer quality score, and a ~28%
    high class.  Factor structure keeps the class learnable; parameters
    are frozen so the measured F gaps are reproducible."""
    rng = np.random.default_rng(20260814)
    n, m = 4898, 11
    latent = rng.normal(size=(n, 3))
    loadings = rng.uniform(-1.0, 1.0, size=(3, m))
    feats = latent @ loadings + 0.12 * rng.normal(size=(n, m))
    feats = feats * rng.uniform(0.5, 20.0, size=m) \
        + rng.uniform(20.0, 80.0, size=m)
    score = latent[:, 0] - 0.5 * latent[:, 1] + 0.10 * rng.normal(size=n)
    hi = 0.28
    edges = np.quantile(score, [0.05, 0.22, 0.50,
                                1.0 - hi, 1.0 - hi / 3, 1.0 - hi / 14])
    quality = 3 + np.searchsorted(edges, score)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"f{j}" for j in range(m)] + ["quality"])
        for i in range(n):
            writer.writerow([repr(v) for v in feats[i].tolist()]
                            + [int(quality[i])])


def _run_trend_protocol(tmp_path: Path, source_csv: Path):
    """Drive the masking CLI end to end and return
    (baseline F per class, avg masked F per (epsilon, class))."""
    labeled = tmp_path / "labeled.csv"
    _idpmask("derive-class", "--input", str(source_csv),
             "--output", str(labeled),
             "--attribute", "quality", "--threshold", "6")

    # baseline: the same 66/34 split with the original data as "masked"
    base_train = tmp_path / "base_train.csv"
    base_test = tmp_path / "base_test.csv"
    _idpmask("split", "--original", str(labeled), "--masked", str(labeled),
             "--fraction", "0.66", "--train", str(base_train),
             "--test", str(base_test), "--class-column", "class")
    base_report = tmp_path / "baseline.csv"
    assert main(["score", "--train", str(base_train), "--test",
                 str(base_test), "--class-column", "class",
                 "--seed", str(CLASSIFIER_SEED),
                 "--report", str(base_report)]) == 0
    with base_report.open(newline="", encoding="utf-8") as fh:
        baseline = {row["class"]: float(row["f_measure"])
                    for row in csv.DictReader(fh)}

    specs = []
    for epsilon in EPSILONS:
        for run in range(1, RUNS + 1):
            masked = tmp_path / f"masked_{epsilon}_{run}.csv"
            _idpmask("anonymize", "--input", str(labeled),
                     "--output", str(masked),
                     "--method", "idp-cbls", "--epsilon", str(epsilon),
                     "--k", str(MASK_K), "--seed", str(1000 + run),
                     "--class-column", "class")
            train = tmp_path / f"train_{epsilon}_{run}.csv"
            test = tmp_path / f"test_{epsilon}_{run}.csv"
            _idpmask("split", "--original", str(labeled),
                     "--masked", str(masked), "--fraction", "0.66",
                     "--train", str(train), "--test", str(test),
                     "--class-column", "class")
            specs.append({"method": "idp-cbls", "epsilon": epsilon,
                          "k": MASK_K, "alpha": 0.0, "run": run,
                          "train": str(train), "test": str(test)})

    manifest = tmp_path / "manifest.json"
    manifest.write_text(json.dumps({
        "schema_version": 1,
        "class_column": "class",
        "seed": CLASSIFIER_SEED,
        "trees": 100,
        "runs": specs,
    }), encoding="utf-8")
    batch_csv = tmp_path / "batch.csv"
    assert main(["batch", "--manifest", str(manifest),
                 "--output", str(batch_csv)]) == 0
    with batch_csv.open(newline="", encoding="utf-8") as fh:
        averages = {(float(row["epsilon"]), row["class"]):
                    float(row["f_measure"])
                    for row in csv.DictReader(fh) if row["run"] == "avg"}
    return baseline, averages


def _assert_trend(baseline: dict, averages: dict) -> None:
    assert set(baseline) == {"low", "high"}
    assert len(averages) == len(EPSILONS) * 2
    for epsilon in EPSILONS:
        for label in ("low", "high"):
            gap = abs(averages[(epsilon, label)] - baseline[label])
            assert gap <= BANDS[epsilon], (
                f"epsilon={epsilon} class={label}: avg F "
                f"{averages[(epsilon, label)]:.4f} is {gap:.4f} from "
                f"baseline {baseline[label]:.4f} (band {BANDS[epsilon]})"
            )


@needs_idpmask
def test_masked_training_tracks_baseline_on_synthetic_survey(tmp_path):
    source = tmp_path / "survey.csv"
    _write_synthetic_survey(source)
    started = time.monotonic()
    baseline, averages = _run_trend_protocol(tmp_path, source)
    elapsed = time.monotonic() - started
    # the task must be learnable for the comparison to mean anything
    assert baseline["low"] > 0.8 and baseline["high"] > 0.8
    _assert_trend(baseline, averages)
    assert elapsed < TIME_BUDGET_SECONDS


@needs_idpmask
@pytest.mark.skipif(
    not WINE_CSV.exists(),
    reason="data/winequality-white.csv not present; run "
           "scripts/fetch_winequality.py (needs network) to enable")
def test_masked_training_tracks_baseline_on_wine_quality(tmp_path):
    started = time.monotonic()
    baseline, averages = _run_trend_protocol(tmp_path, WINE_CSV)
    elapsed = time.monotonic() - started
    _assert_trend(baseline, averages)
    assert elapsed < TIME_BUDGET_SECONDS


def _learnable_pair(seed: int):
    rng = np.random.default_rng(seed)
    n = 400
    x = rng.normal(size=(n, 4))
    y = np.where(x[:, 0] + 0.5 * x[:, 1] + 0.6 * rng.normal(size=n) > 0,
                 "high", "low")
    table = LabeledTable(
        features=("a", "b", "c", "d"), values=x,
        labels=tuple(y.tolist()), class_column="class",
    )
    half = n // 2
    train = LabeledTable(features=table.features, values=x[:half],
                         labels=table.labels[:half], class_column="class")
    test = LabeledTable(features=table.features, values=x[half:],
                        labels=table.labels[half:], class_column="class")
    return train, test


def test_reported_f_matches_confusion_counts_for_every_run(tmp_path):
    for seed in range(5):
        train, test = _learnable_pair(100 + seed)
        report = train_and_score(train, test, seed=seed)
        json_path = tmp_path / f"report_{seed}.json"
        csv_path = tmp_path / f"report_{seed}.csv"
        write_report_json(report, json_path)
        write_report_csv(report, csv_path)

        payload = json.loads(json_path.read_text(encoding="utf-8"))
        with csv_path.open(newline="", encoding="utf-8") as fh:
            csv_f = {row["class"]: float(row["f_measure"])
                     for row in csv.DictReader(fh)}
        assert len(payload["classes"]) == 2
        for entry in payload["classes"]:
            tp, fp, fn = entry["tp"], entry["fp"], entry["fn"]
            precision = tp / (tp + fp) if tp + fp else 0.0
            recall = tp / (tp + fn) if tp + fn else 0.0
            f = 2 * precision * recall / (precision + recall) \
                if precision + recall else 0.0
            assert entry["precision"] == pytest.approx(precision, abs=1e-12)
            assert entry["recall"] == pytest.approx(recall, abs=1e-12)
            assert entry["f_measure"] == pytest.approx(f, abs=1e-12)
            assert entry["support"] == tp + fn
            # counts must be non-trivial or the identity is vacuous
            assert tp + fp + fn > 0
            assert csv_f[entry["class"]] == entry["f_measure"]
