"""Utility benchmark: per-class F-measures of a seeded random forest
trained on masked data and tested on original data."""

from .batch import (
    BatchRow,
    Manifest,
    RunSpec,
    batch_eval,
    load_manifest,
    write_batch_csv,
)
from .errors import (
    ColumnMismatchError,
    DataError,
    ManifestError,
    MlevalError,
    ParseError,
    SingleClassError,
    UsageError,
)
from .scoring import (
    ClassScore,
    RunReport,
    train_and_score,
    write_report_csv,
    write_report_json,
)
from .tables import LabeledTable, check_compatible, read_table

__version__ = "0.1.0"

__all__ = [
    "BatchRow",
    "Manifest",
    "RunSpec",
    "batch_eval",
    "load_manifest",
    "write_batch_csv",
    "ColumnMismatchError",
    "DataError",
    "ManifestError",
    "MlevalError",
    "ParseError",
    "SingleClassError",
    "UsageError",
    "ClassScore",
    "RunReport",
    "train_and_score",
    "write_report_csv",
    "write_report_json",
    "LabeledTable",
    "check_compatible",
    "read_table",
    "__version__",
]
