"""Reading labeled CSV tables as produced by the masking CLI.

A table has an optional leading "id" column, numeric feature columns,
and one class column whose values are kept as strings verbatim.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ColumnMismatchError, DataError, ParseError, UsageError

ID_COLUMN = "id"

__all__ = ["LabeledTable", "read_table", "check_compatible"]


@dataclass(frozen=True)
class LabeledTable:
    features: tuple[str, ...]
    values: np.ndarray
    labels: tuple[str, ...]
    class_column: str

    def __post_init__(self) -> None:
        self.values.setflags(write=False)

    @property
    def n(self) -> int:
        return self.values.shape[0]


def read_table(path: str | Path, class_column: str) -> LabeledTable:
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        if len(set(header)) != len(header):
            raise DataError(f"{path}: duplicate column names")
        if class_column not in header:
            raise ColumnMismatchError(
                f"{path}: no column named {class_column!r}"
            )
        features = tuple(name for name in header
                         if name not in (ID_COLUMN, class_column))
        if not features:
            raise UsageError(f"{path}: no feature columns besides "
                             f"{class_column!r}")
        indices = [header.index(name) for name in features]
        class_index = header.index(class_column)

        rows: list[list[float]] = []
        labels: list[str] = []
        for i, row in enumerate(reader):
            if len(row) != len(header):
                raise ParseError(
                    f"{path}: row {i} has {len(row)} cells, header has "
                    f"{len(header)}"
                )
            parsed = []
            for name, col in zip(features, indices):
                try:
                    value = float(row[col])
                except ValueError:
                    raise ParseError(
                        f"{path}: row {i}, column {name!r}: "
                        f"{row[col]!r} is not a number"
                    ) from None
                if not math.isfinite(value):
                    raise ParseError(
                        f"{path}: row {i}, column {name!r}: non-finite value"
                    )
                parsed.append(value)
            rows.append(parsed)
            labels.append(row[class_index])
    if not rows:
        raise DataError(f"{path}: no data rows")
    return LabeledTable(
        features=features,
        values=np.asarray(rows, dtype=np.float64),
        labels=tuple(labels),
        class_column=class_column,
    )


def check_compatible(train: LabeledTable, test: LabeledTable) -> None:
    if train.features != test.features:
        raise ColumnMismatchError(
            f"feature columns differ: train {list(train.features)} vs "
            f"test {list(test.features)}"
        )
    if train.class_column != test.class_column:
        raise ColumnMismatchError(
            f"class columns differ: {train.class_column!r} vs "
            f"{test.class_column!r}"
        )
