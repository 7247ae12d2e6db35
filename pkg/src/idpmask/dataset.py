"""Tabular numeric datasets: CSV I/O, domains, column statistics, splits.

CSV contract: RFC-4180 with a header row, UTF-8, "." as the decimal
separator.  A column named "id" passes through every transformation
verbatim and is never part of the numeric matrix.  A label column
(produced by :func:`derive_class`) is likewise carried as strings.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    AlignmentError,
    DomainError,
    InsufficientDataError,
    ParameterError,
    ParseError,
    SchemaError,
)

ID_COLUMN = "id"

STAGES = ("original", "microaggregated", "preprocessed", "masked")


@dataclass(frozen=True)
class Dataset:
    """An immutable n x m numeric matrix plus optional id/label columns.

    ``values`` is stored as a read-only float64 array.  ``stage`` tracks
    where the data sits in the masking pipeline; statistics and domains
    are only defined on ``original`` data.
    """

    attributes: tuple[str, ...]
    values: np.ndarray
    stage: str = "original"
    ids: tuple[str, ...] | None = None
    labels: tuple[str, ...] | None = None
    label_name: str | None = None

    def __post_init__(self) -> None:
        if not self.attributes:
            raise ParameterError("a dataset needs at least one attribute")
        if len(set(self.attributes)) != len(self.attributes):
            raise SchemaError("duplicate attribute names")
        if self.stage not in STAGES:
            raise ParameterError(f"unknown stage {self.stage!r}")
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim != 2:
            raise ParameterError("values must be a 2-D matrix")
        if arr.shape[0] < 1:
            raise ParameterError("a dataset needs at least one row")
        if arr.shape[1] != len(self.attributes):
            raise ParameterError(
                f"matrix has {arr.shape[1]} columns but {len(self.attributes)} "
                "attribute names"
            )
        if not np.all(np.isfinite(arr)):
            raise ParseError("values must all be finite")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)
        for name, col in (("ids", self.ids), ("labels", self.labels)):
            if col is not None and len(col) != arr.shape[0]:
                raise AlignmentError(f"{name} column has {len(col)} entries "
                                     f"for {arr.shape[0]} rows")
        if self.labels is not None and self.label_name is None:
            object.__setattr__(self, "label_name", "class")

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def m(self) -> int:
        return self.values.shape[1]

    def column(self, attribute: str) -> np.ndarray:
        try:
            j = self.attributes.index(attribute)
        except ValueError:
            raise SchemaError(f"no attribute named {attribute!r}") from None
        return self.values[:, j]

    def replace_values(self, values: np.ndarray, stage: str) -> "Dataset":
        """Same rows and passthrough columns, new numeric matrix."""
        return Dataset(
            attributes=self.attributes,
            values=values,
            stage=stage,
            ids=self.ids,
            labels=self.labels,
            label_name=self.label_name,
        )


@dataclass(frozen=True)
class AttributeDomain:
    """Closed interval [lower, upper] an attribute is allowed to span."""

    lower: float
    upper: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.lower) and math.isfinite(self.upper)):
            raise DomainError("domain bounds must be finite")
        if self.lower > self.upper:
            raise DomainError(f"empty domain [{self.lower}, {self.upper}]")

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def contains(self, values: np.ndarray) -> bool:
        return bool(np.all(values >= self.lower) and np.all(values <= self.upper))


@dataclass(frozen=True)
class ColumnStats:
    """Per-attribute summary statistics of an original dataset.

    ``variances`` uses the n-1 (sample) denominator.
    """

    attributes: tuple[str, ...]
    means: tuple[float, ...]
    variances: tuple[float, ...]
    mins: tuple[float, ...]
    maxs: tuple[float, ...]
    rows: int = field(default=0)


def _parse_cell(text: str, row: int, column: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ParseError(
            f"row {row}, column {column!r}: {text!r} is not a number"
        ) from None
    if not math.isfinite(value):
        raise ParseError(f"row {row}, column {column!r}: {text!r} is not finite")
    return value


def load_csv(
    path: str | Path,
    attributes: list[str] | None = None,
    label_column: str | None = None,
) -> Dataset:
    """Read a CSV file into a Dataset.

    ``attributes`` selects the numeric columns (default: every column
    except "id" and ``label_column``).  Selected cells must parse as
    finite numbers; a missing or empty cell is an error naming the row
    and column.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file") from None
        if len(set(header)) != len(header):
            raise SchemaError(f"{path}: duplicate column names in header")
        if label_column is not None and label_column not in header:
            raise SchemaError(f"{path}: no column named {label_column!r}")
        if attributes is None:
            attributes = [c for c in header if c != ID_COLUMN and c != label_column]
        if not attributes:
            raise SchemaError(f"{path}: no numeric columns to load")
        missing = [c for c in attributes if c not in header]
        if missing:
            raise SchemaError(f"{path}: missing column(s) {missing}")
        if ID_COLUMN in attributes or label_column in attributes:
            raise SchemaError("reserved columns cannot be numeric attributes")

        positions = [header.index(c) for c in attributes]
        id_pos = header.index(ID_COLUMN) if ID_COLUMN in header else None
        label_pos = header.index(label_column) if label_column is not None else None

        rows: list[list[float]] = []
        ids: list[str] = []
        labels: list[str] = []
        for i, record in enumerate(reader, start=1):
            if len(record) != len(header):
                raise ParseError(
                    f"row {i}: expected {len(header)} fields, got {len(record)}"
                )
            rows.append([_parse_cell(record[p], i, header[p]) for p in positions])
            if id_pos is not None:
                ids.append(record[id_pos])
            if label_pos is not None:
                labels.append(record[label_pos])

    if not rows:
        raise SchemaError(f"{path}: no data rows")
    return Dataset(
        attributes=tuple(attributes),
        values=np.array(rows, dtype=np.float64),
        stage="original",
        ids=tuple(ids) if ids else None,
        labels=tuple(labels) if labels else None,
        label_name=label_column,
    )


def write_csv(dataset: Dataset, path: str | Path) -> None:
    """Write a Dataset back out: id column first, then attributes, then label."""
    path = Path(path)
    header: list[str] = []
    if dataset.ids is not None:
        header.append(ID_COLUMN)
    header.extend(dataset.attributes)
    if dataset.labels is not None:
        header.append(dataset.label_name or "class")
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for i in range(dataset.n):
            row: list[str] = []
            if dataset.ids is not None:
                row.append(dataset.ids[i])
            # repr() keeps the shortest digit string that round-trips.
            row.extend(repr(v) for v in dataset.values[i].tolist())
            if dataset.labels is not None:
                row.append(dataset.labels[i])
            writer.writerow(row)


def compute_domains(dataset: Dataset, alpha: float) -> tuple[AttributeDomain, ...]:
    """Alpha-scaled domains [0, alpha * column max], one per attribute.

    Negative values are rejected: the scaled lower bound is pinned at 0.
    An all-zero column yields the degenerate but usable domain [0, 0].
    """
    if dataset.stage != "original":
        raise ParameterError("domains are computed on original data")
    if not (isinstance(alpha, (int, float)) and math.isfinite(alpha)) or alpha <= 0:
        raise ParameterError(f"alpha must be a positive number, got {alpha!r}")
    mins = dataset.values.min(axis=0)
    maxs = dataset.values.max(axis=0)
    domains = []
    for name, lo, hi in zip(dataset.attributes, mins, maxs):
        if lo < 0:
            raise DomainError(
                f"attribute {name!r} has negative values; alpha-scaled domains "
                "require non-negative data (supply explicit domains instead)"
            )
        domains.append(AttributeDomain(0.0, float(alpha * hi)))
    return tuple(domains)


def column_stats(dataset: Dataset) -> ColumnStats:
    """Mean, sample variance (n-1), min and max per attribute."""
    if dataset.stage != "original":
        raise ParameterError("column statistics are computed on original data")
    if dataset.n < 2:
        raise InsufficientDataError(
            f"sample variance needs at least 2 rows, got {dataset.n}"
        )
    v = dataset.values
    return ColumnStats(
        attributes=dataset.attributes,
        means=tuple(float(x) for x in v.mean(axis=0)),
        variances=tuple(float(x) for x in v.var(axis=0, ddof=1)),
        mins=tuple(float(x) for x in v.min(axis=0)),
        maxs=tuple(float(x) for x in v.max(axis=0)),
        rows=dataset.n,
    )


def derive_class(
    dataset: Dataset,
    attribute: str,
    threshold: float,
    low_label: str = "low",
    high_label: str = "high",
    class_name: str = "class",
) -> Dataset:
    """Turn one numeric attribute into a two-valued label column.

    Values <= threshold map to ``low_label``.  The source attribute is
    removed from the numeric matrix.
    """
    if not math.isfinite(threshold):
        raise ParameterError("threshold must be finite")
    if attribute not in dataset.attributes:
        raise SchemaError(f"no attribute named {attribute!r}")
    if dataset.m < 2:
        raise ParameterError("deriving a class from the only attribute would "
                             "leave no numeric data")
    if dataset.labels is not None:
        raise ParameterError("dataset already carries a label column")
    j = dataset.attributes.index(attribute)
    source = dataset.values[:, j]
    labels = tuple(low_label if x <= threshold else high_label for x in source)
    keep = [i for i in range(dataset.m) if i != j]
    return Dataset(
        attributes=tuple(dataset.attributes[i] for i in keep),
        values=dataset.values[:, keep],
        stage=dataset.stage,
        ids=dataset.ids,
        labels=labels,
        label_name=class_name,
    )


def split_train_test(
    original: Dataset, masked: Dataset, fraction: float
) -> tuple[Dataset, Dataset]:
    """File-order split: first floor(fraction*n) rows of the *masked* data
    become the training set, the remaining rows of the *original* data the
    test set.
    """
    if not (0.0 < fraction < 1.0):
        raise ParameterError(f"fraction must lie strictly between 0 and 1, "
                             f"got {fraction}")
    if original.n != masked.n:
        raise AlignmentError(
            f"row counts differ: original {original.n}, masked {masked.n}"
        )
    if original.attributes != masked.attributes:
        raise AlignmentError("attribute names differ between original and masked")
    if original.ids is not None and masked.ids is not None \
            and original.ids != masked.ids:
        raise AlignmentError("id columns differ between original and masked")
    if (original.labels is None) != (masked.labels is None):
        raise AlignmentError("only one of the two datasets carries labels")

    cut = math.floor(fraction * original.n)
    if cut < 1:
        raise ParameterError("fraction yields an empty training set")

    def take(d: Dataset, sl: slice, stage: str) -> Dataset:
        return Dataset(
            attributes=d.attributes,
            values=d.values[sl],
            stage=stage,
            ids=d.ids[sl] if d.ids is not None else None,
            labels=d.labels[sl] if d.labels is not None else None,
            label_name=d.label_name,
        )

    train = take(masked, slice(0, cut), masked.stage)
    test = take(original, slice(cut, original.n), original.stage)
    return train, test
