"""Univariate individual-ranking microaggregation.

Each attribute is treated independently: values are stable-sorted,
partitioned into fixed-size groups of consecutive positions, and every
value is replaced by its group mean.  The extreme-value pre-processing
step used by the cluster-based noise mechanism also lives here.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import csv

import numpy as np

from .dataset import Dataset
from .errors import ParameterError

__all__ = [
    "Clustering",
    "ClusterExtremes",
    "individual_ranking_cluster",
    "microaggregate",
    "cluster_extremes",
    "preprocess_cluster_values",
    "preprocess_extremes",
    "write_cluster_dump",
]


@dataclass(frozen=True)
class Clustering:
    """Partition of one attribute's record indices into sorted-order runs.

    ``clusters[i]`` holds original record indices; ``assignment[r]`` maps
    record r back to its cluster index.  All clusters have between k and
    2k-1 members (the remainder is merged into the last cluster).
    """

    attribute: str
    k: int
    clusters: tuple[tuple[int, ...], ...]
    centroids: tuple[float, ...]
    assignment: np.ndarray

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(c) for c in self.clusters)


@dataclass(frozen=True)
class ClusterExtremes:
    """Order statistics (with multiplicity) from both ends of a cluster."""

    smallest: float
    second_smallest: float
    third_smallest: float
    largest: float
    second_largest: float
    third_largest: float


def _cluster_bounds(n: int, k: int) -> list[tuple[int, int]]:
    groups = n // k
    bounds = [(i * k, (i + 1) * k) for i in range(groups)]
    # Leftover positions (n mod k) are merged into the last group, so the
    # final cluster has between k and 2k-1 members.
    bounds[-1] = (bounds[-1][0], n)
    return bounds


def individual_ranking_cluster(
    values: np.ndarray, k: int, attribute: str = ""
) -> Clustering:
    """Group sorted positions into runs of k (last run absorbs the remainder).

    Ties sort by original record index, so the partition is deterministic.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 1 or values.size < 1:
        raise ParameterError("values must be a non-empty 1-D array")
    n = values.size
    if not isinstance(k, (int, np.integer)) or isinstance(k, bool):
        raise ParameterError(f"k must be an integer, got {k!r}")
    if k < 1 or k > n:
        raise ParameterError(f"k must satisfy 1 <= k <= {n}, got {k}")

    order = np.argsort(values, kind="stable")
    clusters: list[tuple[int, ...]] = []
    centroids: list[float] = []
    assignment = np.empty(n, dtype=np.intp)
    for ci, (lo, hi) in enumerate(_cluster_bounds(n, k)):
        members = order[lo:hi]
        member_values = values[members]
        centroid = float(member_values.mean())
        # Guard the last-ulp case where the float mean of a run drifts
        # outside [min, max] (e.g. mean of three copies of 0.1).
        centroid = min(max(centroid, float(member_values.min())),
                       float(member_values.max()))
        clusters.append(tuple(int(i) for i in members))
        centroids.append(centroid)
        assignment[members] = ci
    assignment.setflags(write=False)
    return Clustering(
        attribute=attribute,
        k=int(k),
        clusters=tuple(clusters),
        centroids=tuple(centroids),
        assignment=assignment,
    )


def microaggregate(
    dataset: Dataset, k: int
) -> tuple[Dataset, tuple[Clustering, ...]]:
    """Replace every value by its cluster centroid, attribute by attribute."""
    if dataset.stage not in ("original", "preprocessed"):
        raise ParameterError(
            f"cannot microaggregate a dataset in stage {dataset.stage!r}"
        )
    out = np.empty_like(dataset.values)
    clusterings = []
    for j, name in enumerate(dataset.attributes):
        clustering = individual_ranking_cluster(dataset.values[:, j], k, name)
        centroids = np.asarray(clustering.centroids)
        out[:, j] = centroids[clustering.assignment]
        clusterings.append(clustering)
    return dataset.replace_values(out, "microaggregated"), tuple(clusterings)


def cluster_extremes(values: np.ndarray) -> ClusterExtremes:
    """Two/three smallest and largest values, counted with multiplicity."""
    values = np.asarray(values, dtype=np.float64)
    if values.size < 3:
        raise ParameterError(
            f"extreme statistics need at least 3 values, got {values.size}"
        )
    s = np.sort(values)
    return ClusterExtremes(
        smallest=float(s[0]),
        second_smallest=float(s[1]),
        third_smallest=float(s[2]),
        largest=float(s[-1]),
        second_largest=float(s[-2]),
        third_largest=float(s[-3]),
    )


def preprocess_cluster_values(values: np.ndarray) -> np.ndarray:
    """One record holding the smallest value takes the second-smallest, one
    record holding the largest takes the second-largest (ties: the lowest
    original index is the one replaced).  Everything else is untouched.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.size < 3:
        raise ParameterError(
            f"pre-processing needs clusters of at least 3 values, "
            f"got {values.size}"
        )
    s = np.sort(values)
    out = values.copy()
    i_min = int(np.argmin(values))   # argmin/argmax return the first tie
    i_max = int(np.argmax(values))
    out[i_min] = s[1]
    out[i_max] = s[-2]
    return out


def preprocess_extremes(dataset: Dataset, clusterings: tuple[Clustering, ...]) -> Dataset:
    """Apply the extreme-value replacement to every cluster of every attribute.

    Cluster membership is taken from ``clusterings`` and left unchanged;
    only values move.  Idempotent: a second pass is a no-op.
    """
    if dataset.stage not in ("original", "preprocessed"):
        raise ParameterError(
            f"cannot pre-process a dataset in stage {dataset.stage!r}"
        )
    if len(clusterings) != dataset.m:
        raise ParameterError(
            f"{len(clusterings)} clusterings for {dataset.m} attributes"
        )
    out = dataset.values.copy()
    for j, clustering in enumerate(clusterings):
        for members in clustering.clusters:
            idx = np.asarray(members, dtype=np.intp)
            out[idx, j] = preprocess_cluster_values(dataset.values[idx, j])
    return dataset.replace_values(out, "preprocessed")


def write_cluster_dump(
    dataset: Dataset, clusterings: tuple[Clustering, ...], path: str | Path
) -> None:
    """Debug CSV: one row per (attribute, cluster) with size, min, max, centroid."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["attribute", "cluster_index", "size", "min", "max", "centroid"]
        )
        for j, clustering in enumerate(clusterings):
            for ci, members in enumerate(clustering.clusters):
                vals = dataset.values[np.asarray(members, dtype=np.intp), j]
                writer.writerow([
                    clustering.attribute,
                    ci,
                    len(members),
                    repr(float(vals.min())),
                    repr(float(vals.max())),
                    repr(clustering.centroids[ci]),
                ])
