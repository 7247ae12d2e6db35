"""How much one record can move a cluster centroid.

Three calibrations for the per-cluster mean query, from coarsest to
tightest:

* global: any in-domain dataset vs any neighbour -> (upper - lower) / size
* local: this cluster vs any single-record replacement inside the domain
* cluster_based_local: like local, but measured after the extreme-value
  pre-processing step, which caps the reach of any single replacement
  using order statistics of the cluster alone (no domain needed)

Each closed form ships with a brute-force oracle that enumerates
replacements directly.  The pairs are kept as two independent code
paths on purpose; tests assert they agree.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import AttributeDomain, Dataset
from .errors import DomainError, ParameterError
from .microagg import ClusterExtremes, Clustering, cluster_extremes

SENSITIVITY_KINDS = ("global", "local", "cluster_based_local")

__all__ = [
    "SENSITIVITY_KINDS",
    "SensitivityRow",
    "global_centroid_sensitivity",
    "local_centroid_sensitivity",
    "cluster_based_sensitivity",
    "oracle_local_sensitivity",
    "oracle_cluster_based_sensitivity",
    "per_cluster_sensitivities",
    "sensitivity_rows",
]


def _check_size(cluster_size: int, minimum: int = 1) -> int:
    if not isinstance(cluster_size, (int, np.integer)) or isinstance(cluster_size, bool):
        raise ParameterError(f"cluster size must be an integer, got {cluster_size!r}")
    if cluster_size < minimum:
        raise ParameterError(
            f"cluster size must be >= {minimum}, got {cluster_size}"
        )
    return int(cluster_size)


def global_centroid_sensitivity(domain: AttributeDomain, cluster_size: int) -> float:
    """Worst-case centroid change over all in-domain datasets: width / size."""
    size = _check_size(cluster_size)
    return domain.width / size


def local_centroid_sensitivity(values: np.ndarray, domain: AttributeDomain) -> float:
    """Worst-case centroid change for *this* cluster when one of its values
    is replaced by anything inside the domain.

    The numerator is the larger of (upper - cluster min) and
    (cluster max - lower); the best move always drags an extreme value to
    the opposite domain endpoint.
    """
    values = np.asarray(values, dtype=np.float64)
    size = _check_size(values.size)
    if not domain.contains(values):
        raise DomainError("cluster values fall outside the domain")
    numerator = max(domain.upper - float(values.min()),
                    float(values.max()) - domain.lower)
    return numerator / size


def oracle_local_sensitivity(values: np.ndarray, domain: AttributeDomain) -> float:
    """Brute force: try replacing every record by either domain endpoint.

    Replacing x by v changes the cluster sum by exactly v - x, so the
    centroid moves |v - x| / size; the oracle maximises that directly.
    """
    values = np.asarray(values, dtype=np.float64)
    size = _check_size(values.size)
    if not domain.contains(values):
        raise DomainError("cluster values fall outside the domain")
    best = 0.0
    for x in values.tolist():
        for v in (domain.lower, domain.upper):
            best = max(best, abs(v - x))
    return best / size


def cluster_based_sensitivity(extremes: ClusterExtremes, cluster_size: int) -> float:
    """Worst-case centroid change after pre-processing, from order
    statistics of the cluster alone.

    A single replacement can move at most three values of the
    pre-processed cluster: the replaced record itself plus the records
    that take over as new second-smallest/-largest.  The two sums below
    bound the upward and downward moves; domain bounds never enter.
    """
    size = _check_size(cluster_size, minimum=3)
    e = extremes
    upward = (
        abs(e.largest - e.second_smallest)
        + abs(e.third_smallest - e.second_smallest)
        + abs(e.largest - e.second_largest)
    )
    downward = (
        abs(e.smallest - e.second_largest)
        + abs(e.third_largest - e.second_largest)
        + abs(e.smallest - e.second_smallest)
    )
    return max(upward, downward) / size


def oracle_cluster_based_sensitivity(
    values: np.ndarray,
    domain: AttributeDomain,
    grid_points: int = 201,
) -> float:
    """Brute force: enumerate single-record replacements and measure the
    pre-processed centroid shift for each.

    Candidate replacements are the domain endpoints, a uniform grid over
    the domain, and every existing cluster value.  The pre-processed sum
    of a multiset equals sum - min - max + second_min + second_max, which
    is what the enumeration evaluates.  Membership stays fixed.
    """
    values = np.asarray(values, dtype=np.float64)
    n = values.size
    if n < 3:
        raise ParameterError(f"need at least 3 values, got {n}")
    if grid_points < 2:
        raise ParameterError(f"grid_points must be >= 2, got {grid_points}")

    candidates = np.concatenate([
        np.array([domain.lower, domain.upper]),
        np.linspace(domain.lower, domain.upper, grid_points),
        values,
    ])

    def preprocessed_sum(matrix: np.ndarray) -> np.ndarray:
        s = np.sort(matrix, axis=1)
        return matrix.sum(axis=1) - s[:, 0] - s[:, -1] + s[:, 1] + s[:, -2]

    base = preprocessed_sum(values[None, :])[0]
    best = 0.0
    for i in range(n):
        modified = np.tile(values, (candidates.size, 1))
        modified[:, i] = candidates
        shift = np.abs(preprocessed_sum(modified) - base)
        best = max(best, float(shift.max()))
    return best / n


@dataclass(frozen=True)
class SensitivityRow:
    attribute: str
    cluster_index: int
    kind: str
    size: int
    sensitivity: float


def per_cluster_sensitivities(
    dataset: Dataset,
    clusterings: tuple[Clustering, ...],
    kind: str,
    domains: tuple[AttributeDomain, ...] | None = None,
) -> list[np.ndarray]:
    """One sensitivity per cluster, per attribute, for the requested kind.

    ``domains`` is required for the global and local kinds and ignored by
    cluster_based_local.
    """
    if kind not in SENSITIVITY_KINDS:
        raise ParameterError(f"unknown sensitivity kind {kind!r}")
    if kind in ("global", "local"):
        if domains is None:
            raise ParameterError(f"{kind} sensitivity needs attribute domains")
        if len(domains) != dataset.m:
            raise ParameterError(
                f"{len(domains)} domains for {dataset.m} attributes"
            )
    out: list[np.ndarray] = []
    for j, clustering in enumerate(clusterings):
        column = dataset.values[:, j]
        per_cluster = np.empty(len(clustering.clusters))
        for ci, members in enumerate(clustering.clusters):
            vals = column[np.asarray(members, dtype=np.intp)]
            if kind == "global":
                per_cluster[ci] = global_centroid_sensitivity(domains[j], len(members))
            elif kind == "local":
                per_cluster[ci] = local_centroid_sensitivity(vals, domains[j])
            else:
                per_cluster[ci] = cluster_based_sensitivity(
                    cluster_extremes(vals), len(members)
                )
        out.append(per_cluster)
    return out


def sensitivity_rows(
    dataset: Dataset,
    clusterings: tuple[Clustering, ...],
    kinds: tuple[str, ...] = SENSITIVITY_KINDS,
    domains: tuple[AttributeDomain, ...] | None = None,
) -> list[SensitivityRow]:
    """Flat report rows: (attribute, cluster_index, kind, size, sensitivity)."""
    rows: list[SensitivityRow] = []
    for kind in kinds:
        per_attr = per_cluster_sensitivities(dataset, clusterings, kind, domains)
        for clustering, values in zip(clusterings, per_attr):
            for ci, sens in enumerate(values.tolist()):
                rows.append(SensitivityRow(
                    attribute=clustering.attribute,
                    cluster_index=ci,
                    kind=kind,
                    size=len(clustering.clusters[ci]),
                    sensitivity=sens,
                ))
    return rows
