"""Information-loss evaluation: normalized distances, SSE, grid runs.

The distance between an original record x and its masked version y is

    d(x, y) = (1/m) * sqrt(sum_j (|x_j - y_j| / var_j)^2)

with var_j the sample variance of attribute j in the *original* dataset
(a config switch selects standard-deviation normalization instead).
SSE is the sum of squared distances over all records.
"""

from __future__ import annotations

import hashlib
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import csv

import numpy as np

from .dataset import ColumnStats, Dataset, column_stats, compute_domains
from .errors import (
    AlignmentError,
    DegenerateVarianceError,
    ParameterError,
)
from .mechanisms import METHODS, MechanismConfig, apply_mechanism

NORMALIZATIONS = ("variance", "std")

RESULT_COLUMNS = ("method", "epsilon", "k", "alpha", "run", "sse", "mean_sse")
AVERAGE_COLUMNS = ("method", "epsilon", "k", "alpha", "runs", "avg_sse",
                   "avg_mean_sse")

__all__ = [
    "ExperimentGrid",
    "ExperimentResult",
    "AveragedCell",
    "record_distance",
    "sse",
    "derive_cell_seed",
    "run_experiment",
    "cell_averages",
    "write_results_csv",
    "write_averages_csv",
]


def _norm_factors(stats: ColumnStats, normalize: str) -> np.ndarray:
    if normalize not in NORMALIZATIONS:
        raise ParameterError(f"unknown normalization {normalize!r}")
    var = np.asarray(stats.variances, dtype=np.float64)
    return np.sqrt(var) if normalize == "std" else var


def record_distance(
    x: np.ndarray,
    y: np.ndarray,
    stats: ColumnStats,
    normalize: str = "variance",
) -> float:
    """Variance-normalized euclidean-style distance between two records."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    m = len(stats.attributes)
    if x.shape != (m,) or y.shape != (m,):
        raise AlignmentError("records and statistics have different widths")
    factors = _norm_factors(stats, normalize)
    diff = np.abs(x - y)
    bad = (factors == 0.0) & (diff > 0.0)
    if bad.any():
        name = stats.attributes[int(np.argmax(bad))]
        raise DegenerateVarianceError(
            f"attribute {name!r} has zero variance but differing values"
        )
    terms = np.divide(diff, factors, out=np.zeros_like(diff),
                      where=factors != 0.0)
    return float(np.sqrt(np.sum(terms * terms)) / m)


def sse(
    original: Dataset,
    masked: Dataset,
    stats: ColumnStats | None = None,
    normalize: str = "variance",
) -> tuple[float, float]:
    """Total and per-record squared distance between two aligned datasets.

    Zero-variance attributes cannot be normalized; they are dropped from
    the distance with a warning (the divisor m shrinks accordingly).
    """
    if original.n != masked.n:
        raise AlignmentError(
            f"row counts differ: {original.n} vs {masked.n}"
        )
    if original.attributes != masked.attributes:
        raise AlignmentError("attribute names differ")
    if stats is None:
        stats = column_stats(original)
    if stats.attributes != original.attributes:
        raise AlignmentError("statistics cover different attributes")

    factors = _norm_factors(stats, normalize)
    keep = factors != 0.0
    if not keep.all():
        dropped = [a for a, k in zip(original.attributes, keep) if not k]
        warnings.warn(
            f"excluding zero-variance attribute(s) {dropped} from the distance",
            stacklevel=2,
        )
    if not keep.any():
        raise DegenerateVarianceError("every attribute has zero variance")

    m_eff = int(keep.sum())
    diff = np.abs(original.values[:, keep] - masked.values[:, keep])
    terms = diff / factors[keep]
    distances_sq = np.sum(terms * terms, axis=1) / (m_eff * m_eff)
    total = float(distances_sq.sum())
    return total, total / original.n


def derive_cell_seed(
    base_seed: int,
    method: str,
    epsilon: float,
    k: int,
    alpha: float,
    run: int,
) -> int:
    """Stable 64-bit seed for one (cell, repetition); no wall clock involved."""
    text = f"{int(base_seed)}|{method}|{epsilon!r}|{int(k)}|{alpha!r}|{int(run)}"
    digest = hashlib.blake2b(text.encode("ascii"), digest_size=8).digest()
    return int.from_bytes(digest, "big")


@dataclass(frozen=True)
class ExperimentGrid:
    """Cartesian grid of masking runs.

    ``dp`` ignores k, so it contributes one cell per (epsilon, alpha)
    with k recorded as 0.  ``clamp`` applies to the domain-calibrated
    methods; idp-cbls always runs unbounded (it needs no domains).
    """

    methods: tuple[str, ...]
    epsilons: tuple[float, ...]
    ks: tuple[int, ...]
    alphas: tuple[float, ...]
    repetitions: int
    base_seed: int
    clamp: bool = True
    normalize: str = "variance"

    def __post_init__(self) -> None:
        if not self.methods:
            raise ParameterError("grid needs at least one method")
        unknown = [m for m in self.methods if m not in METHODS]
        if unknown:
            raise ParameterError(f"unknown method(s) {unknown}")
        if not self.epsilons or any(e <= 0 or not math.isfinite(e)
                                    for e in self.epsilons):
            raise ParameterError("epsilons must be a non-empty list of "
                                 "positive numbers")
        needs_k = any(m != "dp" for m in self.methods)
        if needs_k and not self.ks:
            raise ParameterError("grid needs at least one k")
        if any((not isinstance(k, (int, np.integer))) or k < 1
               for k in self.ks):
            raise ParameterError("every k must be a positive integer")
        if not self.alphas or any(a <= 0 or not math.isfinite(a)
                                  for a in self.alphas):
            raise ParameterError("alphas must be a non-empty list of "
                                 "positive numbers")
        if self.repetitions < 1:
            raise ParameterError("repetitions must be >= 1")
        if self.normalize not in NORMALIZATIONS:
            raise ParameterError(f"unknown normalization {self.normalize!r}")
        _ = int(self.base_seed)


@dataclass(frozen=True)
class ExperimentResult:
    method: str
    epsilon: float
    k: int
    alpha: float
    run: int
    seed: int
    sse: float
    mean_sse: float


@dataclass(frozen=True)
class AveragedCell:
    method: str
    epsilon: float
    k: int
    alpha: float
    runs: int
    avg_sse: float
    avg_mean_sse: float


def _grid_cells(grid: ExperimentGrid, n: int) -> list[tuple[str, float, int, float]]:
    """Expand the grid; dp collapses over k.  Unusable cells are skipped
    with a warning instead of aborting the whole run."""
    cells = []
    for method in grid.methods:
        for eps in grid.epsilons:
            for alpha in grid.alphas:
                if method == "dp":
                    cells.append((method, eps, 0, alpha))
                    continue
                for k in grid.ks:
                    if method == "idp-cbls" and k < 3:
                        warnings.warn(
                            f"skipping idp-cbls with k={k}: needs k >= 3",
                            stacklevel=3,
                        )
                        continue
                    if k > n:
                        warnings.warn(
                            f"skipping {method} with k={k}: dataset has "
                            f"only {n} rows",
                            stacklevel=3,
                        )
                        continue
                    cells.append((method, eps, int(k), alpha))
    return cells


def run_experiment(
    grid: ExperimentGrid,
    dataset: Dataset,
    threads: int = 1,
) -> list[ExperimentResult]:
    """Run every (cell, repetition) of the grid and score it against the
    original data.  Output is identical for any thread count: each job's
    randomness is a pure function of the derived seed.
    """
    if threads < 1:
        raise ParameterError(f"threads must be >= 1, got {threads}")
    stats = column_stats(dataset)
    domain_cache = {alpha: compute_domains(dataset, alpha)
                    for alpha in set(grid.alphas)
                    if any(m != "idp-cbls" for m in grid.methods)}
    cells = _grid_cells(grid, dataset.n)

    jobs = [(method, eps, k, alpha, run)
            for (method, eps, k, alpha) in cells
            for run in range(1, grid.repetitions + 1)]

    def execute(job: tuple[str, float, int, float, int]) -> ExperimentResult:
        method, eps, k, alpha, run = job
        seed = derive_cell_seed(grid.base_seed, method, eps, k, alpha, run)
        if method == "idp-cbls":
            config = MechanismConfig(method=method, epsilon=eps, seed=seed, k=k)
            result = apply_mechanism(dataset, config)
        else:
            config = MechanismConfig(
                method=method, epsilon=eps, seed=seed,
                k=None if method == "dp" else k, clamp=grid.clamp,
            )
            result = apply_mechanism(dataset, config, domain_cache[alpha])
        total, mean = sse(dataset, result.dataset, stats, grid.normalize)
        return ExperimentResult(
            method=method, epsilon=eps, k=k, alpha=alpha, run=run,
            seed=seed, sse=total, mean_sse=mean,
        )

    if threads == 1:
        return [execute(job) for job in jobs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(execute, jobs))


def cell_averages(results: list[ExperimentResult]) -> list[AveragedCell]:
    """Per-cell averages of the per-run values, in first-seen cell order."""
    order: list[tuple[str, float, int, float]] = []
    grouped: dict[tuple[str, float, int, float], list[ExperimentResult]] = {}
    for r in results:
        key = (r.method, r.epsilon, r.k, r.alpha)
        if key not in grouped:
            grouped[key] = []
            order.append(key)
        grouped[key].append(r)
    out = []
    for key in order:
        rs = grouped[key]
        out.append(AveragedCell(
            method=key[0], epsilon=key[1], k=key[2], alpha=key[3],
            runs=len(rs),
            avg_sse=math.fsum(r.sse for r in rs) / len(rs),
            avg_mean_sse=math.fsum(r.mean_sse for r in rs) / len(rs),
        ))
    return out


def write_results_csv(results: list[ExperimentResult], path: str | Path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(RESULT_COLUMNS)
        for r in results:
            writer.writerow([
                r.method, repr(r.epsilon), r.k, repr(r.alpha), r.run,
                repr(r.sse), repr(r.mean_sse),
            ])


def write_averages_csv(averages: list[AveragedCell], path: str | Path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(AVERAGE_COLUMNS)
        for a in averages:
            writer.writerow([
                a.method, repr(a.epsilon), a.k, repr(a.alpha), a.runs,
                repr(a.avg_sse), repr(a.avg_mean_sse),
            ])
