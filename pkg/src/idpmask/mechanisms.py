"""Noise-adding mechanisms over original or microaggregated data.

Four methods share one pipeline:

* ``dp``: independent Laplace noise on every value, calibrated to the
  full domain width.
* ``dp-um``: microaggregate first, then one Laplace draw per cluster at
  the global (domain-width) sensitivity, shared by all cluster members.
* ``idp-ls``: like dp-um but calibrated to the local sensitivity of the
  actual cluster values.
* ``idp-cbls``: pre-process cluster extremes, recompute centroids on the
  pre-processed values, and calibrate to the cluster-based sensitivity,
  which never reads domain bounds.

The total budget splits across attributes (sequential composition);
disjoint clusters of one attribute each get the full per-attribute share
(parallel composition).  All randomness derives from ``(seed, attribute
index, cluster index)`` so results are independent of evaluation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dataset import AttributeDomain, Dataset, compute_domains
from .errors import DomainError, ParameterError
from .microagg import (
    Clustering,
    individual_ranking_cluster,
    preprocess_extremes,
)
from .sensitivity import per_cluster_sensitivities

METHODS = ("dp", "dp-um", "idp-ls", "idp-cbls")

_CLUSTER_METHODS = ("dp-um", "idp-ls", "idp-cbls")

_SENSITIVITY_KIND = {
    "dp-um": "global",
    "idp-ls": "local",
    "idp-cbls": "cluster_based_local",
}

__all__ = [
    "METHODS",
    "PrivacyBudget",
    "MechanismConfig",
    "MaskingResult",
    "allocate_budget",
    "laplace_sample",
    "laplace_vector",
    "mechanism_dp",
    "mechanism_dp_um",
    "mechanism_idp_ls",
    "mechanism_idp_cbls",
    "apply_mechanism",
]


@dataclass(frozen=True)
class PrivacyBudget:
    """A total budget and its per-attribute shares.

    Shares must be positive and sum back to the total (1e-12 relative).
    """

    total: float
    shares: tuple[float, ...]

    def __post_init__(self) -> None:
        if not (math.isfinite(self.total) and self.total > 0):
            raise ParameterError(f"total budget must be positive, got {self.total}")
        if not self.shares:
            raise ParameterError("budget needs at least one share")
        if any(not math.isfinite(s) or s <= 0 for s in self.shares):
            raise ParameterError("every budget share must be positive")
        drift = abs(math.fsum(self.shares) - self.total)
        if drift > 1e-12 * max(1.0, abs(self.total)):
            raise ParameterError(
                f"shares sum to {math.fsum(self.shares)}, not {self.total}"
            )

    @property
    def attributes(self) -> int:
        return len(self.shares)


def allocate_budget(
    epsilon: float, attributes: int, weights: tuple[float, ...] | None = None
) -> PrivacyBudget:
    """Split a total budget across attributes, equally by default."""
    if not (isinstance(epsilon, (int, float)) and math.isfinite(epsilon)
            and epsilon > 0):
        raise ParameterError(f"epsilon must be positive, got {epsilon!r}")
    if attributes < 1:
        raise ParameterError(f"need at least one attribute, got {attributes}")
    if weights is None:
        shares = (epsilon / attributes,) * attributes
    else:
        if len(weights) != attributes:
            raise ParameterError(
                f"{len(weights)} weights for {attributes} attributes"
            )
        if any(not math.isfinite(w) or w <= 0 for w in weights):
            raise ParameterError("weights must be positive")
        total_w = math.fsum(weights)
        shares = tuple(epsilon * w / total_w for w in weights)
    return PrivacyBudget(total=float(epsilon), shares=shares)


def _rng(seed: int, *key: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=int(seed),
                                spawn_key=tuple(int(x) for x in key))
    return np.random.Generator(np.random.PCG64(ss))


def _check_seed(seed: int) -> int:
    if not isinstance(seed, (int, np.integer)) or isinstance(seed, bool):
        raise ParameterError(f"seed must be an integer, got {seed!r}")
    if seed < 0:
        raise ParameterError(f"seed must be non-negative, got {seed}")
    return int(seed)


def laplace_sample(rng: np.random.Generator, scale: float) -> float:
    """One Laplace(0, scale) draw by inverse CDF.

    u is uniform on the open interval (-1/2, 1/2); the draw is
    -scale * sign(u) * ln(1 - 2|u|).  scale 0 returns exactly 0.0.
    """
    if not (math.isfinite(scale) and scale >= 0.0):
        raise ParameterError(f"scale must be finite and >= 0, got {scale}")
    u = rng.random()
    while u == 0.0:  # keep u - 1/2 off the closed endpoint
        u = rng.random()
    u -= 0.5
    if scale == 0.0:
        return 0.0
    return -scale * math.copysign(1.0, u) * math.log1p(-2.0 * abs(u))


def laplace_vector(rng: np.random.Generator, scale: float, size: int) -> np.ndarray:
    """Vector of independent Laplace(0, scale) draws, same transform as
    :func:`laplace_sample`."""
    if not (math.isfinite(scale) and scale >= 0.0):
        raise ParameterError(f"scale must be finite and >= 0, got {scale}")
    u = rng.random(size)
    mask = u == 0.0
    while mask.any():
        u[mask] = rng.random(int(mask.sum()))
        mask = u == 0.0
    u -= 0.5
    if scale == 0.0:
        return np.zeros(size)
    return -scale * np.sign(u) * np.log1p(-2.0 * np.abs(u))


@dataclass(frozen=True)
class MechanismConfig:
    """Everything a masking run needs.  The seed is mandatory: there is no
    wall-clock fallback anywhere in the package."""

    method: str
    epsilon: float
    seed: int
    k: int | None = None
    alpha: float | None = None
    clamp: bool | None = None  # None -> method default
    weights: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if self.method not in METHODS:
            raise ParameterError(
                f"unknown method {self.method!r}; choose one of {METHODS}"
            )
        if not (math.isfinite(self.epsilon) and self.epsilon > 0):
            raise ParameterError(f"epsilon must be positive, got {self.epsilon}")
        _check_seed(self.seed)
        if self.method in _CLUSTER_METHODS:
            if self.k is None:
                raise ParameterError(f"method {self.method} needs k")
            minimum = 3 if self.method == "idp-cbls" else 1
            if self.k < minimum:
                raise ParameterError(
                    f"method {self.method} needs k >= {minimum}, got {self.k}"
                )
        if self.alpha is not None and self.alpha <= 0:
            raise ParameterError(f"alpha must be positive, got {self.alpha}")


@dataclass(frozen=True)
class MaskingResult:
    """Masked dataset plus the calibration details a manifest reports."""

    dataset: Dataset
    method: str
    budget: PrivacyBudget
    seed: int
    k: int | None
    clamped: bool
    domains: tuple[AttributeDomain, ...] | None
    clusterings: tuple[Clustering, ...] | None
    scales: tuple[np.ndarray, ...] | None  # per attribute, per cluster
    draws: tuple[np.ndarray, ...] | None


def _require_budget(dataset: Dataset, budget: PrivacyBudget) -> None:
    if budget.attributes != dataset.m:
        raise ParameterError(
            f"budget has {budget.attributes} shares for {dataset.m} attributes"
        )


def _require_original(dataset: Dataset) -> None:
    if dataset.stage != "original":
        raise ParameterError(
            f"mechanisms mask original data, got stage {dataset.stage!r}"
        )


def _require_domains(dataset: Dataset,
                     domains: tuple[AttributeDomain, ...]) -> None:
    if len(domains) != dataset.m:
        raise ParameterError(f"{len(domains)} domains for {dataset.m} attributes")


def _clamp_columns(values: np.ndarray,
                   domains: tuple[AttributeDomain, ...]) -> np.ndarray:
    out = values.copy()
    for j, dom in enumerate(domains):
        np.clip(out[:, j], dom.lower, dom.upper, out=out[:, j])
    return out


def _mask_dp(
    dataset: Dataset,
    domains: tuple[AttributeDomain, ...],
    budget: PrivacyBudget,
    seed: int,
    clamp: bool,
) -> MaskingResult:
    _require_original(dataset)
    _require_budget(dataset, budget)
    _require_domains(dataset, domains)
    seed = _check_seed(seed)
    out = np.empty_like(dataset.values)
    scales = []
    for j, dom in enumerate(domains):
        column = dataset.values[:, j]
        if not dom.contains(column):
            raise DomainError(
                f"attribute {dataset.attributes[j]!r} has values outside "
                f"[{dom.lower}, {dom.upper}]"
            )
        b = dom.width / budget.shares[j]
        out[:, j] = column + laplace_vector(_rng(seed, j), b, dataset.n)
        scales.append(np.array([b]))
    if clamp:
        out = _clamp_columns(out, domains)
    return MaskingResult(
        dataset=dataset.replace_values(out, "masked"),
        method="dp",
        budget=budget,
        seed=seed,
        k=None,
        clamped=clamp,
        domains=domains,
        clusterings=None,
        scales=tuple(scales),
        draws=None,
    )


def _mask_clustered(
    dataset: Dataset,
    method: str,
    budget: PrivacyBudget,
    k: int,
    seed: int,
    clamp: bool,
    domains: tuple[AttributeDomain, ...] | None,
) -> MaskingResult:
    _require_original(dataset)
    _require_budget(dataset, budget)
    seed = _check_seed(seed)
    kind = _SENSITIVITY_KIND[method]
    if kind in ("global", "local"):
        if domains is None:
            raise ParameterError(f"method {method} needs attribute domains")
        _require_domains(dataset, domains)
    if clamp and domains is None:
        raise ParameterError("clamping requires attribute domains")
    if method == "idp-cbls" and k < 3:
        raise ParameterError(f"idp-cbls needs k >= 3, got {k}")

    clusterings = tuple(
        individual_ranking_cluster(dataset.values[:, j], k, name)
        for j, name in enumerate(dataset.attributes)
    )

    if method == "idp-cbls":
        # Centroids come from the pre-processed values; the sensitivity
        # is evaluated on the original cluster values.
        base = preprocess_extremes(dataset, clusterings)
        centroids = []
        for j, clustering in enumerate(clusterings):
            col = base.values[:, j]
            centroids.append(np.array([
                float(col[np.asarray(members, dtype=np.intp)].mean())
                for members in clustering.clusters
            ]))
    else:
        centroids = [np.asarray(c.centroids, dtype=np.float64)
                     for c in clusterings]

    sens = per_cluster_sensitivities(dataset, clusterings, kind, domains)

    out = np.empty_like(dataset.values)
    scales = []
    draws = []
    for j, clustering in enumerate(clusterings):
        eps_a = budget.shares[j]
        cluster_scales = sens[j] / eps_a
        cluster_draws = np.array([
            laplace_sample(_rng(seed, j, ci), float(b))
            for ci, b in enumerate(cluster_scales)
        ])
        noisy = centroids[j] + cluster_draws
        out[:, j] = noisy[clustering.assignment]
        scales.append(cluster_scales)
        draws.append(cluster_draws)
    if clamp:
        assert domains is not None
        out = _clamp_columns(out, domains)
    return MaskingResult(
        dataset=dataset.replace_values(out, "masked"),
        method=method,
        budget=budget,
        seed=seed,
        k=int(k),
        clamped=clamp,
        domains=domains,
        clusterings=clusterings,
        scales=tuple(scales),
        draws=tuple(draws),
    )


def mechanism_dp(
    dataset: Dataset,
    domains: tuple[AttributeDomain, ...],
    budget: PrivacyBudget,
    seed: int,
    clamp: bool = True,
) -> Dataset:
    """Per-value Laplace noise at domain-width sensitivity."""
    return _mask_dp(dataset, domains, budget, seed, clamp).dataset


def mechanism_dp_um(
    dataset: Dataset,
    domains: tuple[AttributeDomain, ...],
    budget: PrivacyBudget,
    k: int,
    seed: int,
    clamp: bool = True,
) -> Dataset:
    """Microaggregate, then one global-sensitivity draw per cluster."""
    return _mask_clustered(dataset, "dp-um", budget, k, seed, clamp, domains).dataset


def mechanism_idp_ls(
    dataset: Dataset,
    domains: tuple[AttributeDomain, ...],
    budget: PrivacyBudget,
    k: int,
    seed: int,
    clamp: bool = True,
) -> Dataset:
    """Microaggregate, then one local-sensitivity draw per cluster."""
    return _mask_clustered(dataset, "idp-ls", budget, k, seed, clamp, domains).dataset


def mechanism_idp_cbls(
    dataset: Dataset,
    budget: PrivacyBudget,
    k: int,
    seed: int,
    domains: tuple[AttributeDomain, ...] | None = None,
    clamp: bool = False,
) -> Dataset:
    """Pre-process extremes, then one cluster-calibrated draw per cluster.

    Needs no domain bounds; pass ``domains`` (and clamp) only to bound
    outputs explicitly.
    """
    return _mask_clustered(
        dataset, "idp-cbls", budget, k, seed, clamp, domains
    ).dataset


def apply_mechanism(
    dataset: Dataset,
    config: MechanismConfig,
    domains: tuple[AttributeDomain, ...] | None = None,
) -> MaskingResult:
    """Dispatch a configured masking run.

    Domain-calibrated methods take explicit ``domains`` or derive them
    from ``config.alpha``.  idp-cbls ignores alpha entirely; explicit
    domains only ever clamp its output.
    """
    budget = allocate_budget(config.epsilon, dataset.m, config.weights)
    if config.method == "idp-cbls":
        clamp = config.clamp if config.clamp is not None else domains is not None
        return _mask_clustered(dataset, "idp-cbls", budget, config.k,
                               config.seed, clamp, domains)
    if domains is None:
        if config.alpha is None:
            raise ParameterError(
                f"method {config.method} needs domains or alpha"
            )
        domains = compute_domains(dataset, config.alpha)
    clamp = config.clamp if config.clamp is not None else True
    if config.method == "dp":
        return _mask_dp(dataset, domains, budget, config.seed, clamp)
    return _mask_clustered(dataset, config.method, budget, config.k,
                           config.seed, clamp, domains)
