"""Microaggregation-based masking of numeric microdata with calibrated noise."""

from .dataset import (
    AttributeDomain,
    ColumnStats,
    Dataset,
    column_stats,
    compute_domains,
    derive_class,
    load_csv,
    split_train_test,
    write_csv,
)
from .errors import (
    AlignmentError,
    DegenerateVarianceError,
    DomainError,
    IdpmaskError,
    InsufficientDataError,
    ParameterError,
    ParseError,
    SchemaError,
)
from .evaluation import (
    AveragedCell,
    ExperimentGrid,
    ExperimentResult,
    cell_averages,
    derive_cell_seed,
    record_distance,
    run_experiment,
    sse,
    write_averages_csv,
    write_results_csv,
)
from .mechanisms import (
    METHODS,
    MaskingResult,
    MechanismConfig,
    PrivacyBudget,
    allocate_budget,
    apply_mechanism,
    laplace_sample,
    laplace_vector,
    mechanism_dp,
    mechanism_dp_um,
    mechanism_idp_cbls,
    mechanism_idp_ls,
)
from .microagg import (
    Clustering,
    ClusterExtremes,
    cluster_extremes,
    individual_ranking_cluster,
    microaggregate,
    preprocess_cluster_values,
    preprocess_extremes,
    write_cluster_dump,
)
from .sensitivity import (
    SENSITIVITY_KINDS,
    SensitivityRow,
    cluster_based_sensitivity,
    global_centroid_sensitivity,
    local_centroid_sensitivity,
    per_cluster_sensitivities,
    sensitivity_rows,
)

__version__ = "0.1.0"

__all__ = [
    "AttributeDomain",
    "ColumnStats",
    "Dataset",
    "column_stats",
    "compute_domains",
    "derive_class",
    "load_csv",
    "split_train_test",
    "write_csv",
    "AlignmentError",
    "DegenerateVarianceError",
    "DomainError",
    "IdpmaskError",
    "InsufficientDataError",
    "ParameterError",
    "ParseError",
    "SchemaError",
    "AveragedCell",
    "ExperimentGrid",
    "ExperimentResult",
    "cell_averages",
    "derive_cell_seed",
    "record_distance",
    "run_experiment",
    "sse",
    "write_averages_csv",
    "write_results_csv",
    "METHODS",
    "MaskingResult",
    "MechanismConfig",
    "PrivacyBudget",
    "allocate_budget",
    "apply_mechanism",
    "laplace_sample",
    "laplace_vector",
    "mechanism_dp",
    "mechanism_dp_um",
    "mechanism_idp_cbls",
    "mechanism_idp_ls",
    "Clustering",
    "ClusterExtremes",
    "cluster_extremes",
    "individual_ranking_cluster",
    "microaggregate",
    "preprocess_cluster_values",
    "preprocess_extremes",
    "write_cluster_dump",
    "SENSITIVITY_KINDS",
    "SensitivityRow",
    "cluster_based_sensitivity",
    "global_centroid_sensitivity",
    "local_centroid_sensitivity",
    "per_cluster_sensitivities",
    "sensitivity_rows",
    "__version__",
]
