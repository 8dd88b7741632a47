"""Probing benchmark for word embeddings.

Trains simple supervised probes (logistic regression, RBF SVM) on
balanced word and word-pair classification tasks, before and after
information-reduction transforms (bit truncation, sign binarization,
PCA), to measure how much task-relevant structure an embedding carries
and how robust it is to compression.
"""

from .embeddings import (
    EmbeddingSet,
    intersect_vocab,
    load_embeddings,
    standardize,
    write_embeddings,
)
from .errors import (
    ConfigError,
    DatasetError,
    EmbeddingFormatError,
    EmbedprobeError,
    ReductionError,
    SmoConvergenceError,
    TaskFormatError,
    TrainingError,
)
from .evaluate import (
    EvalReport,
    MetricsResult,
    cross_validate,
    geometric_mean,
    grid_search,
    metrics,
)
from .logreg import LogRegModel, predict_proba, train_logreg
from .reduce import (
    PcaModel,
    ReductionSpec,
    apply_pipeline,
    parse_spec,
    pca_fit,
    pca_transform,
    sign_binarize,
    truncate_bits,
)
from .runner import (
    ExperimentConfig,
    RunMatrixResult,
    emit_reports,
    parse_config,
    run_experiment,
    validate_config,
)
from .svm import SvmModel, rbf_kernel, train_svm_rbf
from .tasks import (
    Dataset,
    LabeledTask,
    balance_classes,
    build_features,
    load_pair_task,
    load_term_task,
    make_folds,
    sample_unrelated_pairs,
)

__version__ = "0.1.0"

__all__ = [
    "EmbeddingSet", "load_embeddings", "write_embeddings", "intersect_vocab",
    "standardize",
    "LabeledTask", "Dataset", "load_term_task", "load_pair_task",
    "balance_classes", "sample_unrelated_pairs", "build_features", "make_folds",
    "LogRegModel", "train_logreg", "predict_proba",
    "SvmModel", "rbf_kernel", "train_svm_rbf",
    "EvalReport", "MetricsResult", "grid_search", "cross_validate", "metrics",
    "geometric_mean",
    "ReductionSpec", "PcaModel", "parse_spec", "truncate_bits", "sign_binarize",
    "pca_fit", "pca_transform", "apply_pipeline",
    "ExperimentConfig", "RunMatrixResult", "parse_config", "validate_config",
    "run_experiment", "emit_reports",
    "EmbedprobeError", "EmbeddingFormatError", "TaskFormatError", "DatasetError",
    "TrainingError", "SmoConvergenceError", "ReductionError", "ConfigError",
    "__version__",
]
