"""Language-agnostic character n-gram text classification.

The package pairs a functional core (n-gram extraction, TF-IDF/BM25
weighting, a cost-weighted logistic regression solver, stratified
cross-validation, leaderboard aggregation) with scikit-learn style
estimators: :class:`CharNgramVectorizer`,
:class:`CostWeightedLogisticRegression`, and the end-to-end
:class:`NgramTextClassifier`.
"""

from .config import PipelineConfig
from .corpus import (
    Dataset,
    Document,
    FoldAssignment,
    StatsReport,
    dataset_stats,
    load_dataset,
    save_dataset,
    split_stratified,
)
from .features import (
    CharNgramVectorizer,
    SparseCounts,
    Vocabulary,
    build_vocabulary,
    extract_ngrams,
    preprocess,
    vectorize,
)
from .linear_model import (
    BinaryModel,
    CostWeightedLogisticRegression,
    logistic_gradient,
    logistic_objective,
    train_binary,
)
from .model_selection import (
    ConfusionMatrix,
    CVReport,
    SearchResult,
    SearchSpace,
    confusion,
    cross_validate,
    log_grid,
    macro_f1,
    search,
)
from .pipeline import NgramTextClassifier
from .weighting import (
    WeightingConfig,
    apply_weighting,
    bm25_weight,
    normalize_l2,
    normalize_minmax,
    tfidf_weight,
)

__version__ = "0.1.0"

__all__ = [
    "PipelineConfig",
    "Dataset",
    "Document",
    "FoldAssignment",
    "StatsReport",
    "dataset_stats",
    "load_dataset",
    "save_dataset",
    "split_stratified",
    "CharNgramVectorizer",
    "SparseCounts",
    "Vocabulary",
    "build_vocabulary",
    "extract_ngrams",
    "preprocess",
    "vectorize",
    "BinaryModel",
    "CostWeightedLogisticRegression",
    "logistic_gradient",
    "logistic_objective",
    "train_binary",
    "ConfusionMatrix",
    "CVReport",
    "SearchResult",
    "SearchSpace",
    "confusion",
    "cross_validate",
    "log_grid",
    "macro_f1",
    "search",
    "NgramTextClassifier",
    "WeightingConfig",
    "apply_weighting",
    "bm25_weight",
    "normalize_l2",
    "normalize_minmax",
    "tfidf_weight",
    "__version__",
]
