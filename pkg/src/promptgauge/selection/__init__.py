from .features import EMBEDDING_PREFIX, JUDGE_FALLBACK, assemble_feature_matrix
from .gbdt import (
    BoostParams,
    BoostedTreeModel,
    FeatureMatrix,
    GainImportance,
    fit,
    gain_importance,
    predict_proba,
    predict_proba_matrix,
    sigmoid,
)
from .select import (
    SELECTION_THRESHOLD,
    aggregate_embedding_importance,
    importance_table,
    select_metrics,
    select_with_fallback,
)

__all__ = [
    "BoostParams",
    "BoostedTreeModel",
    "EMBEDDING_PREFIX",
    "FeatureMatrix",
    "GainImportance",
    "JUDGE_FALLBACK",
    "SELECTION_THRESHOLD",
    "aggregate_embedding_importance",
    "assemble_feature_matrix",
    "fit",
    "gain_importance",
    "importance_table",
    "predict_proba",
    "predict_proba_matrix",
    "select_metrics",
    "select_with_fallback",
    "sigmoid",
]
