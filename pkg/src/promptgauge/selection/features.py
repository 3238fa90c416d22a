"""Feature matrix assembly for the metric-selection classifier.

Rows are (query, prompt) measurements; columns are the prompt embedding
dimensions plus the eight candidate metric scores. Missing judge scores are
imputed with the column median over the rows being assembled (the training
set), and the imputation values are reported so they can be reused.
"""

from __future__ import annotations

import numpy as np

from ..metrics import CANDIDATE_METRICS, PairMeasurement
from .gbdt import FeatureMatrix

EMBEDDING_PREFIX = "emb_"
JUDGE_METRICS = ("clarity", "coherence", "specificity")
JUDGE_FALLBACK = 5.5  # midpoint of the 1..10 scale, used when every row is missing


def assemble_feature_matrix(
    measurements: list[PairMeasurement],
    embeddings: dict[str, np.ndarray] | None = None,
    include_embeddings: bool = True,
) -> tuple[FeatureMatrix, dict[str, float]]:
    ordered = sorted(measurements, key=lambda m: (m.query_id, m.prompt_id))
    if include_embeddings and embeddings:
        dim = len(next(iter(embeddings.values())))
        emb_names = [f"{EMBEDDING_PREFIX}{i}" for i in range(dim)]
    else:
        emb_names = []
    names = emb_names + list(CANDIDATE_METRICS)

    rows = []
    raw_metric_columns: dict[str, list[float | None]] = {m: [] for m in CANDIDATE_METRICS}
    for m in ordered:
        metric_dict = m.metrics.as_dict()
        for metric in CANDIDATE_METRICS:
            raw_metric_columns[metric].append(metric_dict.get(metric))
        if emb_names:
            rows.append(np.asarray(embeddings[m.prompt_id], dtype=np.float64))
        else:
            rows.append(np.empty(0))

    imputed: dict[str, float] = {}
    metric_matrix = np.empty((len(ordered), len(CANDIDATE_METRICS)))
    for j, metric in enumerate(CANDIDATE_METRICS):
        column = raw_metric_columns[metric]
        present = [v for v in column if v is not None]
        if len(present) < len(column):
            fill = float(np.median(present)) if present else JUDGE_FALLBACK
            imputed[metric] = fill
            column = [fill if v is None else v for v in column]
        metric_matrix[:, j] = column

    if emb_names:
        X = np.hstack([np.vstack(rows), metric_matrix])
    else:
        X = metric_matrix
    labels = np.array([m.quality.is_good for m in ordered], dtype=bool)
    return FeatureMatrix(feature_names=names, X=X, labels=labels), imputed
