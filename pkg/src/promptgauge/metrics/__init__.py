from ..prompts import CANDIDATE_METRICS, CORE_METRICS
from .answers import SCHEMA_KINDS, SchemaRegistry, TaskSchema, canonicalize_answer
from .collect import (
    EstimatorSettings,
    PairMeasurement,
    execution_request,
    measure_candidate,
    mi_score,
    nll_score,
    query_entropy,
    run_trace,
    stability_score,
)
from .judge import judge_request, judge_scores, parse_judge_reply
from .scores import (
    AnswerDistribution,
    ExecutionTrace,
    MetricVector,
    MetricsManifest,
    QualityLabel,
    TraceSample,
    answer_entropy,
    label,
    mutual_information,
    nll_from_logprobs,
    stability_from_embeddings,
    trace_entropy,
)

__all__ = [
    "AnswerDistribution",
    "CANDIDATE_METRICS",
    "CORE_METRICS",
    "EstimatorSettings",
    "ExecutionTrace",
    "MetricVector",
    "MetricsManifest",
    "PairMeasurement",
    "QualityLabel",
    "SCHEMA_KINDS",
    "SchemaRegistry",
    "TaskSchema",
    "TraceSample",
    "answer_entropy",
    "canonicalize_answer",
    "execution_request",
    "judge_request",
    "judge_scores",
    "label",
    "measure_candidate",
    "mi_score",
    "mutual_information",
    "nll_from_logprobs",
    "nll_score",
    "parse_judge_reply",
    "query_entropy",
    "run_trace",
    "stability_from_embeddings",
    "stability_score",
    "trace_entropy",
]
