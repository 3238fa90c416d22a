from ..prompts import FAILURE_TAXONOMY
from .attribution import Attribution, attribute, attribution_from_h
from .loop import (
    MAX_ITERATIONS,
    NO_IMPROVEMENT,
    PASSED_THRESHOLD,
    IterationRecord,
    OptimizationTrace,
    optimize,
)
from .revision import (
    Diagnosis,
    PROMPT_SIDE_METRICS,
    QUERY_SIDE_METRICS,
    diagnose,
    diagnose_request,
    parse_diagnosis,
    rewrite,
    rewrite_request,
    split_suggestions,
)

__all__ = [
    "Attribution",
    "Diagnosis",
    "FAILURE_TAXONOMY",
    "IterationRecord",
    "MAX_ITERATIONS",
    "NO_IMPROVEMENT",
    "OptimizationTrace",
    "PASSED_THRESHOLD",
    "PROMPT_SIDE_METRICS",
    "QUERY_SIDE_METRICS",
    "attribute",
    "attribution_from_h",
    "diagnose",
    "diagnose_request",
    "optimize",
    "parse_diagnosis",
    "rewrite",
    "rewrite_request",
    "split_suggestions",
]
