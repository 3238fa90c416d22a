"""promptgauge: execution-free prompt quality evaluation and optimization.

Builds diverse prompt pools, measures execution-grounded quality metrics,
selects the performance-reflective subset with a from-scratch boosted-tree
classifier, trains a text-only evaluator that predicts the metrics and the
pass probability, and closes the loop with gradient-attributed, metric-aware
prompt rewriting.
"""

__version__ = "0.1.0"

from . import corpus, errors, evaluator, gateway, harness, metrics, optimizer, selection

__all__ = [
    "__version__",
    "corpus",
    "errors",
    "evaluator",
    "gateway",
    "harness",
    "metrics",
    "optimizer",
    "selection",
]
