"""Pick the performance-reflective metric subset from gain importance."""

from __future__ import annotations

import logging

from ..metrics import CANDIDATE_METRICS
from .features import EMBEDDING_PREFIX
from .gbdt import GainImportance

log = logging.getLogger(__name__)

SELECTION_THRESHOLD = 0.10


def aggregate_embedding_importance(
    importance: GainImportance, prefix: str = EMBEDDING_PREFIX, group_name: str = "embedding"
) -> GainImportance:
    """Collapse per-dimension embedding columns into one reported group."""
    totals: dict[str, float] = {}
    shares: dict[str, float] = {}
    for name in importance.total_gain:
        target = group_name if name.startswith(prefix) else name
        totals[target] = totals.get(target, 0.0) + importance.total_gain[name]
        shares[target] = shares.get(target, 0.0) + importance.shares[name]
    return GainImportance(total_gain=totals, shares=shares)


def select_metrics(
    importance: GainImportance,
    threshold: float = SELECTION_THRESHOLD,
    candidates: tuple[str, ...] = CANDIDATE_METRICS,
) -> list[str]:
    """Candidate metrics whose gain share strictly exceeds the threshold.

    Embedding columns are reported but never selectable. Returned in
    descending share order.
    """
    scored = [(importance.shares.get(m, 0.0), m) for m in candidates]
    passing = [(s, m) for s, m in scored if s > threshold]
    passing.sort(key=lambda pair: (-pair[0], candidates.index(pair[1])))
    return [m for _, m in passing]


def select_with_fallback(
    importance: GainImportance,
    threshold: float = SELECTION_THRESHOLD,
    k: int = 4,
    candidates: tuple[str, ...] = CANDIDATE_METRICS,
) -> tuple[list[str], bool]:
    """select_metrics, falling back to the top-k metrics when nothing passes."""
    selected = select_metrics(importance, threshold, candidates)
    if selected:
        return selected, False
    scored = sorted(
        ((importance.shares.get(m, 0.0), m) for m in candidates),
        key=lambda pair: (-pair[0], candidates.index(pair[1])),
    )
    fallback = [m for _, m in scored[:k]]
    log.warning("no metric cleared the %.0f%% threshold; falling back to top-%d %s",
                threshold * 100, k, fallback)
    return fallback, True


def importance_table(importance: GainImportance) -> str:
    lines = [f"{'feature':<20} {'gain':>12} {'share':>8}"]
    ranked = sorted(importance.shares.items(), key=lambda kv: -kv[1])
    for name, share in ranked:
        lines.append(f"{name:<20} {importance.total_gain[name]:>12.4f} {share:>8.4f}")
    return "\n".join(lines)
