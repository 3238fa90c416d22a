"""Execution-derived quality scores.

The math lives in pure functions over traces, token logprobs and embedding
matrices; gateway-wired wrappers sit in collect.py. All entropies are in
nats. The mutual-information estimate is a plug-in difference of entropies
and may legitimately come out slightly negative; it is reported as-is.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from ..errors import DegenerateTrace, InvalidDistribution, ZeroVector
from ..gateway.types import TokenLogprob


@dataclass(frozen=True)
class TraceSample:
    raw_text: str
    canonical_answer: str
    is_correct: bool


@dataclass
class ExecutionTrace:
    query_id: str
    prompt_id: str  # empty for prompt-free traces
    samples: list[TraceSample]
    temperature: float

    def __post_init__(self):
        if not self.samples:
            raise DegenerateTrace("a trace needs at least one sample")

    @property
    def n(self) -> int:
        return len(self.samples)

    def canonical_answers(self) -> list[str]:
        return [s.canonical_answer for s in self.samples]


@dataclass
class AnswerDistribution:
    support: list[str]
    probs: np.ndarray

    def __post_init__(self):
        self.probs = np.asarray(self.probs, dtype=np.float64)
        if len(self.support) != len(set(self.support)):
            raise InvalidDistribution("support entries must be unique")
        if len(self.support) != self.probs.shape[0]:
            raise InvalidDistribution("support and probs length mismatch")
        if np.any(self.probs < 0):
            raise InvalidDistribution("negative probability")
        if abs(float(self.probs.sum()) - 1.0) > 1e-9:
            raise InvalidDistribution("probabilities must sum to 1")

    @staticmethod
    def from_answers(answers: list[str]) -> "AnswerDistribution":
        counts = Counter(answers)
        support = sorted(counts)
        total = len(answers)
        probs = np.array([counts[a] / total for a in support])
        return AnswerDistribution(support=support, probs=probs)


@dataclass(frozen=True)
class QualityLabel:
    mean_accuracy: float
    is_good: bool

    @staticmethod
    def from_trace(trace: ExecutionTrace) -> "QualityLabel":
        accuracy = sum(s.is_correct for s in trace.samples) / trace.n
        return QualityLabel(mean_accuracy=accuracy, is_good=accuracy > 0.5)


def label(trace: ExecutionTrace) -> QualityLabel:
    return QualityLabel.from_trace(trace)


def answer_entropy(dist: AnswerDistribution) -> float:
    p = dist.probs[dist.probs > 0.0]
    return float(-(p * np.log(p)).sum())


def trace_entropy(trace: ExecutionTrace) -> float:
    return answer_entropy(AnswerDistribution.from_answers(trace.canonical_answers()))


def mutual_information(prompt_free: AnswerDistribution, with_prompt: AnswerDistribution) -> float:
    return answer_entropy(prompt_free) - answer_entropy(with_prompt)


def nll_from_logprobs(pairs: list[TokenLogprob]) -> float:
    if not pairs:
        raise DegenerateTrace("no tokens to score")
    return float(np.mean([-lp for _, lp in pairs]))


def stability_from_embeddings(vectors: np.ndarray) -> float:
    vectors = np.asarray(vectors, dtype=np.float64)
    n = vectors.shape[0]
    if n < 2:
        raise DegenerateTrace("stability needs at least two samples")
    norms = np.linalg.norm(vectors, axis=1)
    if np.any(norms == 0.0):
        raise ZeroVector("an embedding has zero norm")
    unit = vectors / norms[:, None]
    cosines = np.clip(unit @ unit.T, -1.0, 1.0)
    iu = np.triu_indices(n, k=1)
    mean_distance = float(np.mean(1.0 - cosines[iu]))
    return 1.0 - mean_distance


@dataclass
class MetricVector:
    nll_score: float
    stability_score: float
    mi_score: float
    query_entropy: float
    prompt_entropy: float | None = None
    clarity: float | None = None
    coherence: float | None = None
    specificity: float | None = None

    def __post_init__(self):
        if self.nll_score < 0:
            raise ValueError("nll_score must be >= 0")
        if not -1.0 - 1e-9 <= self.stability_score <= 1.0 + 1e-9:
            raise ValueError("stability_score must lie in [-1, 1]")
        if self.query_entropy < 0 or (self.prompt_entropy is not None and self.prompt_entropy < 0):
            raise ValueError("entropies must be >= 0")
        for name in ("clarity", "coherence", "specificity"):
            value = getattr(self, name)
            if value is not None and not 1 <= value <= 10:
                raise ValueError(f"{name} must lie in [1, 10]")

    def core_array(self) -> np.ndarray:
        return np.array(
            [self.nll_score, self.stability_score, self.mi_score, self.query_entropy]
        )

    def as_dict(self) -> dict:
        return {k: v for k, v in self.__dict__.items()}


@dataclass
class MetricsManifest:
    """Estimator provenance recorded next to persisted metric files."""

    n_samples: int
    temperature: float
    embedding_backend_id: str
    extra: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "n_samples": self.n_samples,
            "temperature": self.temperature,
            "embedding_backend_id": self.embedding_backend_id,
            **self.extra,
        }
