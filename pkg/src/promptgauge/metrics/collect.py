"""Gateway-wired measurement of (query, prompt) pairs.

Collects the with-prompt and prompt-free traces, scores them, and assembles
MetricVectors plus majority-vote quality labels. The with-prompt trace is
reused for stability, prompt entropy and the MI term, so one trace pays for
all three.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import prompts
from ..corpus.pool import PromptCandidate, Query
from ..gateway import Gateway, GenerationRequest
from .answers import TaskSchema, canonicalize_answer
from .judge import judge_scores
from .scores import (
    ExecutionTrace,
    MetricVector,
    QualityLabel,
    TraceSample,
    mutual_information,
    nll_from_logprobs,
    stability_from_embeddings,
    trace_entropy,
)
from .scores import AnswerDistribution


@dataclass(frozen=True)
class EstimatorSettings:
    n_samples: int = 10
    temperature: float = 0.7
    max_tokens: int = 256


def execution_request(
    prompt_text: str | None, query_text: str, settings: EstimatorSettings,
    n_samples: int | None = None, temperature: float | None = None,
) -> GenerationRequest:
    return GenerationRequest(
        context_messages=prompts.execution_messages(prompt_text, query_text),
        temperature=settings.temperature if temperature is None else temperature,
        n_samples=settings.n_samples if n_samples is None else n_samples,
        max_tokens=settings.max_tokens,
    )


def run_trace(
    gateway: Gateway,
    query: Query,
    schema: TaskSchema,
    settings: EstimatorSettings,
    prompt: PromptCandidate | None = None,
) -> ExecutionTrace:
    prompt_text = prompt.text if prompt else None
    result = gateway.generate(execution_request(prompt_text, query.text, settings))
    gold = canonicalize_answer(query.gold_answer, schema)
    samples = []
    for sample in result.samples:
        canonical = canonicalize_answer(sample.text, schema)
        samples.append(
            TraceSample(raw_text=sample.text, canonical_answer=canonical, is_correct=canonical == gold)
        )
    return ExecutionTrace(
        query_id=query.id,
        prompt_id=prompt.id if prompt else "",
        samples=samples,
        temperature=settings.temperature,
    )


def nll_score(gateway: Gateway, query: Query, prompt_text: str) -> float:
    context = prompts.execution_messages(prompt_text, query.text)
    return nll_from_logprobs(gateway.forced_logprobs(context, query.gold_answer))


def stability_score(gateway: Gateway, trace: ExecutionTrace) -> float:
    vectors = np.stack([gateway.embed(s.raw_text).values for s in trace.samples])
    return stability_from_embeddings(vectors)


def query_entropy(gateway_or_trace, query=None, schema=None, settings=None) -> float:
    """Entropy of the prompt-free answer distribution.

    Accepts either a ready prompt-free ExecutionTrace, or a gateway plus
    query/schema/settings to collect one.
    """
    if isinstance(gateway_or_trace, ExecutionTrace):
        return trace_entropy(gateway_or_trace)
    trace = run_trace(gateway_or_trace, query, schema, settings or EstimatorSettings())
    return trace_entropy(trace)


def mi_score(prompt_free_trace: ExecutionTrace, with_prompt_trace: ExecutionTrace) -> float:
    return mutual_information(
        AnswerDistribution.from_answers(prompt_free_trace.canonical_answers()),
        AnswerDistribution.from_answers(with_prompt_trace.canonical_answers()),
    )


@dataclass
class PairMeasurement:
    query_id: str
    prompt_id: str
    metrics: MetricVector
    quality: QualityLabel

    def as_record(self) -> dict:
        return {
            "query_id": self.query_id,
            "prompt_id": self.prompt_id,
            "metrics": self.metrics.as_dict(),
            "mean_accuracy": self.quality.mean_accuracy,
            "is_good": self.quality.is_good,
        }


def measure_candidate(
    gateway: Gateway,
    query: Query,
    candidate: PromptCandidate,
    schema: TaskSchema,
    settings: EstimatorSettings,
    prompt_free_trace: ExecutionTrace,
    with_judge: bool = True,
) -> tuple[PairMeasurement, ExecutionTrace]:
    trace = run_trace(gateway, query, schema, settings, prompt=candidate)
    judge = judge_scores(query.text, candidate.text, gateway) if with_judge else None
    metrics = MetricVector(
        nll_score=nll_score(gateway, query, candidate.text),
        stability_score=stability_score(gateway, trace),
        mi_score=mi_score(prompt_free_trace, trace),
        query_entropy=trace_entropy(prompt_free_trace),
        prompt_entropy=trace_entropy(trace),
        clarity=judge[0] if judge else None,
        coherence=judge[1] if judge else None,
        specificity=judge[2] if judge else None,
    )
    measurement = PairMeasurement(
        query_id=query.id,
        prompt_id=candidate.id,
        metrics=metrics,
        quality=QualityLabel.from_trace(trace),
    )
    return measurement, trace
