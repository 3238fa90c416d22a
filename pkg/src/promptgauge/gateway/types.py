"""Request/response types for the model gateway."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

Message = tuple[str, str]  # (role, text)
TokenLogprob = tuple[str, float]


@dataclass(frozen=True)
class GenerationRequest:
    context_messages: tuple[Message, ...]
    temperature: float = 0.0
    n_samples: int = 1
    max_tokens: int = 512
    want_logprobs: bool = False

    def __post_init__(self):
        if not self.context_messages:
            raise ValueError("context_messages must be non-empty")
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.max_tokens < 1:
            raise ValueError("max_tokens must be >= 1")
        # allow lists for convenience, store hashable tuples
        object.__setattr__(
            self, "context_messages", tuple((r, t) for r, t in self.context_messages)
        )

    def payload(self) -> dict:
        """Canonical dict used for cache keys and transport."""
        return {
            "messages": [[r, t] for r, t in self.context_messages],
            "temperature": self.temperature,
            "max_tokens": self.max_tokens,
            "want_logprobs": self.want_logprobs,
        }


@dataclass(frozen=True)
class Sample:
    text: str
    logprobs: tuple[TokenLogprob, ...] | None = None


@dataclass
class GenerationResult:
    samples: list[Sample]
    backend_id: str
    cached: bool = False


@dataclass
class EmbeddingVector:
    values: np.ndarray
    model_id: str

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 1:
            raise ValueError("embedding must be a flat vector")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("embedding entries must be finite")

    @property
    def dimension(self) -> int:
        return int(self.values.shape[0])


@dataclass
class CallCounters:
    """Per-gateway call accounting, used by execution-freedom checks."""

    generate_calls: int = 0
    logprob_calls: int = 0
    embed_calls: int = 0
    network_requests: int = 0
    cache_hits: int = 0
    prompt_tokens: int = 0
    completion_tokens: int = 0
    estimated_tokens: bool = False

    def snapshot(self) -> dict:
        return dict(self.__dict__)


@dataclass
class BackendUsage:
    """Token usage attached to a backend response, when the API reports it."""

    prompt_tokens: int = 0
    completion_tokens: int = 0
    estimated: bool = False

    @staticmethod
    def estimate(prompt_text: str, completion_text: str) -> "BackendUsage":
        # 4 chars/token heuristic, flagged as estimated
        return BackendUsage(
            prompt_tokens=max(1, len(prompt_text) // 4),
            completion_tokens=max(1, len(completion_text) // 4),
            estimated=True,
        )


@dataclass
class BackendResponse:
    samples: list[Sample] = field(default_factory=list)
    usage: BackendUsage = field(default_factory=BackendUsage)
