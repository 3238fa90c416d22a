from .backends import Backend, HTTPBackend, ScriptedBackend, tokenize_keep_whitespace
from .cache import ResponseCache, cache_key, canonical_json
from .client import Gateway, TokenBucket
from .types import (
    BackendResponse,
    BackendUsage,
    CallCounters,
    EmbeddingVector,
    GenerationRequest,
    GenerationResult,
    Message,
    Sample,
    TokenLogprob,
)

__all__ = [
    "Backend",
    "BackendResponse",
    "BackendUsage",
    "CallCounters",
    "EmbeddingVector",
    "Gateway",
    "GenerationRequest",
    "GenerationResult",
    "HTTPBackend",
    "Message",
    "ResponseCache",
    "Sample",
    "ScriptedBackend",
    "TokenBucket",
    "TokenLogprob",
    "cache_key",
    "canonical_json",
    "tokenize_keep_whitespace",
]
