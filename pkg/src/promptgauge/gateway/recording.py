"""Helpers for priming replay stores by hand.

Normal replay stores are just a live run's cache directory. These helpers
exist for tests and fixtures that want to pin exact responses without any
backend at all: they write records under the same keys the Gateway computes.
"""

from __future__ import annotations

import json
from pathlib import Path

from .cache import ResponseCache, cache_key
from .client import META_FILE
from .types import GenerationRequest, Message


def ensure_meta(
    store_dir: str | Path,
    backend_id: str,
    embed_model_id: str,
    supports_scoring: bool = True,
) -> ResponseCache:
    store = ResponseCache(store_dir)
    meta = {
        "backend_id": backend_id,
        "embed_model_id": embed_model_id,
        "supports_scoring": supports_scoring,
    }
    (store.directory / META_FILE).write_text(json.dumps(meta, sort_keys=True), encoding="utf-8")
    return store


def prime_generation(
    store: ResponseCache,
    backend_id: str,
    req: GenerationRequest,
    texts: list[str],
    logprobs: list[list[tuple[str, float]]] | None = None,
) -> None:
    for i, text in enumerate(texts):
        record = {
            "text": text,
            "logprobs": [[t, lp] for t, lp in logprobs[i]] if logprobs else None,
        }
        store.store(cache_key(backend_id, "generate", req.payload(), i), record)


def prime_logprobs(
    store: ResponseCache,
    backend_id: str,
    context: tuple[Message, ...],
    target: str,
    pairs: list[tuple[str, float]],
) -> None:
    payload = {"messages": [[r, t] for r, t in context], "target": target}
    store.store(
        cache_key(backend_id, "logprobs", payload),
        {"logprobs": [[t, lp] for t, lp in pairs]},
    )


def prime_embedding(
    store: ResponseCache,
    backend_id: str,
    embed_model_id: str,
    text: str,
    values: list[float],
) -> None:
    payload = {"text": text, "model": embed_model_id}
    store.store(
        cache_key(backend_id, "embed", payload),
        {"values": list(map(float, values)), "model_id": embed_model_id},
    )
