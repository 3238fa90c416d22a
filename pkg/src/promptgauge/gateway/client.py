"""The gateway: cached, rate-limited access to generation, scoring, embeddings.

All model traffic in the pipeline goes through one Gateway so that
- every response is cached per sample index and can be replayed byte-for-byte,
- a replay store (the same cache, opened read-only, no backend) runs the whole
  pipeline with zero network calls,
- call counters make execution-freedom checkable.
"""

from __future__ import annotations

import json
import threading
import time
from pathlib import Path

import numpy as np

from ..errors import EmptyInput, ReplayMiss
from .backends import Backend
from .cache import ResponseCache, cache_key
from .types import (
    CallCounters,
    EmbeddingVector,
    GenerationRequest,
    GenerationResult,
    Message,
    Sample,
    TokenLogprob,
)

META_FILE = "_meta.json"


class TokenBucket:
    """Blocking token bucket; rate is requests/second."""

    def __init__(self, rate: float, capacity: float | None = None):
        self.rate = rate
        self.capacity = capacity if capacity is not None else max(1.0, rate)
        self._tokens = self.capacity
        self._stamp = time.monotonic()
        self._lock = threading.Lock()

    def acquire(self) -> None:
        while True:
            with self._lock:
                now = time.monotonic()
                self._tokens = min(self.capacity, self._tokens + (now - self._stamp) * self.rate)
                self._stamp = now
                if self._tokens >= 1.0:
                    self._tokens -= 1.0
                    return
                wait = (1.0 - self._tokens) / self.rate
            time.sleep(wait)


class Gateway:
    def __init__(
        self,
        backend: Backend | None,
        cache: ResponseCache | None = None,
        max_in_flight: int = 4,
        rate_per_second: float | None = None,
        replay_meta: dict | None = None,
    ):
        if backend is None and cache is None:
            raise ValueError("need a backend, a replay cache, or both")
        self.backend = backend
        self.cache = cache
        self.counters = CallCounters()
        self._limiter = threading.BoundedSemaphore(max_in_flight)
        self._bucket = TokenBucket(rate_per_second) if rate_per_second else None
        meta = replay_meta or {}
        self.backend_id: str = backend.backend_id if backend else meta["backend_id"]
        self.embed_model_id: str = backend.embed_model_id if backend else meta["embed_model_id"]
        self.supports_scoring: bool = (
            backend.supports_scoring if backend else meta.get("supports_scoring", True)
        )
        if backend is not None and cache is not None and not cache.read_only:
            self._write_meta()

    # construction helpers -------------------------------------------------

    @classmethod
    def replay(cls, store_dir: str | Path, **kwargs) -> "Gateway":
        """Open a recorded store read-only; any miss raises ReplayMiss."""
        store = Path(store_dir)
        meta = json.loads((store / META_FILE).read_text(encoding="utf-8"))
        cache = ResponseCache(store, read_only=True)
        return cls(backend=None, cache=cache, replay_meta=meta, **kwargs)

    def _write_meta(self) -> None:
        path = self.cache.directory / META_FILE
        meta = {
            "backend_id": self.backend_id,
            "embed_model_id": self.embed_model_id,
            "supports_scoring": self.supports_scoring,
        }
        path.write_text(json.dumps(meta, sort_keys=True), encoding="utf-8")

    # operations -----------------------------------------------------------

    def generate(self, req: GenerationRequest) -> GenerationResult:
        self.counters.generate_calls += 1
        keys = [
            cache_key(self.backend_id, "generate", req.payload(), i)
            for i in range(req.n_samples)
        ]
        values: list[dict | None] = [self.cache.load(k) if self.cache else None for k in keys]
        missing = [i for i, v in enumerate(values) if v is None]
        self.counters.cache_hits += req.n_samples - len(missing)
        if missing:
            response = self._network(lambda: self.backend.generate(req, missing), keys[missing[0]])
            for i, sample in zip(missing, response.samples):
                record = {
                    "text": sample.text,
                    "logprobs": [[t, lp] for t, lp in sample.logprobs] if sample.logprobs else None,
                }
                if self.cache:
                    self.cache.store(keys[i], record)
                values[i] = record
        samples = [
            Sample(
                text=v["text"],
                logprobs=tuple((t, min(float(lp), 0.0)) for t, lp in v["logprobs"])
                if v.get("logprobs")
                else None,
            )
            for v in values
        ]
        return GenerationResult(samples=samples, backend_id=self.backend_id, cached=not missing)

    def forced_logprobs(self, context: tuple[Message, ...], target: str) -> list[TokenLogprob]:
        self.counters.logprob_calls += 1
        context = tuple((r, t) for r, t in context)
        payload = {"messages": [[r, t] for r, t in context], "target": target}
        key = cache_key(self.backend_id, "logprobs", payload)
        value = self.cache.load(key) if self.cache else None
        if value is None:
            pairs = self._network(lambda: self.backend.forced_logprobs(context, target), key)
            value = {"logprobs": [[t, lp] for t, lp in pairs]}
            if self.cache:
                self.cache.store(key, value)
        else:
            self.counters.cache_hits += 1
        return [(t, min(float(lp), 0.0)) for t, lp in value["logprobs"]]

    def embed(self, text: str) -> EmbeddingVector:
        if not text:
            raise EmptyInput("cannot embed empty text")
        self.counters.embed_calls += 1
        payload = {"text": text, "model": self.embed_model_id}
        key = cache_key(self.backend_id, "embed", payload)
        value = self.cache.load(key) if self.cache else None
        if value is None:
            vec = self._network(lambda: self.backend.embed(text), key)
            value = {"values": np.asarray(vec, dtype=np.float64).tolist(), "model_id": self.embed_model_id}
            if self.cache:
                self.cache.store(key, value)
        else:
            self.counters.cache_hits += 1
        return EmbeddingVector(values=np.asarray(value["values"]), model_id=value["model_id"])

    # internals ------------------------------------------------------------

    def _network(self, call, key: str):
        if self.backend is None:
            raise ReplayMiss(f"replay store has no entry for key {key[:16]}…")
        with self._limiter:
            if self._bucket:
                self._bucket.acquire()
            result = call()
        self.counters.network_requests += 1
        usage = getattr(result, "usage", None)
        if usage is not None:
            self.counters.prompt_tokens += usage.prompt_tokens
            self.counters.completion_tokens += usage.completion_tokens
            self.counters.estimated_tokens |= usage.estimated
        return result
