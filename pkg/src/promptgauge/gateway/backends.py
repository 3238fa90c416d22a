"""Transport backends: live OpenAI-compatible HTTP and a scripted simulator.

Backends are pure transport. Caching, sample addressing, retries-with-cache
interplay, rate limiting and counters all live in client.Gateway.
"""

from __future__ import annotations

import hashlib
import os
import re
import time
from typing import Protocol

import numpy as np

from .. import prompts
from ..errors import NetworkFailure, UnsupportedCapability
from .cache import canonical_json
from .types import (
    BackendResponse,
    BackendUsage,
    GenerationRequest,
    Message,
    Sample,
    TokenLogprob,
)


class Backend(Protocol):
    backend_id: str
    supports_scoring: bool
    embed_dimension: int
    embed_model_id: str

    def generate(self, req: GenerationRequest, sample_indices: list[int]) -> BackendResponse: ...

    def forced_logprobs(self, context: tuple[Message, ...], target: str) -> list[TokenLogprob]: ...

    def embed(self, text: str) -> np.ndarray: ...


def tokenize_keep_whitespace(text: str) -> list[str]:
    """Greedy word+trailing-space pieces; concatenation reconstructs text."""
    return re.findall(r"\S+\s*|\s+", text)


class HTTPBackend:
    """OpenAI-compatible chat/completions/embeddings endpoint.

    Teacher-forced scoring uses the legacy completions endpoint with
    echo+logprobs; backends without one must be configured with
    supports_scoring=False so callers get UnsupportedCapability instead of
    garbage.
    """

    def __init__(
        self,
        base_url: str,
        model: str,
        embed_model: str = "text-embedding-3-large",
        embed_dimension: int = 3072,
        scoring_model: str | None = None,
        api_key_env: str = "PROMPTGAUGE_API_KEY",
        timeout: float = 60.0,
        max_attempts: int = 3,
        backoff_start: float = 1.0,
    ):
        import httpx

        self.base_url = base_url.rstrip("/")
        self.model = model
        self.embed_model_id = embed_model
        self.embed_dimension = embed_dimension
        self.scoring_model = scoring_model or model
        self.supports_scoring = scoring_model is not None
        self.backend_id = f"http/{model}"
        self.max_attempts = max_attempts
        self.backoff_start = backoff_start
        api_key = os.getenv(api_key_env, "")
        headers = {"Authorization": f"Bearer {api_key}"} if api_key else {}
        self._client = httpx.Client(base_url=self.base_url, headers=headers, timeout=timeout)

    def _post(self, path: str, payload: dict) -> dict:
        import httpx

        delay = self.backoff_start
        last_error: Exception | None = None
        for attempt in range(self.max_attempts):
            try:
                resp = self._client.post(path, json=payload)
                if resp.status_code // 100 == 2:
                    return resp.json()
                last_error = NetworkFailure(f"{path} returned {resp.status_code}: {resp.text[:200]}")
            except httpx.HTTPError as exc:
                last_error = exc
            if attempt + 1 < self.max_attempts:
                time.sleep(delay)
                delay *= 2
        raise NetworkFailure(f"{path} failed after {self.max_attempts} attempts") from last_error

    def generate(self, req: GenerationRequest, sample_indices: list[int]) -> BackendResponse:
        payload = {
            "model": self.model,
            "messages": [{"role": r, "content": t} for r, t in req.context_messages],
            "temperature": req.temperature,
            "n": len(sample_indices),
            "max_tokens": req.max_tokens,
        }
        if req.want_logprobs:
            payload["logprobs"] = True
        data = self._post("/chat/completions", payload)
        samples = []
        for choice in data["choices"]:
            text = choice["message"]["content"] or ""
            logprobs = None
            lp_block = (choice.get("logprobs") or {}).get("content")
            if lp_block:
                logprobs = tuple((item["token"], float(item["logprob"])) for item in lp_block)
            samples.append(Sample(text=text, logprobs=logprobs))
        return BackendResponse(samples=samples, usage=self._usage(data, payload, samples))

    def forced_logprobs(self, context: tuple[Message, ...], target: str) -> list[TokenLogprob]:
        if not self.supports_scoring:
            raise UnsupportedCapability(
                "backend has no scoring endpoint; configure scoring_model"
            )
        context_text = "\n\n".join(text for _, text in context) + "\n\n"
        payload = {
            "model": self.scoring_model,
            "prompt": context_text + target,
            "max_tokens": 0,
            "echo": True,
            "logprobs": 0,
        }
        data = self._post("/completions", payload)
        lp = data["choices"][0]["logprobs"]
        tokens = lp["tokens"]
        token_logprobs = lp["token_logprobs"]
        offsets = lp["text_offset"]
        cut = len(context_text)
        out: list[TokenLogprob] = []
        for token, logprob, offset in zip(tokens, token_logprobs, offsets):
            if offset >= cut:
                out.append((token, float(logprob if logprob is not None else 0.0)))
        return out

    def embed(self, text: str) -> np.ndarray:
        data = self._post("/embeddings", {"model": self.embed_model_id, "input": text})
        return np.asarray(data["data"][0]["embedding"], dtype=np.float64)

    def _usage(self, data: dict, payload: dict, samples: list[Sample]) -> BackendUsage:
        usage = data.get("usage")
        if usage:
            return BackendUsage(
                prompt_tokens=int(usage.get("prompt_tokens", 0)),
                completion_tokens=int(usage.get("completion_tokens", 0)),
            )
        prompt_text = canonical_json(payload)
        completion = "".join(s.text for s in samples)
        return BackendUsage.estimate(prompt_text, completion)


# Marker words that raise the simulated answer quality of a prompt.
_QUALITY_MARKERS = ("step", "verify", "check", "expert", "final answer", "format")

_WORD_PARITY_RE = re.compile(r"word '(\w+)'", re.IGNORECASE)
_OPTION_RE = re.compile(r"\(([a-e])\)\s*([^()]+?)(?=\s*\([a-e]\)|\s*$)", re.IGNORECASE)
_PICK_RE = re.compile(r"option contains the word '(\w+)'", re.IGNORECASE)


class ScriptedBackend:
    """Deterministic offline backend for fixtures, demos and replay capture.

    Answers are derived from content hashes, so identical requests always
    produce identical responses. Structured requests (decomposition, judge,
    diagnosis, rewrite) are recognized by the sentinel format their
    instructions demand; plain requests are treated as task executions
    against the bundled toy tasks, answered correctly with a probability
    that grows with how well-structured the system prompt is.
    """

    def __init__(self, seed: int = 0, embed_dimension: int = 32, backend_id: str = "scripted/sim-1"):
        self.seed = seed
        self.embed_dimension = embed_dimension
        self.backend_id = backend_id
        self.embed_model_id = f"{backend_id}/embed-{embed_dimension}"
        self.supports_scoring = True

    # hashing helpers -----------------------------------------------------

    def _digest(self, *parts) -> int:
        body = canonical_json([self.seed, *parts])
        return int.from_bytes(hashlib.sha256(body.encode("utf-8")).digest()[:8], "big")

    def _fraction(self, *parts) -> float:
        return self._digest(*parts) / float(1 << 64)

    # scripted responses --------------------------------------------------

    def generate(self, req: GenerationRequest, sample_indices: list[int]) -> BackendResponse:
        last = req.context_messages[-1][1]
        system = next((t for r, t in req.context_messages if r == "system"), None)
        samples = [
            Sample(text=self._respond(last, system, req, idx)) for idx in sample_indices
        ]
        prompt_text = "".join(t for _, t in req.context_messages)
        usage = BackendUsage.estimate(prompt_text, "".join(s.text for s in samples))
        return BackendResponse(samples=samples, usage=usage)

    def _payload(self, text: str) -> str:
        match = re.search(
            re.escape(prompts.TEXT_OPEN) + r"\n(.*?)\n" + re.escape(prompts.TEXT_CLOSE),
            text,
            re.DOTALL,
        )
        return match.group(1) if match else text

    def _payloads(self, text: str) -> list[str]:
        return re.findall(
            re.escape(prompts.TEXT_OPEN) + r"\n(.*?)\n" + re.escape(prompts.TEXT_CLOSE),
            text,
            re.DOTALL,
        )

    def _respond(self, last: str, system: str | None, req: GenerationRequest, idx: int) -> str:
        if prompts.SEGMENT_1 in last:
            return self._decompose(self._payload(last))
        if "clarity:" in last and "specificity:" in last:
            return self._judge(last)
        if "ISSUE:" in last and "taxonomy" in last:
            return self._diagnose(last)
        if prompts.REWRITTEN_PROMPT_OPEN in last or prompts.CLARIFICATIONS_OPEN in last:
            return self._rewrite(last)
        if "Rephrase the prompt" in last:
            return self._payload(last)
        if "Write one system prompt" in last:
            return self._styled(last)
        return self._execute(last, system, req, idx)

    def _decompose(self, payload: str) -> str:
        words = payload.split()
        cut = max(1, len(words) // 2)
        first, second = " ".join(words[:cut]), " ".join(words[cut:]) or "and conclude"
        return f"{prompts.SEGMENT_1} {first} {prompts.SEGMENT_2} {second}"

    def _judge(self, last: str) -> str:
        query, prompt = (self._payloads(last) + ["", ""])[:2]
        scores = [1 + self._digest("judge", axis, query, prompt) % 10 for axis in range(3)]
        return f"clarity: {scores[0]}, coherence: {scores[1]}, specificity: {scores[2]}"

    def _diagnose(self, last: str) -> str:
        match = re.search(r"Failure taxonomy for (\w+):", last)
        metric = match.group(1) if match else "nll_score"
        tags = prompts.FAILURE_TAXONOMY.get(metric, prompts.FAILURE_TAXONOMY["nll_score"])
        tag = tags[self._digest("diag", metric, last) % len(tags)]
        return f"ISSUE: {tag} | SUGGESTION: tighten the prompt to address {tag.replace('_', ' ')}"

    def _rewrite(self, last: str) -> str:
        blocks = self._payloads(last)
        prompt = blocks[-1] if blocks else ""
        parts = []
        if prompts.REWRITTEN_PROMPT_OPEN in last:
            improved = (
                f"{prompt} State the result as 'Final answer:' followed by the answer only."
            )
            parts.append(
                f"{prompts.REWRITTEN_PROMPT_OPEN}\n{improved}\n{prompts.REWRITTEN_PROMPT_CLOSE}"
            )
        if prompts.CLARIFICATIONS_OPEN in last:
            parts.append(
                f"{prompts.CLARIFICATIONS_OPEN}\nTreat every statement as exact and "
                f"answer in the requested format.\n{prompts.CLARIFICATIONS_CLOSE}"
            )
        return "\n".join(parts)

    def _styled(self, last: str) -> str:
        style_match = re.search(r"Style: (\w+)", last)
        style = style_match.group(1) if style_match else "step_by_step"
        question = self._payload(last)
        h = self._digest("style", style, question) % 1000
        flavor = {
            "step_by_step": "Work through the problem step by step and verify each step",
            "expert_discussion": "Let three experts debate the problem step by step",
            "socratic": "Question every assumption before you answer",
            "creative": "Reframe the problem with an analogy before solving it",
            "verification": "Draft an answer, then check it against the question",
            "contrastive": "Compare rival answers and keep the consistent one",
        }.get(style, "Reason carefully")
        return f"{flavor}, then give the final answer. (variant {h:03d})"

    # toy task execution ---------------------------------------------------

    def _prompt_quality(self, system: str | None) -> float:
        if not system:
            return 0.45
        lowered = system.lower()
        hits = sum(1 for marker in _QUALITY_MARKERS if marker in lowered)
        return min(0.9, 0.3 + 0.12 * hits)

    def _solve(self, query: str) -> tuple[str, list[str]] | None:
        """Return (gold answer, wrong alternatives) for a toy query."""
        parity = _WORD_PARITY_RE.search(query)
        if parity and "even" in query.lower():
            answer = "yes" if len(parity.group(1)) % 2 == 0 else "no"
            return answer, ["no" if answer == "yes" else "yes"]
        pick = _PICK_RE.search(query)
        if pick:
            needle = pick.group(1).lower()
            options = _OPTION_RE.findall(query)
            gold = None
            letters = []
            for letter, body in options:
                letters.append(letter.lower())
                if needle in body.lower():
                    gold = letter.lower()
            if gold is not None:
                return gold, [l for l in letters if l != gold]
        return None

    def _execute(self, query: str, system: str | None, req: GenerationRequest, idx: int) -> str:
        solved = self._solve(query)
        quality = self._prompt_quality(system)
        draw = self._fraction("exec", query, system or "", req.temperature, idx)
        if solved is None:
            return "Final answer: unknown"
        gold, wrong = solved
        if req.temperature == 0.0 or draw < quality:
            return f"I check the question carefully. Final answer: {gold}"
        alt = wrong[self._digest("alt", query, idx) % len(wrong)] if wrong else gold
        return f"I check the question carefully. Final answer: {alt}"

    def forced_logprobs(self, context: tuple[Message, ...], target: str) -> list[TokenLogprob]:
        system = next((t for r, t in context if r == "system"), None)
        quality = self._prompt_quality(system)
        context_body = canonical_json([[r, t] for r, t in context])
        out = []
        for i, token in enumerate(tokenize_keep_whitespace(target)):
            noise = self._fraction("lp", context_body, token, i)
            out.append((token, -(0.02 + 0.9 * (1.0 - quality) * noise)))
        return out

    def embed(self, text: str) -> np.ndarray:
        rng = np.random.default_rng(self._digest("embed", text))
        vec = rng.standard_normal(self.embed_dimension)
        return vec / np.linalg.norm(vec)
