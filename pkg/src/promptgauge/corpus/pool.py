"""Prompt pool construction: static templates, styled generations, recombination.

Candidate ids are deterministic (query id + source + name/index) and pool
assembly is order-stable, so a fixed seed plus a replay store reproduces the
pool file byte-for-byte.
"""

from __future__ import annotations

import random
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .. import prompts
from ..errors import DecompositionFailure, GenerationFailure, PromptGaugeError
from ..gateway import Gateway, GenerationRequest
from .templates import TemplateRegistry

STYLE_TAGS: tuple[str, ...] = (
    "step_by_step",
    "expert_discussion",
    "socratic",
    "creative",
    "verification",
    "contrastive",
)

STYLE_MAX_TOKENS = 256
RECOMBINE_MAX_TOKENS = 256


@dataclass(frozen=True)
class Query:
    id: str
    text: str
    gold_answer: str
    task: str
    split: str = "train"


@dataclass(frozen=True)
class StaticTemplate:
    name: str
    kind: str = field(default="static", init=False)


@dataclass(frozen=True)
class LLMStyle:
    style: str
    kind: str = field(default="styled", init=False)


@dataclass(frozen=True)
class Recombination:
    parent_a_id: str
    parent_b_id: str
    kind: str = field(default="recombined", init=False)


Source = StaticTemplate | LLMStyle | Recombination

_SOURCE_ORDER = {"static": 0, "styled": 1, "recombined": 2}


@dataclass(frozen=True)
class PromptCandidate:
    id: str
    query_id: str
    text: str
    source: Source
    generation_temperature: float = 0.0

    def to_record(self) -> dict:
        record = {
            "id": self.id,
            "query_id": self.query_id,
            "text": self.text,
            "generation_temperature": self.generation_temperature,
            "source": {"kind": self.source.kind},
        }
        if isinstance(self.source, StaticTemplate):
            record["source"]["name"] = self.source.name
        elif isinstance(self.source, LLMStyle):
            record["source"]["style"] = self.source.style
        else:
            record["source"]["parent_a_id"] = self.source.parent_a_id
            record["source"]["parent_b_id"] = self.source.parent_b_id
        return record

    @staticmethod
    def from_record(record: dict) -> "PromptCandidate":
        src = record["source"]
        source: Source
        if src["kind"] == "static":
            source = StaticTemplate(src["name"])
        elif src["kind"] == "styled":
            source = LLMStyle(src["style"])
        else:
            source = Recombination(src["parent_a_id"], src["parent_b_id"])
        return PromptCandidate(
            id=record["id"],
            query_id=record["query_id"],
            text=record["text"],
            source=source,
            generation_temperature=float(record.get("generation_temperature", 0.0)),
        )


# request builders (shared with tests so fixtures can be primed exactly) ----


def styled_request(query_text: str, style: str, temperature: float = 1.0) -> GenerationRequest:
    return GenerationRequest(
        context_messages=prompts.style_messages(style, query_text),
        temperature=temperature,
        n_samples=1,
        max_tokens=STYLE_MAX_TOKENS,
    )


def decompose_request(prompt_text: str) -> GenerationRequest:
    return GenerationRequest(
        context_messages=prompts.decompose_messages(prompt_text),
        temperature=0.0,
        n_samples=1,
        max_tokens=RECOMBINE_MAX_TOKENS,
    )


def rephrase_request(text: str) -> GenerationRequest:
    return GenerationRequest(
        context_messages=prompts.rephrase_messages(text),
        temperature=0.0,
        n_samples=1,
        max_tokens=RECOMBINE_MAX_TOKENS,
    )


# operations -----------------------------------------------------------------


def generate_static(query: Query, registry: TemplateRegistry) -> list[PromptCandidate]:
    registry.require_nonempty()
    return [
        PromptCandidate(
            id=f"{query.id}/static/{name}",
            query_id=query.id,
            text=registry[name],
            source=StaticTemplate(name),
        )
        for name in registry.names()
    ]


def generate_styled(
    query: Query,
    style: str,
    gateway: Gateway,
    temperature: float = 1.0,
) -> PromptCandidate:
    if style not in STYLE_TAGS:
        raise ValueError(f"unknown style tag: {style}")
    result = gateway.generate(styled_request(query.text, style, temperature))
    text = result.samples[0].text.strip()
    if not text:
        raise GenerationFailure(f"style generation returned empty output ({style})")
    return PromptCandidate(
        id=f"{query.id}/style/{style}",
        query_id=query.id,
        text=text,
        source=LLMStyle(style),
        generation_temperature=temperature,
    )


_SEGMENT_RE = re.compile(
    re.escape(prompts.SEGMENT_1) + r"(.*?)" + re.escape(prompts.SEGMENT_2) + r"(.*)",
    re.DOTALL,
)


def parse_segments(text: str) -> tuple[str, str]:
    match = _SEGMENT_RE.search(text)
    if not match:
        raise DecompositionFailure("decomposition output lacks both segment markers")
    first, second = match.group(1).strip(), match.group(2).strip()
    if not first or not second:
        raise DecompositionFailure("decomposition produced an empty segment")
    return first, second


def recombine(
    parent_a: PromptCandidate,
    parent_b: PromptCandidate,
    gateway: Gateway,
    rng: random.Random,
    candidate_id: str | None = None,
    log: list[dict] | None = None,
) -> PromptCandidate:
    if parent_a.id == parent_b.id:
        raise ValueError("recombination parents must differ")
    seg_a = parse_segments(gateway.generate(decompose_request(parent_a.text)).samples[0].text)
    seg_b = parse_segments(gateway.generate(decompose_request(parent_b.text)).samples[0].text)
    # cross pairing chosen by the seeded rng: head of one parent, tail of the other
    if rng.random() < 0.5:
        pairing, combined = "a1+b2", f"{seg_a[0]} {seg_b[1]}"
    else:
        pairing, combined = "a2+b1", f"{seg_b[0]} {seg_a[1]}"
    rephrased = gateway.generate(rephrase_request(combined)).samples[0].text.strip()
    if not rephrased:
        raise GenerationFailure("rephrase step returned empty output")
    cid = candidate_id or f"{parent_a.query_id}/recomb/{parent_a.id.split('/')[-1]}x{parent_b.id.split('/')[-1]}"
    if log is not None:
        log.append(
            {
                "event": "recombine",
                "candidate_id": cid,
                "parent_a": parent_a.id,
                "parent_b": parent_b.id,
                "segments_a": list(seg_a),
                "segments_b": list(seg_b),
                "pairing": pairing,
                "combined": combined,
                "rephrased": rephrased,
            }
        )
    return PromptCandidate(
        id=cid,
        query_id=parent_a.query_id,
        text=rephrased,
        source=Recombination(parent_a.id, parent_b.id),
    )


@dataclass
class PoolConfig:
    styles: tuple[str, ...] = STYLE_TAGS
    n_recombinations: int = 4
    style_temperature: float = 1.0
    extra_templates: dict[str, str] = field(default_factory=dict)
    workers: int = 1


@dataclass
class PoolResult:
    candidates: list[PromptCandidate]
    run_log: list[dict]
    failures: list[dict]


def _pool_for_query(
    query: Query, config: PoolConfig, registry: TemplateRegistry, gateway: Gateway, seed: int
) -> tuple[list[PromptCandidate], list[dict], list[dict]]:
    candidates: list[PromptCandidate] = []
    log: list[dict] = []
    failures: list[dict] = []
    candidates.extend(generate_static(query, registry))
    for style in config.styles:
        try:
            candidates.append(generate_styled(query, style, gateway, config.style_temperature))
        except PromptGaugeError as exc:
            failures.append({"query_id": query.id, "stage": f"style/{style}", "error": str(exc)})
    rng = random.Random(f"{seed}:{query.id}")
    parent_pool = list(candidates)
    for i in range(config.n_recombinations):
        if len(parent_pool) < 2:
            failures.append({"query_id": query.id, "stage": f"recomb/{i:03d}", "error": "not enough parents"})
            continue
        a, b = rng.sample(parent_pool, 2)
        try:
            candidates.append(
                recombine(a, b, gateway, rng, candidate_id=f"{query.id}/recomb/{i:03d}", log=log)
            )
        except PromptGaugeError as exc:
            failures.append({"query_id": query.id, "stage": f"recomb/{i:03d}", "error": str(exc)})
    return candidates, log, failures


def build_pool(
    queries: list[Query],
    config: PoolConfig,
    gateway: Gateway,
    seed: int,
    registry: TemplateRegistry | None = None,
) -> PoolResult:
    registry = registry or TemplateRegistry(extra=config.extra_templates)
    ordered = sorted(queries, key=lambda q: q.id)
    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            parts = list(
                pool.map(lambda q: _pool_for_query(q, config, registry, gateway, seed), ordered)
            )
    else:
        parts = [_pool_for_query(q, config, registry, gateway, seed) for q in ordered]
    candidates: list[PromptCandidate] = []
    run_log: list[dict] = []
    failures: list[dict] = []
    for cand, log, fail in parts:
        candidates.extend(cand)
        run_log.extend(log)
        failures.extend(fail)
    candidates.sort(key=lambda c: (c.query_id, _SOURCE_ORDER[c.source.kind], c.id))
    return PoolResult(candidates=candidates, run_log=run_log, failures=failures)
