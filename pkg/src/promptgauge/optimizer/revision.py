"""Metric-specific diagnosis and the suggestion-driven rewrite step.

Diagnosers tag failure causes from the closed per-metric taxonomy and emit
one edit suggestion per issue. Rewrites route by metric: nll/stability/mi
suggestions edit the prompt, query-entropy suggestions only append minimal
clarifications to the query.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field

from .. import prompts
from ..errors import GenerationFailure, ParseFailure
from ..gateway import Gateway, GenerationRequest

log = logging.getLogger(__name__)

DIAGNOSE_MAX_TOKENS = 256
REWRITE_MAX_TOKENS = 512
REWRITE_TEMPERATURE = 0.3

PROMPT_SIDE_METRICS = ("nll_score", "stability_score", "mi_score")
QUERY_SIDE_METRICS = ("query_entropy",)

DIAGNOSE_REPROMPT_NOTE = (
    "Your previous reply was not parseable. Reply with one line per issue, "
    "exactly: ISSUE: <taxonomy_tag> | SUGGESTION: <concrete edit> "
    "(or the single word NONE)."
)


@dataclass
class Diagnosis:
    metric: str
    issues: list[str] = field(default_factory=list)
    suggestions: list[str] = field(default_factory=list)
    raw_judge_text: str = ""

    @property
    def is_empty(self) -> bool:
        return not self.suggestions

    def as_dict(self) -> dict:
        return {
            "metric": self.metric,
            "issues": list(self.issues),
            "suggestions": list(self.suggestions),
            "raw_judge_text": self.raw_judge_text,
        }


def diagnose_request(
    metric: str, query_text: str, prompt_text: str, reprompt: bool = False
) -> GenerationRequest:
    messages = prompts.diagnose_messages(metric, query_text, prompt_text)
    if reprompt:
        messages = messages + (("user", DIAGNOSE_REPROMPT_NOTE),)
    return GenerationRequest(
        context_messages=messages, temperature=0.0, n_samples=1, max_tokens=DIAGNOSE_MAX_TOKENS
    )


_ISSUE_LINE_RE = re.compile(r"ISSUE:\s*(\S+)\s*\|\s*SUGGESTION:\s*(.+)")


def parse_diagnosis(metric: str, text: str) -> tuple[list[str], list[str]]:
    if re.search(r"\bNONE\b", text):
        return [], []
    taxonomy = prompts.FAILURE_TAXONOMY[metric]
    issues: list[str] = []
    suggestions: list[str] = []
    matched = False
    for line in text.splitlines():
        found = _ISSUE_LINE_RE.search(line)
        if not found:
            continue
        matched = True
        tag, suggestion = found.group(1).strip().strip(","), found.group(2).strip()
        if tag in taxonomy:
            issues.append(tag)
        else:
            log.warning("diagnoser for %s emitted off-taxonomy tag %r; tag dropped", metric, tag)
        if suggestion:
            suggestions.append(suggestion)
    if not matched:
        raise ParseFailure(f"diagnosis reply for {metric} not parseable: {text[:80]!r}")
    return issues, suggestions


def diagnose(metric: str, query_text: str, prompt_text: str, gateway: Gateway) -> Diagnosis:
    for reprompt in (False, True):
        reply = gateway.generate(
            diagnose_request(metric, query_text, prompt_text, reprompt)
        ).samples[0].text
        try:
            issues, suggestions = parse_diagnosis(metric, reply)
            return Diagnosis(
                metric=metric, issues=issues, suggestions=suggestions, raw_judge_text=reply
            )
        except ParseFailure as exc:
            if reprompt:
                log.warning("diagnosis for %s unparseable after reprompt: %s", metric, exc)
                return Diagnosis(metric=metric, raw_judge_text=reply)
    return Diagnosis(metric=metric)


def split_suggestions(diagnoses: list[Diagnosis]) -> tuple[list[str], list[str]]:
    prompt_side: list[str] = []
    query_side: list[str] = []
    for diag in diagnoses:
        if diag.metric in QUERY_SIDE_METRICS:
            query_side.extend(diag.suggestions)
        else:
            prompt_side.extend(diag.suggestions)
    return prompt_side, query_side


def rewrite_request(
    query_text: str,
    prompt_text: str,
    prompt_suggestions: list[str],
    query_suggestions: list[str],
) -> GenerationRequest:
    return GenerationRequest(
        context_messages=prompts.rewrite_messages(
            query_text, prompt_text, prompt_suggestions, query_suggestions
        ),
        temperature=REWRITE_TEMPERATURE,
        n_samples=1,
        max_tokens=REWRITE_MAX_TOKENS,
    )


def _extract_block(text: str, open_tag: str, close_tag: str) -> str | None:
    match = re.search(re.escape(open_tag) + r"(.*?)" + re.escape(close_tag), text, re.DOTALL)
    return match.group(1).strip() if match else None


def rewrite(
    query_text: str,
    prompt_text: str,
    diagnoses: list[Diagnosis],
    gateway: Gateway,
) -> tuple[str, str]:
    """Apply aggregated suggestions; returns (new_prompt, new_query).

    The query-entropy route never touches the prompt, and the prompt-side
    routes never touch the query: that routing is enforced here, not left
    to the rewriting model.
    """
    prompt_suggestions, query_suggestions = split_suggestions(diagnoses)
    if not prompt_suggestions and not query_suggestions:
        raise ValueError("rewrite needs at least one non-empty diagnosis")
    reply = gateway.generate(
        rewrite_request(query_text, prompt_text, prompt_suggestions, query_suggestions)
    ).samples[0].text

    new_prompt = prompt_text
    if prompt_suggestions:
        block = _extract_block(
            reply, prompts.REWRITTEN_PROMPT_OPEN, prompts.REWRITTEN_PROMPT_CLOSE
        )
        if not block:
            raise GenerationFailure("rewrite reply lacks the revised prompt block")
        new_prompt = block

    new_query = query_text
    if query_suggestions:
        block = _extract_block(
            reply, prompts.CLARIFICATIONS_OPEN, prompts.CLARIFICATIONS_CLOSE
        )
        if not block:
            raise GenerationFailure("rewrite reply lacks the clarifications block")
        new_query = f"{query_text}\n\n{block}"

    if not new_prompt.strip() or not new_query.strip():
        raise GenerationFailure("rewrite produced an empty prompt or query")
    return new_prompt, new_query
