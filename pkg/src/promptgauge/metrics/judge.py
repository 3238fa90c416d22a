"""LLM-judge scores for clarity, coherence and specificity (selection stage).

One judge call at temperature 0; an unparseable reply gets exactly one
reprompt, after which the scores are recorded as missing and the selection
stage imputes the training-set median.
"""

from __future__ import annotations

import logging
import re

from .. import prompts
from ..errors import ParseFailure
from ..gateway import Gateway, GenerationRequest

log = logging.getLogger(__name__)

JUDGE_MAX_TOKENS = 64

_SCORE_RE = re.compile(
    r"clarity:\s*(\d+)\s*,\s*coherence:\s*(\d+)\s*,\s*specificity:\s*(\d+)",
    re.IGNORECASE,
)

REPROMPT_NOTE = (
    "Your previous reply was not parseable. Reply with exactly one line: "
    "clarity: <n>, coherence: <n>, specificity: <n>"
)


def judge_request(query_text: str, prompt_text: str, reprompt: bool = False) -> GenerationRequest:
    messages = prompts.judge_messages(query_text, prompt_text)
    if reprompt:
        messages = messages + (("user", REPROMPT_NOTE),)
    return GenerationRequest(
        context_messages=messages, temperature=0.0, n_samples=1, max_tokens=JUDGE_MAX_TOKENS
    )


def parse_judge_reply(text: str) -> tuple[int, int, int]:
    match = _SCORE_RE.search(text)
    if not match:
        raise ParseFailure(f"judge reply not parseable: {text[:80]!r}")
    scores = tuple(int(g) for g in match.groups())
    if any(not 1 <= s <= 10 for s in scores):
        raise ParseFailure(f"judge score out of range: {scores}")
    return scores  # type: ignore[return-value]


def judge_scores(query_text: str, prompt_text: str, gateway: Gateway) -> tuple[int, int, int] | None:
    """Returns (clarity, coherence, specificity) or None when unparseable."""
    for reprompt in (False, True):
        reply = gateway.generate(judge_request(query_text, prompt_text, reprompt)).samples[0].text
        try:
            return parse_judge_reply(reply)
        except ParseFailure as exc:
            if reprompt:
                log.warning("judge scores missing after reprompt: %s", exc)
                return None
    return None
