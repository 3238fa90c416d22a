"""Instruction scaffolding for every LLM-facing call the pipeline makes.

Single source of truth for message construction: the corpus builder, the
judge, the diagnosers and the rewriter all assemble their requests here, so
tests (and the scripted backend) can reproduce requests byte-for-byte. All
templates demand sentinel-delimited output; the parsers in the calling
modules require those sentinels.

Defaults can be overridden through the run config; see harness.config.
"""

from __future__ import annotations

Message = tuple[str, str]

# Canonical metric order. Index order doubles as the tie-break order for
# attribution rankings.
CORE_METRICS: tuple[str, ...] = (
    "nll_score",
    "stability_score",
    "mi_score",
    "query_entropy",
)

# Full candidate set scored during the selection stage.
CANDIDATE_METRICS: tuple[str, ...] = CORE_METRICS + (
    "prompt_entropy",
    "clarity",
    "coherence",
    "specificity",
)

# Closed per-metric failure taxonomies used by the diagnosers. Tags outside
# these sets are dropped by the diagnosis parser.
FAILURE_TAXONOMY: dict[str, tuple[str, ...]] = {
    "nll_score": (
        "instruction_conflict",
        "noisy_or_long_preambles",
        "few_shot_inconsistency",
        "task_mismatch",
    ),
    "stability_score": (
        "unspecified_output_format",
        "conflicting_objectives",
        "unconstrained_reasoning_paths",
        "missing_guiding_example",
    ),
    "mi_score": (
        "hollow_templates",
        "stylistic_noise",
        "missing_schemas",
    ),
    "query_entropy": (
        "ambiguity_or_missing_assumptions",
        "lack_of_reasoning_structure",
        "missing_domain_context",
        "unconstrained_output_space",
    ),
}

# Sentinels. Instructions ask the model to emit them; parsers require them.
SEGMENT_1 = "<<<SEGMENT_1>>>"
SEGMENT_2 = "<<<SEGMENT_2>>>"
TEXT_OPEN = "<<<TEXT>>>"
TEXT_CLOSE = "<<<END_TEXT>>>"
REWRITTEN_PROMPT_OPEN = "<<<REWRITTEN_PROMPT>>>"
REWRITTEN_PROMPT_CLOSE = "<<<END_REWRITTEN_PROMPT>>>"
CLARIFICATIONS_OPEN = "<<<QUERY_CLARIFICATIONS>>>"
CLARIFICATIONS_CLOSE = "<<<END_QUERY_CLARIFICATIONS>>>"

# What each quality dimension measures, in plain words. Used by the fixed
# evaluator prefix and by the diagnoser instructions.
METRIC_DEFINITIONS: dict[str, str] = {
    "nll_score": (
        "mean negative log-likelihood of the gold answer when the model is "
        "forced to produce it given the prompt and query; lower means the "
        "prompt concentrates the model on the correct answer"
    ),
    "stability_score": (
        "one minus the mean pairwise cosine distance between embeddings of "
        "repeated responses; higher means answers barely vary across samples"
    ),
    "mi_score": (
        "reduction in answer-distribution entropy when the prompt is added "
        "to the bare query; higher means the prompt actually steers the model"
    ),
    "query_entropy": (
        "entropy of the answer distribution for the bare query with no "
        "prompt; higher means the query itself is ambiguous or hard"
    ),
}

DEFAULT_EVALUATOR_PREFIX = (
    "You assess whether a system prompt will make a model answer a given "
    "query correctly. Judge the pair on four dimensions. "
    + " ".join(f"{name}: {text}." for name, text in METRIC_DEFINITIONS.items())
)

# Instructions handed to the generator model for each of the six prompt
# styles. Keyed by style tag.
STYLE_INSTRUCTIONS: dict[str, str] = {
    "step_by_step": (
        "a prompt that walks the model through an explicit ordered sequence "
        "of reasoning steps ending in a single stated answer"
    ),
    "expert_discussion": (
        "a prompt that stages a panel of domain experts who reason in turns, "
        "challenge each other, and converge on one answer"
    ),
    "socratic": (
        "a prompt that makes the model interrogate its own assumptions with "
        "successive probing questions before committing to an answer"
    ),
    "creative": (
        "a prompt that encourages an analogy or unusual framing of the "
        "problem while still requiring a precise final answer"
    ),
    "verification": (
        "a prompt that has the model draft an answer, then check it against "
        "every constraint in the question and revise before answering"
    ),
    "contrastive": (
        "a prompt that makes the model lay out competing hypotheses, argue "
        "each one, and eliminate all but the best-supported answer"
    ),
}


def _fence(text: str) -> str:
    return f"{TEXT_OPEN}\n{text}\n{TEXT_CLOSE}"


def execution_messages(prompt_text: str | None, query_text: str) -> tuple[Message, ...]:
    """Prompt rides in the system slot; bare queries get no system message."""
    if prompt_text:
        return (("system", prompt_text), ("user", query_text))
    return (("user", query_text),)


def style_messages(style: str, query_text: str, instruction: str | None = None) -> tuple[Message, ...]:
    what = instruction or STYLE_INSTRUCTIONS[style]
    text = (
        f"Write one system prompt for the question below. The prompt must be {what}. "
        "Reply with the prompt text only, no preamble.\n"
        f"Style: {style}\n"
        f"Question:\n{_fence(query_text)}"
    )
    return (("user", text),)


def decompose_messages(prompt_text: str) -> tuple[Message, ...]:
    text = (
        "Split the prompt below into exactly two self-contained segments at "
        "its main semantic boundary. Reply with exactly:\n"
        f"{SEGMENT_1} <first segment> {SEGMENT_2} <second segment>\n"
        f"Prompt:\n{_fence(prompt_text)}"
    )
    return (("user", text),)


def rephrase_messages(text: str) -> tuple[Message, ...]:
    body = (
        "Rephrase the prompt below so it reads as one fluent instruction. "
        "Keep every requirement; do not add new ones. Reply with the "
        "rephrased prompt only.\n"
        f"Prompt:\n{_fence(text)}"
    )
    return (("user", body),)


def judge_messages(query_text: str, prompt_text: str) -> tuple[Message, ...]:
    text = (
        "Rate the prompt below for the given query on three dimensions, "
        "each an integer from 1 to 10. Reply with exactly one line:\n"
        "clarity: <n>, coherence: <n>, specificity: <n>\n"
        f"Query:\n{_fence(query_text)}\n"
        f"Prompt:\n{_fence(prompt_text)}"
    )
    return (("user", text),)


def diagnose_messages(metric: str, query_text: str, prompt_text: str) -> tuple[Message, ...]:
    tags = FAILURE_TAXONOMY[metric]
    text = (
        f"The prompt below scores poorly on {metric} "
        f"({METRIC_DEFINITIONS[metric]}).\n"
        f"Failure taxonomy for {metric}: {', '.join(tags)}.\n"
        "Identify which taxonomy issues apply and propose one concrete edit "
        "per issue. Reply with one line per issue, exactly:\n"
        "ISSUE: <taxonomy_tag> | SUGGESTION: <concrete edit>\n"
        "Reply NONE if no issue applies.\n"
        f"Query:\n{_fence(query_text)}\n"
        f"Prompt:\n{_fence(prompt_text)}"
    )
    return (("user", text),)


def rewrite_messages(
    query_text: str,
    prompt_text: str,
    prompt_suggestions: list[str],
    query_suggestions: list[str],
) -> tuple[Message, ...]:
    parts = [
        "Revise the prompt/query pair below by applying the edit "
        "suggestions, changing nothing else."
    ]
    if prompt_suggestions:
        parts.append(
            "Prompt edits:\n" + "\n".join(f"- {s}" for s in prompt_suggestions)
        )
        parts.append(
            f"Emit the revised prompt between {REWRITTEN_PROMPT_OPEN} and "
            f"{REWRITTEN_PROMPT_CLOSE}."
        )
    if query_suggestions:
        parts.append(
            "Query-side fixes (produce minimal clarifying sentences to append "
            "to the query; never restate or alter the query itself):\n"
            + "\n".join(f"- {s}" for s in query_suggestions)
        )
        parts.append(
            f"Emit only the clarifying sentences between {CLARIFICATIONS_OPEN} "
            f"and {CLARIFICATIONS_CLOSE}."
        )
    parts.append(f"Query:\n{_fence(query_text)}")
    parts.append(f"Prompt:\n{_fence(prompt_text)}")
    return (("user", "\n".join(parts)),)


def evaluator_input_text(prefix: str, query_text: str, prompt_text: str) -> str:
    """Concatenation fed to the frozen encoder, with fixed separators."""
    return f"{prefix}\n\n[QUERY]\n{query_text}\n\n[PROMPT]\n{prompt_text}"
