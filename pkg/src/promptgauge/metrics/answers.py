"""Answer canonicalization per task schema.

Extraction is deterministic and ordered: an explicit final-answer marker
wins, then the last schema-matching span in the text, then the whole
trimmed lowercased text. There is no failure mode; everything falls
through to the whole-text form.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

SCHEMA_KINDS = ("multiple_choice", "yes_no", "numeric", "exact_match")


@dataclass(frozen=True)
class TaskSchema:
    task: str
    kind: str
    choices: tuple[str, ...] = ("a", "b", "c", "d", "e")

    def __post_init__(self):
        if self.kind not in SCHEMA_KINDS:
            raise ValueError(f"unknown answer schema kind: {self.kind}")


class SchemaRegistry:
    def __init__(self, schemas: dict[str, str] | None = None):
        self._schemas: dict[str, TaskSchema] = {}
        for task, kind in (schemas or {}).items():
            self.register(TaskSchema(task=task, kind=kind))

    def register(self, schema: TaskSchema) -> None:
        self._schemas[schema.task] = schema

    def schema_for(self, task: str) -> TaskSchema:
        if task not in self._schemas:
            raise KeyError(f"no answer schema registered for task '{task}'")
        return self._schemas[task]

    def __contains__(self, task: str) -> bool:
        return task in self._schemas


_MARKER_RE = re.compile(r"(?:final answer|the answer is|answer)\s*[:\-]?\s*", re.IGNORECASE)
_PAREN_LETTER_RE = re.compile(r"\(([a-eA-E])\)")
_BARE_LETTER_RE = re.compile(r"(?<![\w(])([a-eA-E])(?![\w)])")
_YES_NO_RE = re.compile(r"\b(yes|no)\b", re.IGNORECASE)
_NUMBER_RE = re.compile(r"[-+]?\d+(?:\.\d+)?")


def _canonical_number(text: str) -> str:
    value = float(text)
    if value == int(value):
        return str(int(value))
    return repr(value)


def _whole_text_form(text: str) -> str:
    return re.sub(r"\s+", " ", text.strip().strip(".!?:;,'\"")).lower()


def _schema_match(snippet: str, schema: TaskSchema, last: bool) -> str | None:
    """First (or last) span in snippet matching the schema's answer shape."""
    if schema.kind == "multiple_choice":
        hits = _PAREN_LETTER_RE.findall(snippet)
        if not hits and not last:
            hits = _BARE_LETTER_RE.findall(snippet)
        if hits:
            return (hits[-1] if last else hits[0]).lower()
    elif schema.kind == "yes_no":
        hits = _YES_NO_RE.findall(snippet)
        if hits:
            return (hits[-1] if last else hits[0]).lower()
    elif schema.kind == "numeric":
        hits = _NUMBER_RE.findall(snippet)
        if hits:
            return _canonical_number(hits[-1] if last else hits[0])
    return None


def canonicalize_answer(raw_text: str, schema: TaskSchema) -> str:
    markers = list(_MARKER_RE.finditer(raw_text))
    if markers:
        snippet = raw_text[markers[-1].end() :]
        if schema.kind == "exact_match":
            form = _whole_text_form(snippet)
            if form:
                return form
        found = _schema_match(snippet, schema, last=False)
        if found is not None:
            return found
    found = _schema_match(raw_text, schema, last=True)
    if found is not None:
        return found
    return _whole_text_form(raw_text)
