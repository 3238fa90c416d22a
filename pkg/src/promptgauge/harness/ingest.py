"""Dataset ingestion: JSONL queries, validation, seeded split assignment."""

from __future__ import annotations

import json
import random
from pathlib import Path

from ..corpus import Query
from ..errors import ConfigError, DuplicateId, MalformedRecord

REQUIRED_FIELDS = ("id", "text", "gold_answer")


def read_query_file(path: str | Path, task: str) -> list[Query]:
    records: list[dict] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for line_number, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedRecord(f"line {line_number}: invalid JSON ({exc})", line_number)
            for fieldname in REQUIRED_FIELDS:
                if not record.get(fieldname):
                    raise MalformedRecord(
                        f"line {line_number}: missing or empty field '{fieldname}'", line_number
                    )
            if record["id"] in seen:
                raise DuplicateId(f"duplicate query id {record['id']!r} at line {line_number}")
            seen.add(record["id"])
            record.setdefault("task", task)
            records.append(record)
    return [
        Query(
            id=r["id"],
            text=r["text"],
            gold_answer=str(r["gold_answer"]),
            task=r["task"],
            split="train",
        )
        for r in records
    ]


def assign_splits(queries: list[Query], policy: str, seed: int) -> list[Query]:
    """Seeded shuffle, then 100/100 or half/half train-test assignment."""
    ordered = sorted(queries, key=lambda q: q.id)
    rng = random.Random(f"split:{seed}")
    rng.shuffle(ordered)
    if policy == "100/100":
        if len(ordered) < 200:
            raise ConfigError(
                f"100/100 split needs at least 200 records, got {len(ordered)}; use 50/50"
            )
        n_train, n_test = 100, 100
    else:
        n_train = len(ordered) // 2
        n_test = len(ordered) - n_train
    out = []
    for i, q in enumerate(ordered[: n_train + n_test]):
        split = "train" if i < n_train else "test"
        out.append(Query(id=q.id, text=q.text, gold_answer=q.gold_answer, task=q.task, split=split))
    out.sort(key=lambda q: q.id)
    return out


def ingest(specs: list, policy: str, seed: int) -> list[Query]:
    """Read every dataset spec and assign splits per task."""
    all_queries: list[Query] = []
    for spec in specs:
        task_queries = read_query_file(spec.path, spec.task)
        all_queries.extend(assign_splits(task_queries, policy, seed))
    ids = [q.id for q in all_queries]
    if len(ids) != len(set(ids)):
        raise DuplicateId("query ids collide across datasets")
    return all_queries
