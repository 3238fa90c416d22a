"""Content-addressed disk cache for backend responses.

One JSON file per record, named by the sha256 of the canonical request
serialization. Keys are computed from sorted-key JSON, so they are stable
under field reordering. Writes go through a temp file + rename and a lock,
so concurrent readers are always safe and writers are serialized.

A replay store is this same layout opened read-only.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
import time
from pathlib import Path
from typing import Any


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def cache_key(backend_id: str, kind: str, payload: dict, sample_index: int = 0) -> str:
    body = canonical_json(
        {
            "backend_id": backend_id,
            "kind": kind,
            "request": payload,
            "sample_index": sample_index,
        }
    )
    return hashlib.sha256(body.encode("utf-8")).hexdigest()


class ResponseCache:
    def __init__(self, directory: str | Path, read_only: bool = False):
        self.directory = Path(directory)
        self.read_only = read_only
        if not read_only:
            self.directory.mkdir(parents=True, exist_ok=True)
        self._write_lock = threading.Lock()

    def _path(self, key: str) -> Path:
        return self.directory / f"{key}.json"

    def load(self, key: str) -> Any | None:
        path = self._path(key)
        try:
            with open(path, encoding="utf-8") as fh:
                record = json.load(fh)
        except FileNotFoundError:
            return None
        return record["value"]

    def store(self, key: str, value: Any) -> None:
        if self.read_only:
            raise PermissionError("cache opened read-only")
        record = {"key": key, "value": value, "created_at": time.time()}
        path = self._path(key)
        tmp = path.with_suffix(f".tmp{os.getpid()}")
        with self._write_lock:
            with open(tmp, "w", encoding="utf-8") as fh:
                json.dump(record, fh, sort_keys=True)
            os.replace(tmp, path)

    def __contains__(self, key: str) -> bool:
        return self._path(key).exists()

    def __len__(self) -> int:
        return sum(1 for _ in self.directory.glob("*.json"))
