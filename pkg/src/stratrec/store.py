"""Embedded document store: one JSON file per record, atomic replace on write.

Desk-scale durability without external services.  Writers go through a
per-key temp file and ``os.replace`` so readers only ever see complete
documents; analysis records are append-only by convention (the service
never rewrites them).
"""

from __future__ import annotations

import json
import os
import tempfile
import threading
from pathlib import Path
from typing import Any, Iterator


class DocumentStore:
    def __init__(self, base_dir: str | Path):
        self.base_dir = Path(base_dir)
        self.base_dir.mkdir(parents=True, exist_ok=True)
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    def lock_for(self, collection: str, doc_id: str) -> threading.Lock:
        """Per-document lock; used to serialize scenario mutations."""
        key = f"{collection}/{doc_id}"
        with self._locks_guard:
            if key not in self._locks:
                self._locks[key] = threading.Lock()
            return self._locks[key]

    def _path(self, collection: str, doc_id: str) -> Path:
        safe = "".join(c if c.isalnum() or c in "-_." else "_" for c in str(doc_id))
        return self.base_dir / collection / f"{safe}.json"

    def put(self, collection: str, doc_id: str, document: dict) -> None:
        path = self._path(collection, doc_id)
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as handle:
                json.dump(document, handle, sort_keys=True)
            os.replace(tmp, path)
        except BaseException:
            try:
                os.unlink(tmp)
            except OSError:
                pass
            raise

    def get(self, collection: str, doc_id: str) -> dict | None:
        path = self._path(collection, doc_id)
        if not path.exists():
            return None
        return json.loads(path.read_text(encoding="utf-8"))

    def exists(self, collection: str, doc_id: str) -> bool:
        return self._path(collection, doc_id).exists()

    def ids(self, collection: str) -> list[str]:
        folder = self.base_dir / collection
        if not folder.exists():
            return []
        return sorted(p.stem for p in folder.glob("*.json"))

    def all(self, collection: str) -> Iterator[dict]:
        for doc_id in self.ids(collection):
            doc = self.get(collection, doc_id)
            if doc is not None:
                yield doc
