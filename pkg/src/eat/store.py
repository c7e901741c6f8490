"""Content-addressed fixture store used for LLM and HTTP record/replay.

One JSON file per digest: ``{"digest": ..., "request": ..., "reply": ...}``.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
import threading
from pathlib import Path


def canonical_json(obj) -> str:
    return json.dumps(obj, ensure_ascii=False, sort_keys=True, separators=(",", ":"))


def digest_of(obj) -> str:
    return hashlib.sha256(canonical_json(obj).encode("utf-8")).hexdigest()


class FixtureStore:
    def __init__(self, root, create=False):
        self.root = Path(root)
        if create:
            self.root.mkdir(parents=True, exist_ok=True)
        elif not self.root.is_dir():
            raise FileNotFoundError(f"fixture store {self.root} does not exist")
        self._lock = threading.Lock()

    def path_for(self, digest: str) -> Path:
        return self.root / f"{digest}.json"

    def __contains__(self, digest):
        return self.path_for(digest).exists()

    def __len__(self):
        return sum(1 for _ in self.root.glob("*.json"))

    def digests(self):
        return sorted(p.stem for p in self.root.glob("*.json"))

    def get(self, digest: str):
        """Return the stored record dict, or None."""
        path = self.path_for(digest)
        try:
            with open(path, encoding="utf-8") as f:
                return json.load(f)
        except FileNotFoundError:
            return None

    def put(self, digest: str, request, reply) -> bool:
        """Persist a record atomically. Returns False when it already existed."""
        record = {"digest": digest, "request": request, "reply": reply}
        payload = json.dumps(record, ensure_ascii=False, indent=2, sort_keys=True) + "\n"
        path = self.path_for(digest)
        with self._lock:
            if path.exists():
                return False
            fd, tmp = tempfile.mkstemp(dir=self.root, prefix=".tmp-", suffix=".json")
            try:
                with os.fdopen(fd, "w", encoding="utf-8") as f:
                    f.write(payload)
                os.replace(tmp, path)
            except BaseException:
                if os.path.exists(tmp):
                    os.unlink(tmp)
                raise
        return True
