"""Content-addressed result cache.

Entries are JSON files named by the hash of (descriptor, operation,
version, params). Writes go to a temporary file in the same directory and
are renamed into place, so readers never see a partial entry. Skew
morphism payloads are re-validated on load.
"""
from __future__ import annotations

from dataclasses import dataclass
import hashlib
import json
import os
from pathlib import Path
import tempfile
import time

from . import errors
from .group import FiniteGroup
from .skew import SkewMorphism, from_certificate

ENV_VAR = "SKEWPROD_CACHE_DIR"
VERSION = "0.1.0"


def default_cache_dir() -> Path:
    env = os.environ.get(ENV_VAR)
    if env:
        return Path(env)
    return Path(os.environ.get("XDG_CACHE_HOME", Path.home() / ".cache")) / "skewprod"


def cache_key(descriptor: str, operation: str, params: dict | None = None, version: str = VERSION) -> str:
    blob = json.dumps({"descriptor": descriptor, "operation": operation, "params": params or {},
                       "version": version}, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


@dataclass
class CacheEntry:
    key: str
    descriptor: str
    operation: str
    payload: object
    created_at: float
    version: str = VERSION

    def to_json(self) -> str:
        return json.dumps({"key": self.key, "descriptor": self.descriptor, "operation": self.operation,
                           "payload": self.payload, "created_at": self.created_at,
                           "version": self.version}, sort_keys=True, separators=(",", ":"))


class ResultCache:
    def __init__(self, root: str | os.PathLike | None = None):
        self.root = Path(root) if root is not None else default_cache_dir()

    def path(self, key: str) -> Path:
        return self.root / key[:2] / f"{key}.json"

    def store(self, descriptor: str, operation: str, payload, params: dict | None = None) -> CacheEntry:
        key = cache_key(descriptor, operation, params)
        entry = CacheEntry(key, descriptor, operation, payload, time.time())
        p = self.path(key)
        p.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=p.parent, prefix=".tmp-", suffix=".json")
        try:
            with os.fdopen(fd, "w") as fh:
                fh.write(entry.to_json())
            os.replace(tmp, p)
        except BaseException:
            Path(tmp).unlink(missing_ok=True)
            raise
        return entry

    def load(self, descriptor: str, operation: str, params: dict | None = None) -> CacheEntry | None:
        key = cache_key(descriptor, operation, params)
        p = self.path(key)
        if not p.exists():
            return None
        try:
            raw = json.loads(p.read_text())
        except (OSError, json.JSONDecodeError):
            return None
        if raw.get("key") != key or raw.get("version") != VERSION:
            return None
        return CacheEntry(raw["key"], raw["descriptor"], raw["operation"], raw["payload"],
                          raw["created_at"], raw["version"])

    def store_morphisms(self, G: FiniteGroup, morphisms: list[SkewMorphism], params: dict | None = None):
        return self.store(G.descriptor, "enumerate", [s.certificate() for s in morphisms], params)

    def load_morphisms(self, G: FiniteGroup, params: dict | None = None) -> list[SkewMorphism] | None:
        """Cached morphisms of G, each re-validated; None on a miss."""
        entry = self.load(G.descriptor, "enumerate", params)
        if entry is None:
            return None
        try:
            return [from_certificate(c, group=G) for c in entry.payload]
        except errors.SkewError:
            return None
