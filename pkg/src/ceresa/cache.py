"""Persistent result cache: one JSON record per line, each carrying its own sha256.

Records are only ever appended; ``compact`` rewrites the file through a temporary
file and ``os.replace`` so a crash never leaves a half-written cache behind.
Lines whose checksum does not match are ignored (and so get recomputed).
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import tempfile
import time
from dataclasses import asdict, dataclass
from pathlib import Path

from .volume import VolumeResult

log = logging.getLogger(__name__)

ENV_VAR = "CERESA_CACHE_DIR"
CACHE_FILE = "results.jsonl"


def default_cache_dir() -> Path:
    base = os.environ.get("XDG_CACHE_HOME") or os.path.join(os.path.expanduser("~"), ".cache")
    return Path(base) / "ceresa"


def resolve_cache_dir(flag: str | os.PathLike | None = None) -> Path:
    """Flag beats environment beats default."""
    if flag:
        return Path(flag)
    env = os.environ.get(ENV_VAR)
    if env:
        return Path(env)
    return default_cache_dir()


@dataclass(frozen=True, order=True)
class CacheKey:
    N: int
    m: int
    k: int
    prec_bits: int
    method: str
    param_reading: str

    @classmethod
    def for_result(cls, r: VolumeResult) -> CacheKey:
        return cls(r.N, r.m, r.k, r.prec_bits, r.method, r.param_reading)

    def token(self) -> str:
        return f"{self.N}/{self.m}/{self.k}/{self.prec_bits}/{self.method}/{self.param_reading}"


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _digest(body: dict) -> str:
    return hashlib.sha256(canonical_json(body).encode()).hexdigest()


@dataclass
class CacheStats:
    path: str
    entries: int
    lines: int
    corrupted: int
    bytes: int


class ResultCache:
    def __init__(self, directory=None):
        self.directory = resolve_cache_dir(directory)
        self.path = self.directory / CACHE_FILE
        self._entries: dict[CacheKey, dict] = {}
        self._lines = 0
        self.corrupted = 0
        self._load()

    def _load(self) -> None:
        self._entries.clear()
        self._lines = self.corrupted = 0
        if not self.path.exists():
            return
        with self.path.open(encoding="utf-8", errors="replace") as fh:
            for lineno, line in enumerate(fh, 1):
                if not line.strip():
                    continue
                self._lines += 1
                rec = self._parse(line)
                if rec is None:
                    self.corrupted += 1
                    log.warning("cache %s: skipping corrupted line %d", self.path, lineno)
                    continue
                self._entries[CacheKey(**rec["key"])] = rec

    @staticmethod
    def _parse(line: str) -> dict | None:
        try:
            rec = json.loads(line)
            body = {k: rec[k] for k in ("key", "payload", "created_at", "elapsed")}
            if rec.get("sha256") != _digest(body):
                return None
            CacheKey(**rec["key"])
            VolumeResult.from_dict(rec["payload"])
        except (ValueError, KeyError, TypeError):
            return None
        return rec

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, key: CacheKey) -> bool:
        return key in self._entries

    def get(self, key: CacheKey) -> VolumeResult | None:
        rec = self._entries.get(key)
        if rec is None:
            return None
        result = VolumeResult.from_dict(rec["payload"])
        # elapsed lives beside the payload so payloads stay byte-stable
        object.__setattr__(result, "elapsed", rec["elapsed"])
        return result

    def put(self, result: VolumeResult) -> CacheKey:
        key = CacheKey.for_result(result)
        body = {
            "key": asdict(key),
            "payload": result.to_dict(),
            "created_at": round(time.time(), 3),
            "elapsed": round(result.elapsed, 6),
        }
        rec = dict(body, sha256=_digest(body))
        self.directory.mkdir(parents=True, exist_ok=True)
        with self.path.open("a", encoding="utf-8") as fh:
            fh.write(canonical_json(rec) + "\n")
            fh.flush()
            os.fsync(fh.fileno())
        self._entries[key] = rec
        self._lines += 1
        return key

    def compact(self) -> int:
        """Rewrite the file with one valid line per key; returns the number of lines dropped."""
        dropped = self._lines - len(self._entries)
        self.directory.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=self.directory, prefix=".results.", suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                for key in sorted(self._entries):
                    fh.write(canonical_json(self._entries[key]) + "\n")
                fh.flush()
                os.fsync(fh.fileno())
            os.replace(tmp, self.path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
        self._lines = len(self._entries)
        self.corrupted = 0
        return dropped

    def clear(self) -> int:
        n = len(self._entries)
        if self.path.exists():
            self.path.unlink()
        self._entries.clear()
        self._lines = self.corrupted = 0
        return n

    def stats(self) -> CacheStats:
        size = self.path.stat().st_size if self.path.exists() else 0
        return CacheStats(str(self.path), len(self._entries), self._lines, self.corrupted, size)


__all__ = ["ENV_VAR", "CacheKey", "CacheStats", "ResultCache", "resolve_cache_dir", "default_cache_dir"]
