"""Deterministic persistence for computed values.

A content-addressed, append-only store: one file per entry, named by the
hash of the key, holding the canonical text serialization of the value.
Entries never change; writing a different value for an existing key is a
hard error, because every cached computation here is deterministic and a
conflict means a bug, not a merge.  Entries written by a different tool
version are treated as absent.
"""

from __future__ import annotations

import hashlib
import os
import tempfile
from pathlib import Path

from . import __version__

__all__ = ["CacheError", "ConflictingEntry", "CorruptEntry", "Store"]

_HEADER = "cache v1"


class CacheError(RuntimeError):
    pass


class ConflictingEntry(CacheError):
    """A different value is already stored for this key."""


class CorruptEntry(CacheError):
    """Stored bytes do not match their recorded hash."""


def _value_hash(value: str) -> str:
    return hashlib.sha256(value.encode()).hexdigest()


class Store:
    """File-backed write-once key -> text mapping.

    Keys are single-line strings.  Writers place entries atomically, so
    concurrent processes may share a store; readers are lock-free.
    """

    def __init__(self, root: str | Path, version: str = __version__):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.version = version

    def _path(self, key: str) -> Path:
        digest = hashlib.sha256(key.encode()).hexdigest()
        return self.root / f"{digest[:40]}.entry"

    def put(self, key: str, value: str) -> None:
        if "\n" in key:
            raise ValueError("cache keys must be single-line strings")
        path = self._path(key)
        if path.exists():
            existing = self._read(path, key)
            if existing is not None:
                if existing != value:
                    raise ConflictingEntry(
                        f"key {key!r} already stored with a different value"
                    )
                return
        body = (
            f"{_HEADER}\n"
            f"tool {self.version}\n"
            f"key {key}\n"
            f"sha256 {_value_hash(value)}\n"
            f"--\n"
            f"{value}"
        )
        fd, tmp = tempfile.mkstemp(dir=self.root, suffix=".tmp")
        try:
            with os.fdopen(fd, "w") as fh:
                fh.write(body)
            os.replace(tmp, path)
        finally:
            if os.path.exists(tmp):
                os.unlink(tmp)

    def get(self, key: str) -> str | None:
        path = self._path(key)
        if not path.exists():
            return None
        return self._read(path, key)

    def _read(self, path: Path, key: str) -> str | None:
        text = path.read_text()
        head, sep, value = text.partition("\n--\n")
        if not sep:
            raise CorruptEntry(f"{path.name}: missing body separator")
        lines = head.splitlines()
        if len(lines) != 4 or lines[0] != _HEADER:
            raise CorruptEntry(f"{path.name}: bad header")
        tool = lines[1].removeprefix("tool ")
        stored_key = lines[2].removeprefix("key ")
        stated = lines[3].removeprefix("sha256 ")
        if stored_key != key:
            # hash-prefix collision of distinct keys; treat as absent
            return None
        if tool != self.version:
            return None
        if _value_hash(value) != stated:
            raise CorruptEntry(f"{path.name}: value hash mismatch")
        return value

    def keys(self) -> list[str]:
        """Keys of all readable entries for this tool version (sorted)."""
        out = []
        for path in sorted(self.root.glob("*.entry")):
            text = path.read_text()
            head, sep, value = text.partition("\n--\n")
            lines = head.splitlines()
            if not sep or len(lines) != 4 or lines[0] != _HEADER:
                continue
            if lines[1].removeprefix("tool ") != self.version:
                continue
            out.append(lines[2].removeprefix("key "))
        return sorted(out)
