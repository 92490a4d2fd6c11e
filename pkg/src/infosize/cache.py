"""On-disk memo of mechanism outcomes keyed by canonical problem key.

File layout (all integers big-endian)::

    b"ISRC" | u16 format version
    repeated records:
        u8 len | mechanism label (utf-8) | u16 len | canonical key | u8 n | n x i8 assignment

A file whose magic or version does not match is ignored and rewritten on save.
Entries are write-once: storing a different outcome under an existing key is
an error, since outcomes are pure functions of the problem.
"""

from __future__ import annotations

import os
import struct
import tempfile
from pathlib import Path

MAGIC = b"ISRC"
VERSION = 1
ENV_VAR = "INFOSIZE_CACHE_DIR"


class CacheConflict(RuntimeError):
    pass


def default_cache_path() -> Path | None:
    folder = os.environ.get(ENV_VAR)
    if not folder:
        return None
    return Path(folder) / f"outcomes-v{VERSION}.bin"


class ResultCache:
    def __init__(self, path: str | os.PathLike | None = None):
        self.path = Path(path) if path is not None else None
        self.entries: dict[tuple[str, bytes], tuple[int, ...]] = {}
        self.dirty = False
        self.stale = False  # a file existed but had another version
        if self.path is not None and self.path.exists():
            self._load()

    def _load(self) -> None:
        data = self.path.read_bytes()
        if data[:4] != MAGIC or len(data) < 6 or struct.unpack(">H", data[4:6])[0] != VERSION:
            self.stale = True
            return
        pos = 6
        try:
            while pos < len(data):
                (ml,) = struct.unpack_from(">B", data, pos)
                mech = data[pos + 1 : pos + 1 + ml].decode("utf-8")
                pos += 1 + ml
                (kl,) = struct.unpack_from(">H", data, pos)
                key = data[pos + 2 : pos + 2 + kl]
                pos += 2 + kl
                (n,) = struct.unpack_from(">B", data, pos)
                assign = struct.unpack_from(f">{n}b", data, pos + 1)
                pos += 1 + n
                self.entries[(mech, key)] = tuple(assign)
        except struct.error:
            # truncated tail from an interrupted write: keep what parsed cleanly
            self.dirty = True

    def get(self, mech: str, key: bytes) -> tuple[int, ...] | None:
        return self.entries.get((mech, key))

    def put(self, mech: str, key: bytes, assign) -> None:
        assign = tuple(int(x) for x in assign)
        old = self.entries.get((mech, key))
        if old is not None:
            if old != assign:
                raise CacheConflict(f"cached outcome for {mech} differs from the computed one")
            return
        self.entries[(mech, key)] = assign
        self.dirty = True

    def __len__(self) -> int:
        return len(self.entries)

    def save(self) -> None:
        if self.path is None or not (self.dirty or self.stale):
            return
        self.path.parent.mkdir(parents=True, exist_ok=True)
        chunks = [MAGIC, struct.pack(">H", VERSION)]
        for (mech, key), assign in sorted(self.entries.items()):
            label = mech.encode("utf-8")
            chunks.append(struct.pack(">B", len(label)) + label)
            chunks.append(struct.pack(">H", len(key)) + key)
            chunks.append(struct.pack(f">B{len(assign)}b", len(assign), *assign))
        fd, tmp = tempfile.mkstemp(dir=self.path.parent, prefix=".isrc-")
        with os.fdopen(fd, "wb") as fh:
            fh.write(b"".join(chunks))
        os.replace(tmp, self.path)
        self.dirty = self.stale = False
