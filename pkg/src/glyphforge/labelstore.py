"""Append-only, crash-safe label store: one JSON record per line, replayed at
open. Later records for the same (page, box) supersede earlier ones."""
from __future__ import annotations

import hashlib
import json
import os
import time

from .errors import InvalidLetter, StorageError
from .raster import BinaryRaster, BoundingBox

LETTERS = "abcdefghijklmnopqrstuvwxyz"
SCHEMA_VERSION = 1


def glyph_hash(image: BinaryRaster) -> str:
    return hashlib.sha256(image.bits.tobytes() + bytes(image.bits.shape)).hexdigest()[:16]


class LabelStore:
    """Single-writer append log. Every append is flushed and fsynced before
    the call returns, so an acknowledged record survives a crash."""

    def __init__(self, path):
        self.path = str(path)
        self.records: list[dict] = []
        self._active: dict[tuple, int] = {}  # (page, box tuple) -> record index
        if os.path.exists(self.path):
            self._replay()

    def _replay(self) -> None:
        with open(self.path) as f:
            for line in f:
                line = line.strip()
                if not line:
                    continue
                try:
                    rec = json.loads(line)
                except json.JSONDecodeError:
                    # torn tail write from a crash: ignore the partial line
                    continue
                self._index(rec)

    def _index(self, rec: dict) -> None:
        self.records.append(rec)
        self._active[(rec["page"], tuple(rec["box"]))] = len(self.records) - 1

    def append(self, page_id: str, box: BoundingBox, letter: str, content_hash: str = "",
               annotator: str = "anon") -> int:
        if len(letter) != 1 or letter not in LETTERS:
            raise InvalidLetter(f"letter must be a-z, got {letter!r}")
        rec = {
            "v": SCHEMA_VERSION,
            "page": page_id,
            "box": box.as_list(),
            "letter": letter,
            "hash": content_hash,
            "ts": time.time(),
            "who": annotator,
        }
        try:
            with open(self.path, "a+b") as f:
                if f.tell() > 0:
                    # a torn tail from a crash has no newline; do not glue onto it
                    f.seek(-1, os.SEEK_END)
                    if f.read(1) != b"\n":
                        f.write(b"\n")
                f.write((json.dumps(rec, sort_keys=True) + "\n").encode())
                f.flush()
                os.fsync(f.fileno())
        except OSError as e:
            raise StorageError(f"cannot append to {self.path}: {e}") from e
        self._index(rec)
        return len(self.records) - 1

    def active_records(self) -> list[dict]:
        """Latest record per (page, box), in first-labeled order."""
        idxs = sorted(self._active.values())
        return [self.records[i] for i in idxs]

    def __len__(self) -> int:
        return len(self.records)
