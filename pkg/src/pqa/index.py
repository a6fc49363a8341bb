"""Exact top-k cosine retrieval over model and dataset profile embeddings.

The catalog holds on the order of hundreds of entities, so an exact linear
scan is both the cheapest implementation and the reference semantics: any
future approximate backend has to reproduce it at k=1.  Ties are broken by
ascending id to keep retrieval deterministic.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DimensionMismatch, FormatError, IoError

MAGIC = "PQAIDX1"

KIND_MODEL = "model"
KIND_DATASET = "dataset"
_KINDS = (KIND_MODEL, KIND_DATASET)


@dataclass(frozen=True)
class EntityRecord:
    id: str
    kind: str  # "model" | "dataset"
    embedding: np.ndarray
    profile_text: str


@dataclass(frozen=True)
class RetrievalHit:
    id: str
    kind: str
    score: float


class VectorIndex:
    """In-memory exact-scan index with save/load persistence.

    Thread contract: a single internal lock serializes mutations and snapshots
    reads, so ``top_k`` never observes a half-applied ``upsert``.
    """

    def __init__(self, dimension: int):
        if dimension <= 0:
            raise ValueError("dimension must be positive")
        self.dimension = dimension
        self._records: dict[tuple[str, str], EntityRecord] = {}
        self._lock = threading.Lock()
        # per-kind cached (ids, matrix), invalidated on mutation
        self._cache: dict[str, tuple[list[str], np.ndarray]] = {}

    def __len__(self) -> int:
        return len(self._records)

    def upsert(self, record: EntityRecord) -> None:
        emb = np.asarray(record.embedding, dtype=np.float64)
        if emb.shape != (self.dimension,):
            raise DimensionMismatch(
                f"record {record.id!r} has dimension {emb.shape}, index expects {self.dimension}"
            )
        if record.kind not in _KINDS:
            raise ValueError(f"unknown kind {record.kind!r}")
        with self._lock:
            self._records[(record.kind, record.id)] = EntityRecord(
                record.id, record.kind, emb, record.profile_text
            )
            self._cache.pop(record.kind, None)

    def remove(self, id: str, kind: str) -> bool:
        with self._lock:
            removed = self._records.pop((kind, id), None) is not None
            if removed:
                self._cache.pop(kind, None)
            return removed

    def get(self, id: str, kind: str) -> EntityRecord | None:
        with self._lock:
            return self._records.get((kind, id))

    def top_k(self, query: np.ndarray, kind: str, k: int) -> list[RetrievalHit]:
        if k < 1:
            raise ValueError("k must be >= 1")
        query = np.asarray(query, dtype=np.float64)
        if query.shape != (self.dimension,):
            raise DimensionMismatch(
                f"query has dimension {query.shape}, index expects {self.dimension}"
            )
        with self._lock:
            cached = self._cache.get(kind)
            if cached is None:
                ids = sorted(rid for (rkind, rid) in self._records if rkind == kind)
                matrix = (
                    np.stack([self._records[(kind, rid)].embedding for rid in ids])
                    if ids
                    else np.empty((0, self.dimension))
                )
                cached = (ids, matrix)
                self._cache[kind] = cached
        ids, matrix = cached
        if not ids:
            return []
        # stored embeddings are unit vectors, but normalizing keeps the score
        # an honest cosine even if a caller passes an unnormalized query
        scores = (matrix @ query) / (np.linalg.norm(matrix, axis=1) * np.linalg.norm(query))
        # ids are pre-sorted ascending, so a stable sort on -score realizes the tie-break
        order = np.argsort(-scores, kind="stable")[:k]
        return [RetrievalHit(ids[i], kind, float(scores[i])) for i in order]

    def save(self, path: str | Path) -> None:
        path = Path(path)
        with self._lock:
            records = [self._records[key] for key in sorted(self._records)]
            lines = [f"{MAGIC} {self.dimension} {len(records)}\n"]
            for rec in records:
                lines.append(
                    json.dumps(
                        {
                            "id": rec.id,
                            "kind": rec.kind,
                            "embedding": rec.embedding.tolist(),
                            "profile_text": rec.profile_text,
                        },
                        ensure_ascii=False,
                    )
                    + "\n"
                )
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            tmp = path.with_suffix(path.suffix + ".tmp")
            tmp.write_text("".join(lines), encoding="utf-8")
            tmp.replace(path)
        except OSError as exc:
            raise IoError(f"cannot write index file {path}: {exc}") from exc

    @classmethod
    def load(cls, path: str | Path) -> "VectorIndex":
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise IoError(f"cannot read index file {path}: {exc}") from exc
        lines = text.splitlines()
        if not lines:
            raise FormatError(f"{path}: empty index file")
        header = lines[0].split()
        if len(header) != 3 or header[0] != MAGIC:
            raise FormatError(f"{path}: bad magic/header {lines[0]!r}")
        try:
            dimension, count = int(header[1]), int(header[2])
        except ValueError as exc:
            raise FormatError(f"{path}: bad header numbers") from exc
        body = lines[1:]
        if len(body) != count:
            raise FormatError(f"{path}: expected {count} records, found {len(body)}")
        index = cls(dimension)
        for lineno, line in enumerate(body, start=2):
            try:
                obj = json.loads(line)
                rec = EntityRecord(
                    id=obj["id"],
                    kind=obj["kind"],
                    embedding=np.asarray(obj["embedding"], dtype=np.float64),
                    profile_text=obj["profile_text"],
                )
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise FormatError(f"{path}:{lineno}: bad record: {exc}") from exc
            index.upsert(rec)
        return index
