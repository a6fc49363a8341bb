"""Text-to-vector encoding and cosine similarity.

Queries, model profiles and dataset profiles are all embedded with the same
encoder so their vectors live in one comparable space.  The default encoder
hashes character n-grams into a fixed number of buckets: it needs no network,
no weights, and is deterministic across processes and platforms, while still
being robust to typos (a one-character edit only perturbs the few n-grams
that cross it).
"""

from __future__ import annotations

import hashlib
import re
from typing import Protocol

import numpy as np

from .errors import DimensionMismatch, EmptyText

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


class Encoder(Protocol):
    """Anything that maps text to a unit vector of a fixed dimension."""

    dimension: int

    def encode(self, text: str) -> np.ndarray: ...


class HashNgramEncoder:
    """Hashed character n-gram encoder.

    Pipeline: lowercase, strip punctuation to spaces, take character n-grams
    (sizes ``ngram_min..ngram_max``) of each whitespace token, hash each gram
    into one of ``dimension`` buckets with a seeded keyed hash, weight by term
    frequency, L2-normalize.  Tokens shorter than ``ngram_min`` count as a
    single gram so inputs like "y" or "19" still embed.
    """

    def __init__(self, dimension: int = 256, seed: int = 1, ngram_min: int = 3, ngram_max: int = 5):
        if dimension <= 0:
            raise ValueError("dimension must be positive")
        if not (1 <= ngram_min <= ngram_max):
            raise ValueError("need 1 <= ngram_min <= ngram_max")
        self.dimension = dimension
        self.seed = seed
        self.ngram_min = ngram_min
        self.ngram_max = ngram_max
        self._key = seed.to_bytes(8, "little", signed=True)

    def _bucket(self, gram: str) -> int:
        digest = hashlib.blake2b(gram.encode("utf-8"), digest_size=8, key=self._key).digest()
        return int.from_bytes(digest, "little") % self.dimension

    def grams(self, text: str) -> list[str]:
        """All n-grams fed to the hasher, in extraction order."""
        out: list[str] = []
        for token in _TOKEN_RE.findall(text.lower()):
            if len(token) < self.ngram_min:
                out.append(token)
                continue
            for n in range(self.ngram_min, self.ngram_max + 1):
                out.extend(token[i : i + n] for i in range(len(token) - n + 1))
        return out

    def buckets(self, text: str) -> set[int]:
        """Distinct hash buckets touched by the text (used by tests)."""
        return {self._bucket(g) for g in self.grams(text)}

    def encode(self, text: str) -> np.ndarray:
        grams = self.grams(text)
        if not grams:
            raise EmptyText("no alphanumeric content to embed")
        vec = np.zeros(self.dimension, dtype=np.float64)
        for gram in grams:
            vec[self._bucket(gram)] += 1.0
        return vec / np.linalg.norm(vec)


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity dot(a,b)/(|a||b|); plain dot product for unit vectors."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionMismatch(f"embedding dimensions differ: {a.shape} vs {b.shape}")
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise DimensionMismatch("cosine undefined for zero vectors")
    return float(np.dot(a, b) / (na * nb))
