"""Text similarity scorers in [0, 1]."""

from __future__ import annotations

import math
import threading

from somarena.backend.base import BackendError
from somarena.text import jaccard, tokens

__all__ = ["jaccard", "tokens", "similarity", "EmbeddingSimilarity"]


def similarity(text_a: str, text_b: str) -> float:
    """Default deterministic scorer: token Jaccard."""
    return jaccard(text_a, text_b)


class EmbeddingSimilarity:
    """Cosine similarity of backend embeddings, clipped to [0, 1].

    Falls back to token Jaccard when the embedding call fails.
    """

    def __init__(self, backend, model: str = "text-embedding-3-small"):
        self.backend = backend
        self.model = model
        self._cache: dict[str, list[float]] = {}
        self._lock = threading.Lock()

    def _vectors(self, texts: list[str]) -> list[list[float]]:
        with self._lock:
            todo = [t for t in dict.fromkeys(texts) if t not in self._cache]
        if todo:
            vecs = self.backend.embed(todo, model=self.model)
            with self._lock:
                self._cache.update(zip(todo, vecs))
        with self._lock:
            return [self._cache[t] for t in texts]

    def __call__(self, text_a: str, text_b: str) -> float:
        if not tokens(text_a) and not tokens(text_b):
            return 0.0
        if text_a == text_b:
            return 1.0
        try:
            a, b = self._vectors([text_a, text_b])
        except BackendError:
            return jaccard(text_a, text_b)
        na = math.sqrt(sum(x * x for x in a))
        nb = math.sqrt(sum(x * x for x in b))
        if na == 0 or nb == 0:
            return 0.0
        cos = sum(x * y for x, y in zip(a, b)) / (na * nb)
        return min(1.0, max(0.0, cos))
