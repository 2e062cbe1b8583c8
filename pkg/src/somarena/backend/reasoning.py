"""Reflection, chain extraction and node matching on top of a backend."""

from __future__ import annotations

import logging
import re
from typing import Callable, Mapping, Optional, Sequence

from somarena.backend.base import Backend, BackendError
from somarena.backend.prompts import format_values, request
from somarena.scm.graph import ACTION_LABEL, CausalChain
from somarena.text import jaccard

log = logging.getLogger(__name__)

MAX_LABEL_LEN = 80
_ARROW = re.compile(r"\s*->\s*")
_BULLET = re.compile(r"^\s*(?:[-*•]|\d+[.)])\s*")


def reflect(
    history_summary: str,
    observation: Mapping[str, object],
    actual_action,
    backend: Backend,
    *,
    opponent: str = "",
    context: str = "",
) -> str:
    """Free-text hypothesis about the opponent's latent reasoning. Backend errors propagate."""
    if actual_action is None:
        raise ValueError("the opponent's actual action must be known")
    req = request(
        "reflect", "reflect", context=context, opponent=opponent,
        observation=format_values(observation), action=actual_action,
        history=history_summary or "(none)",
    )
    return backend.complete(req)


def parse_chains(text: str, observation_keys: Sequence[str]) -> list[CausalChain]:
    """Parse ``key -> label* -> ACTION`` lines, dropping anything malformed."""
    keys = set(observation_keys)
    chains = []
    for raw in text.splitlines():
        line = _BULLET.sub("", raw).strip().strip("`").strip()
        if "->" not in line:
            continue
        parts = [p.strip() for p in _ARROW.split(line)]
        reason = None
        if parts and parts[-1].upper() == ACTION_LABEL:
            parts[-1] = ACTION_LABEL
        if len(parts) < 2 or any(not p for p in parts):
            reason = "empty segment"
        elif parts[0] not in keys:
            reason = f"unknown observation key {parts[0]!r}"
        elif parts[-1] != ACTION_LABEL:
            reason = "does not end at ACTION"
        elif any(p in keys or p.upper() == ACTION_LABEL for p in parts[1:-1]):
            reason = "intermediate label reuses a reserved name"
        elif any(len(p) > MAX_LABEL_LEN for p in parts):
            reason = "label too long"
        elif len(set(parts)) != len(parts):
            reason = "repeated label"
        if reason:
            log.info("dropping chain line %r: %s", raw, reason)
            continue
        chains.append(CausalChain(tuple(parts)))
    return chains


def extract(reflection_text: str, observation_keys: Sequence[str], backend: Backend) -> list[CausalChain]:
    """Ask the backend to restate a reflection as chains and keep the valid ones."""
    if not reflection_text.strip():
        return []
    req = request("extract", "extract", keys=", ".join(observation_keys), reflection=reflection_text)
    return parse_chains(backend.complete(req), observation_keys)


def semantic_match(
    candidate: str,
    existing: Sequence[str],
    backend: Optional[Backend] = None,
    threshold: float = 0.5,
    *,
    judge: bool = False,
    similarity: Callable[[str, str], float] = jaccard,
) -> Optional[str]:
    """Best existing label equivalent to ``candidate``, or None.

    Similarity mode returns the highest-scoring label at or above
    ``threshold`` (earliest on ties). Judge mode asks the backend per pair
    and falls back to similarity mode if the backend fails.
    """
    if not existing:
        return None
    if judge and backend is not None:
        try:
            for label in existing:
                if _judge(candidate, label, backend):
                    return label
            return None
        except BackendError as err:
            log.warning("match judge failed (%s); using similarity", err)
    best, best_score = None, -1.0
    for label in existing:
        s = similarity(candidate, label)
        if s > best_score:
            best, best_score = label, s
    return best if best_score >= threshold else None


def _judge(candidate: str, label: str, backend: Backend) -> bool:
    reply = backend.complete(request("match", "match", candidate=candidate, existing=label))
    return reply.strip().upper().startswith("YES")


class SimilarityMatcher:
    """Graph matcher: every existing label scoring at least ``threshold``."""

    def __init__(self, threshold: float = 0.5, similarity: Callable[[str, str], float] = jaccard):
        self.threshold = threshold
        self.similarity = similarity

    def __call__(self, candidate: str, existing: Sequence[str]) -> list[str]:
        return [e for e in existing if self.similarity(candidate, e) >= self.threshold]


class JudgeMatcher:
    """Graph matcher asking the backend pairwise; degrades to similarity on failure."""

    def __init__(self, backend: Backend, threshold: float = 0.5):
        self.backend = backend
        self.fallback = SimilarityMatcher(threshold)

    def __call__(self, candidate: str, existing: Sequence[str]) -> list[str]:
        try:
            return [e for e in existing if _judge(candidate, e, self.backend)]
        except BackendError as err:
            log.warning("match judge failed (%s); using similarity", err)
            return self.fallback(candidate, existing)
