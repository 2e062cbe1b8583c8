"""Small text utilities shared by the engine and the backends."""

from __future__ import annotations

import re
from typing import Optional

_TOKEN = re.compile(r"[a-z0-9]+")
_NUMBER = re.compile(r"-?\d+(?:\.\d+)?")


def tokens(text: str) -> set[str]:
    """Lower-cased alphanumeric tokens; punctuation and hyphens separate tokens."""
    return set(_TOKEN.findall(text.lower()))


def jaccard(a: str, b: str) -> float:
    """Token-set Jaccard overlap. Two token-less texts score 0."""
    ta, tb = tokens(a), tokens(b)
    if not ta and not tb:
        return 0.0
    return len(ta & tb) / len(ta | tb)


def parse_number(text) -> Optional[float]:
    """First number in ``text``, or None."""
    if isinstance(text, (int, float)) and not isinstance(text, bool):
        return float(text)
    if not isinstance(text, str):
        return None
    m = _NUMBER.search(text)
    return float(m.group()) if m else None


def last_integer(text: str) -> Optional[int]:
    found = re.findall(r"-?\d+", text)
    return int(found[-1]) if found else None
