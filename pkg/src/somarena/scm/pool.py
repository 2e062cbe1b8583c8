"""Opponent-specific pools of validated reasoning examples."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

from somarena.text import jaccard, parse_number

Similarity = Callable[[str, str], float]


@dataclass(frozen=True)
class TargetLink:
    """Which structural relation an example instantiates: parent labels -> child label."""

    parents: tuple[str, ...]
    child: str

    def __post_init__(self):
        if not self.parents:
            raise ValueError("a target link needs at least one parent")
        object.__setattr__(self, "parents", tuple(sorted(self.parents)))


@dataclass(frozen=True)
class ReasoningExample:
    parent_values: tuple[tuple[str, str], ...]
    child_value: str
    reasoning: str
    target_link: TargetLink
    id: int = -1

    @classmethod
    def build(cls, parent_values: dict[str, str], child_value: str, reasoning: str,
              target_link: TargetLink, id: int = -1) -> "ReasoningExample":
        return cls(tuple(sorted(parent_values.items())), child_value, reasoning, target_link, id)

    @property
    def parents(self) -> dict[str, str]:
        return dict(self.parent_values)


def parents_text(values) -> str:
    items = values.items() if isinstance(values, dict) else values
    return "\n".join(f"{k} = {v}" for k, v in items)


@dataclass
class ExamplePool:
    opponent: str
    examples: list[ReasoningExample] = field(default_factory=list)
    capacity: Optional[int] = 200
    next_id: int = 0

    def __len__(self) -> int:
        return len(self.examples)

    def _append(self, example: ReasoningExample) -> ReasoningExample:
        stored = ReasoningExample(
            example.parent_values, example.child_value, example.reasoning,
            example.target_link, self.next_id,
        )
        self.next_id += 1
        self.examples.append(stored)
        if self.capacity is not None and len(self.examples) > self.capacity:
            del self.examples[: len(self.examples) - self.capacity]
        return stored


def retrieve_examples(
    pool: Optional[ExamplePool],
    query_parent_values: dict[str, str],
    target_link: TargetLink,
    m: int,
    similarity: Similarity = jaccard,
) -> list[ReasoningExample]:
    """Top-``m`` examples for the same child node, most similar first, newer first on ties."""
    if m < 1:
        raise ValueError("m must be at least 1")
    if pool is None:
        return []
    query = parents_text(query_parent_values)
    scored = [
        (similarity(query, parents_text(e.parent_values)), e)
        for e in pool.examples
        if e.target_link.child == target_link.child
    ]
    scored.sort(key=lambda se: (-se[0], -se[1].id))
    return [e for _, e in scored[:m]]


@dataclass(frozen=True)
class MatchPredicate:
    """Exact text match, or absolute numeric tolerance when ``tolerance`` is set."""

    tolerance: Optional[float] = None

    def __call__(self, predicted, actual) -> bool:
        if self.tolerance is not None:
            p, a = parse_number(predicted), parse_number(actual)
            if p is not None and a is not None:
                return abs(p - a) <= self.tolerance
        return _norm(predicted) == _norm(actual)


def _norm(value) -> str:
    if isinstance(value, float) and value.is_integer():
        value = int(value)
    return str(value).strip().lower()


def credit_assign(trace, predicted, actual, match: Callable, pool: ExamplePool) -> ExamplePool:
    """Store every non-root step of ``trace`` in ``pool`` if the prediction matched the actual action."""
    if not match(predicted, actual):
        return pool
    for rec in trace.records:
        pool._append(ReasoningExample.build(
            rec.parent_values, rec.value, rec.reasoning,
            TargetLink(tuple(rec.parent_values), rec.label),
        ))
    return pool
