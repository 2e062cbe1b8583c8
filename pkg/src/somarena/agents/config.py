from __future__ import annotations

from dataclasses import asdict, dataclass, replace
from typing import Any, Optional

AGENT_KINDS = ("som", "llm-only", "cot", "tot", "k-r", "reflexion", "mixed", "scripted")
BASELINE_KINDS = ("llm-only", "cot", "tot", "k-r", "reflexion")
MIXED_POOL = ("cot", "tot", "k-r", "reflexion")


@dataclass(frozen=True)
class SomParams:
    """Opponent-model settings. ``tolerance`` None picks the game default."""

    k: int = 5
    m: int = 3
    tolerance: Optional[float] = None
    capacity: Optional[int] = 200
    match_threshold: float = 0.5
    judge_matcher: bool = False
    enable_graph: bool = True
    enable_intermediates: bool = True
    enable_refine: bool = True
    enable_examples: bool = True

    def __post_init__(self):
        if self.k < 0:
            raise ValueError("k must be non-negative")
        if self.m < 1:
            raise ValueError("m must be at least 1")
        if self.capacity is not None and self.capacity < 1:
            raise ValueError("capacity must be positive")


# Table-style ablation ladder: each variant adds one component to the previous.
ABLATION_VARIANTS: tuple[tuple[str, dict[str, bool]], ...] = (
    ("LLM-only", dict(enable_graph=False, enable_intermediates=False, enable_refine=False, enable_examples=False)),
    ("+ Static Graph", dict(enable_graph=True, enable_intermediates=False, enable_refine=False, enable_examples=False)),
    ("+ Intermediate Nodes", dict(enable_graph=True, enable_intermediates=True, enable_refine=False, enable_examples=False)),
    ("+ Graph Refine", dict(enable_graph=True, enable_intermediates=True, enable_refine=True, enable_examples=False)),
    ("+ Reasoning Examples (SOM)", dict(enable_graph=True, enable_intermediates=True, enable_refine=True, enable_examples=True)),
)

GAME_TOLERANCE = {"g08a": 5.0, "sag": 5.0, "undercover": None}


@dataclass(frozen=True)
class AgentConfig:
    kind: str
    name: str = ""
    backend: Optional[str] = None
    som: Optional[SomParams] = None
    k_level: int = 2
    rule: Optional[str] = None
    seed: int = 0
    tot_breadth: int = 3
    reflexion_memory: int = 5

    def __post_init__(self):
        if self.kind not in AGENT_KINDS:
            raise ValueError(f"unknown agent kind {self.kind!r}")
        if self.kind == "som" and self.som is None:
            object.__setattr__(self, "som", SomParams())
        if self.kind != "som" and self.som is not None:
            raise ValueError("SOM parameters are only valid for kind 'som'")
        if self.k_level < 0:
            raise ValueError("k_level must be non-negative")
        if self.kind == "scripted":
            from somarena.agents.scripted import known_rule

            if not self.rule or not known_rule(self.rule):
                raise ValueError(f"unknown scripted rule {self.rule!r}")
        if self.tot_breadth < 1 or self.reflexion_memory < 0:
            raise ValueError("tot_breadth must be >= 1 and reflexion_memory >= 0")
        if not self.name:
            object.__setattr__(self, "name", self.rule if self.kind == "scripted" else self.kind)

    @classmethod
    def from_dict(cls, data: dict[str, Any], name: str = "") -> "AgentConfig":
        data = dict(data)
        som = data.pop("som", None)
        flat_som = {k: data.pop(k) for k in list(data) if k in SomParams.__dataclass_fields__}
        if som is not None or flat_som:
            som = SomParams(**{**(som or {}), **flat_som})
        data.setdefault("name", name)
        return cls(som=som, **data)

    def with_som(self, **changes) -> "AgentConfig":
        return replace(self, som=replace(self.som, **changes))

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)
