"""Topological inference: each non-root node is evaluated from its parents by the backend."""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from typing import Optional

from somarena.backend.base import Backend, BackendError
from somarena.backend.prompts import infer_request
from somarena.scm.graph import OBSERVATION, CausalGraph, topological_order
from somarena.scm.pool import ExamplePool, TargetLink, retrieve_examples
from somarena.text import jaccard

log = logging.getLogger(__name__)

_VALUE = re.compile(r"^\s*VALUE\s*:\s*(.*?)\s*$", re.IGNORECASE | re.MULTILINE)
_REASON = re.compile(r"^\s*REASONING\s*:\s*(.*)", re.IGNORECASE | re.MULTILINE | re.DOTALL)


@dataclass
class NodeRecord:
    node_id: str
    label: str
    kind: str
    parent_values: dict[str, str]
    example_ids: list[int]
    value: str
    reasoning: str
    failed: bool = False
    error: str = ""


@dataclass
class InferenceTrace:
    observations: dict[str, str]
    records: list[NodeRecord] = field(default_factory=list)
    predicted: str = ""
    fallback_used: bool = False

    def record_for(self, label: str) -> Optional[NodeRecord]:
        return next((r for r in self.records if r.label == label), None)


def parse_node_response(text: str) -> tuple[str, str]:
    """Split a backend reply into (value, reasoning)."""
    m = _VALUE.search(text)
    if m:
        value = m.group(1)
    else:
        value = next((ln.strip() for ln in text.splitlines() if ln.strip()), "")
    r = _REASON.search(text)
    reasoning = r.group(1).strip() if r else text.strip()
    return value, reasoning


def infer(
    graph: CausalGraph,
    observation_values: dict[str, str],
    pool: Optional[ExamplePool],
    backend: Backend,
    m: int = 3,
    *,
    similarity=jaccard,
    fallback_action: Optional[str] = None,
    context: str = "",
    use_examples: bool = True,
) -> InferenceTrace:
    """Walk the graph in topological order and return the full trace.

    Roots take the supplied observation values. A node whose backend call
    fails gets an empty value and is flagged; a failed action node takes
    ``fallback_action`` when one is given.
    """
    missing = [k for k in graph.observation_keys() if k not in observation_values]
    if missing:
        raise ValueError(f"missing observation values for {missing}")
    values: dict[str, str] = {}
    trace = InferenceTrace(observations={k: str(observation_values[k]) for k in graph.observation_keys()})
    for nid in topological_order(graph):
        node = graph.nodes[nid]
        if node.kind == OBSERVATION:
            values[nid] = str(observation_values[node.label])
            continue
        parents = {graph.nodes[p].label: values[p] for p in graph.parents(nid)}
        link = TargetLink(tuple(parents), node.label)
        examples = retrieve_examples(pool, parents, link, m, similarity) if use_examples else []
        request = infer_request(node.label, node.kind, parents, examples, context)
        try:
            value, reasoning = parse_node_response(backend.complete(request))
            if not value:
                raise BackendError("empty value")
            rec = NodeRecord(nid, node.label, node.kind, parents, [e.id for e in examples], value, reasoning)
        except BackendError as err:
            log.debug("node %s failed: %s", node.label, err)
            rec = NodeRecord(nid, node.label, node.kind, parents, [e.id for e in examples], "", "",
                             failed=True, error=str(err))
            if nid == graph.action_id and fallback_action is not None:
                rec.value = str(fallback_action)
                rec.reasoning = f"fallback: {err}"
                trace.fallback_used = True
        values[nid] = rec.value
        trace.records.append(rec)
    trace.predicted = values[graph.action_id]
    return trace
