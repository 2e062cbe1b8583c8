"""Opponent-model archives: a magic header line followed by canonical JSON.

Layout (``.somm`` files)::

    SOMARENA-MODEL 1
    {"game": ..., "graph": {...}, "pools": [...], "provenance": {...}, "contents": {...}}

Nodes and examples carry explicit ``order`` / ``index`` fields; keys are
sorted, so equal models always produce equal bytes.
"""

from __future__ import annotations

import json
from typing import Any

from somarena.agents.som import OpponentModel
from somarena.games.log import canonical_json
from somarena.scm.graph import CausalGraph, GraphInvariantError, Node, init_graph
from somarena.scm.pool import ExamplePool, ReasoningExample, TargetLink

MAGIC = "SOMARENA-MODEL"
FORMAT_VERSION = 1
EXTENSION = ".somm"


class ArchiveError(ValueError):
    """The archive could not be loaded. ``invariant`` names the broken rule, if any."""

    def __init__(self, message: str, invariant: str = ""):
        super().__init__(message)
        self.invariant = invariant


def _graph_payload(graph: CausalGraph) -> dict[str, Any]:
    nodes = sorted(graph.nodes.values(), key=lambda n: n.order)
    return {
        "next_order": graph.next_order,
        "nodes": [
            {"id": n.id, "kind": n.kind, "label": n.label, "order": n.order, "count": n.count}
            for n in nodes
        ],
        "edges": [list(e) for e in sorted(graph.edges)],
    }


def _pool_payload(pool: ExamplePool) -> dict[str, Any]:
    return {
        "opponent": pool.opponent,
        "capacity": pool.capacity,
        "next_id": pool.next_id,
        "examples": [
            {
                "index": i,
                "id": e.id,
                "parent_values": [list(kv) for kv in e.parent_values],
                "child_value": e.child_value,
                "reasoning": e.reasoning,
                "target": {"parents": list(e.target_link.parents), "child": e.target_link.child},
            }
            for i, e in enumerate(pool.examples)
        ],
    }


def save_model(model: OpponentModel, *, include_graph: bool = True, include_pools: bool = True) -> bytes:
    """Canonical archive bytes. Excluding the graph keeps its observation and action skeleton."""
    graph = model.graph
    if not include_graph:
        graph = init_graph(graph.observation_keys())
    payload = {
        "game": model.game,
        "graph": _graph_payload(graph),
        "pools": [_pool_payload(model.pools[k]) for k in sorted(model.pools)] if include_pools else [],
        "provenance": dict(sorted(model.provenance.items())),
        "contents": {"graph": include_graph, "pools": include_pools},
    }
    return f"{MAGIC} {FORMAT_VERSION}\n{canonical_json(payload)}\n".encode("utf-8")


def load_model(data: bytes) -> OpponentModel:
    """Parse and validate an archive; raises ArchiveError on any defect."""
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as err:
        raise ArchiveError(f"archive is not UTF-8: {err}") from None
    header, _, body = text.partition("\n")
    parts = header.split(" ")
    if len(parts) != 2 or parts[0] != MAGIC:
        raise ArchiveError("missing archive header", "format")
    if parts[1] != str(FORMAT_VERSION):
        raise ArchiveError(f"unsupported archive version {parts[1]!r}", "version")
    try:
        payload = json.loads(body)
        graph = _read_graph(payload["graph"])
        pools = [_read_pool(p) for p in payload["pools"]]
        if len({p.opponent for p in pools}) != len(pools):
            raise ArchiveError("two pools share an opponent id", "distinct-pools")
        model = OpponentModel(graph=graph, pools={p.opponent: p for p in pools}, game=payload["game"],
                              provenance=dict(payload["provenance"]))
        graph.validate()
    except ArchiveError:
        raise
    except GraphInvariantError as err:
        raise ArchiveError(f"graph violates the {err.invariant} invariant: {err.detail}", err.invariant) from None
    except (KeyError, TypeError, ValueError, AttributeError) as err:
        raise ArchiveError(f"malformed archive: {err!r}", "schema") from None
    return model


def _read_graph(data: dict[str, Any]) -> CausalGraph:
    g = CausalGraph()
    g.next_order = int(data["next_order"])
    for n in data["nodes"]:
        if n["id"] in g.nodes:
            raise ArchiveError(f"duplicate node id {n['id']!r}", "unique-ids")
        g.nodes[n["id"]] = Node(id=n["id"], kind=n["kind"], label=n["label"], order=n["order"], count=n["count"])
    for e in data["edges"]:
        u, v = e
        g.edges.add((u, v))
    return g


def _read_pool(data: dict[str, Any]) -> ExamplePool:
    examples = []
    for i, e in enumerate(data["examples"]):
        if e["index"] != i:
            raise ArchiveError("example indices are out of order", "example-order")
        link = TargetLink(tuple(e["target"]["parents"]), e["target"]["child"])
        examples.append(ReasoningExample(
            tuple((k, v) for k, v in e["parent_values"]), e["child_value"], e["reasoning"], link, e["id"],
        ))
    return ExamplePool(data["opponent"], examples, data["capacity"], data["next_id"])


def write_model(path, model: OpponentModel, **flags) -> None:
    with open(path, "wb") as fh:
        fh.write(save_model(model, **flags))


def read_model(path) -> OpponentModel:
    with open(path, "rb") as fh:
        return load_model(fh.read())
