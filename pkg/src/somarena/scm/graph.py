"""Causal graph over observation, intermediate and action nodes.

Observation nodes are roots, the single action node is the sink, and every
intermediate node must sit on some observation-to-action path. Direct
observation -> action edges from initialization are permanent.
"""

from __future__ import annotations

import heapq
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

log = logging.getLogger(__name__)

OBSERVATION = "observation"
INTERMEDIATE = "intermediate"
ACTION = "action"
ACTION_LABEL = "ACTION"
_KIND_RANK = {OBSERVATION: 0, INTERMEDIATE: 1, ACTION: 2}

# A matcher receives a candidate label and the existing intermediate labels,
# and returns every existing label it judges equivalent.
Matcher = Callable[[str, Sequence[str]], Sequence[str]]


class GraphInvariantError(ValueError):
    """A causal graph violates a structural invariant; ``invariant`` names which."""

    def __init__(self, invariant: str, detail: str):
        super().__init__(f"{invariant}: {detail}")
        self.invariant = invariant
        self.detail = detail


@dataclass
class Node:
    id: str
    kind: str
    label: str
    order: int
    count: Optional[int] = None


@dataclass(frozen=True)
class CausalChain:
    """Observation label, zero or more intermediate labels, then the action label."""

    labels: tuple[str, ...]

    def __post_init__(self):
        labels = tuple(self.labels)
        object.__setattr__(self, "labels", labels)
        if len(labels) < 2:
            raise ValueError("a chain needs an observation and the action")
        if any(not isinstance(x, str) or not x.strip() for x in labels):
            raise ValueError("chain labels must be non-empty text")
        if labels[-1] != ACTION_LABEL:
            raise ValueError(f"chain must end at {ACTION_LABEL}")
        if ACTION_LABEL in labels[:-1]:
            raise ValueError(f"{ACTION_LABEL} may only appear at the end")
        if len(set(labels)) != len(labels):
            raise ValueError("chain repeats a label")

    @property
    def observation(self) -> str:
        return self.labels[0]

    @property
    def intermediates(self) -> tuple[str, ...]:
        return self.labels[1:-1]

    def __str__(self) -> str:
        return " -> ".join(self.labels)


@dataclass
class ChainResult:
    chain: CausalChain
    accepted: bool
    reason: str = ""
    rejected_edges: list[tuple[str, str]] = field(default_factory=list)
    dropped_nodes: list[str] = field(default_factory=list)


class CausalGraph:
    def __init__(self):
        self.nodes: dict[str, Node] = {}
        self.edges: set[tuple[str, str]] = set()
        self.next_order = 0

    # construction helpers -------------------------------------------------
    def _add_node(self, node_id: str, kind: str, label: str, count: Optional[int] = None) -> Node:
        node = Node(id=node_id, kind=kind, label=label, order=self.next_order, count=count)
        self.next_order += 1
        self.nodes[node_id] = node
        return node

    def copy(self) -> "CausalGraph":
        g = CausalGraph()
        g.nodes = {k: Node(**vars(v)) for k, v in self.nodes.items()}
        g.edges = set(self.edges)
        g.next_order = self.next_order
        return g

    def __eq__(self, other) -> bool:
        if not isinstance(other, CausalGraph):
            return NotImplemented
        return (
            self.nodes == other.nodes
            and self.edges == other.edges
            and self.next_order == other.next_order
        )

    def __repr__(self) -> str:
        return f"CausalGraph({len(self.nodes)} nodes, {len(self.edges)} edges)"

    # queries --------------------------------------------------------------
    @property
    def action_id(self) -> str:
        return ACTION_LABEL

    def observation_keys(self) -> list[str]:
        return [n.label for n in self._sorted(OBSERVATION)]

    def intermediates(self) -> list[Node]:
        return self._sorted(INTERMEDIATE)

    def _sorted(self, kind: str) -> list[Node]:
        return sorted((n for n in self.nodes.values() if n.kind == kind), key=lambda n: n.order)

    def node_by_label(self, label: str) -> Optional[Node]:
        for n in self.nodes.values():
            if n.label == label:
                return n
        return None

    def parents(self, node_id: str) -> list[str]:
        ps = [u for u, v in self.edges if v == node_id]
        return sorted(ps, key=lambda u: (_KIND_RANK[self.nodes[u].kind], self.nodes[u].order))

    def children(self, node_id: str) -> list[str]:
        return [v for u, v in self.edges if u == node_id]

    def _adjacency(self) -> dict[str, list[str]]:
        adj: dict[str, list[str]] = {k: [] for k in self.nodes}
        for u, v in self.edges:
            adj[u].append(v)
        return adj

    def has_path(self, src: str, dst: str) -> bool:
        if src == dst:
            return True
        adj = self._adjacency()
        stack, seen = [src], {src}
        while stack:
            u = stack.pop()
            for v in adj[u]:
                if v == dst:
                    return True
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        return False

    def _reachable(self, starts: Iterable[str], reverse: bool = False) -> set[str]:
        adj: dict[str, list[str]] = {k: [] for k in self.nodes}
        for u, v in self.edges:
            if reverse:
                adj[v].append(u)
            else:
                adj[u].append(v)
        seen = set(starts)
        stack = list(seen)
        while stack:
            u = stack.pop()
            for v in adj[u]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        return seen

    def dangling_intermediates(self) -> list[str]:
        """Intermediate ids not on any observation -> action path."""
        from_obs = self._reachable(n.id for n in self.nodes.values() if n.kind == OBSERVATION)
        to_action = self._reachable([self.action_id], reverse=True) if self.action_id in self.nodes else set()
        return [
            n.id for n in self.intermediates() if n.id not in from_obs or n.id not in to_action
        ]

    def remove_node(self, node_id: str) -> None:
        del self.nodes[node_id]
        self.edges = {(u, v) for u, v in self.edges if u != node_id and v != node_id}

    # invariants -----------------------------------------------------------
    def validate(self) -> None:
        """Raise GraphInvariantError naming the first violated invariant."""
        for u, v in sorted(self.edges):
            if u not in self.nodes or v not in self.nodes:
                raise GraphInvariantError("endpoint", f"edge ({u}, {v}) references a missing node")
        actions = [n for n in self.nodes.values() if n.kind == ACTION]
        if len(actions) != 1:
            raise GraphInvariantError("single-action", f"found {len(actions)} action nodes")
        if actions[0].id != ACTION_LABEL:
            raise GraphInvariantError("single-action", f"action node id is {actions[0].id!r}")
        labels = [n.label for n in self.nodes.values()]
        if len(set(labels)) != len(labels):
            raise GraphInvariantError("unique-labels", "two nodes share a label")
        orders = [n.order for n in self.nodes.values()]
        if len(set(orders)) != len(orders) or any(o >= self.next_order or o < 0 for o in orders):
            raise GraphInvariantError("insertion-order", "insertion indices are not unique and bounded")
        for n in self.nodes.values():
            if n.kind not in _KIND_RANK:
                raise GraphInvariantError("node-kind", f"node {n.id} has kind {n.kind!r}")
            if not isinstance(n.label, str) or not n.label.strip():
                raise GraphInvariantError("labels", f"node {n.id} has an empty label")
            if n.kind == INTERMEDIATE:
                if not isinstance(n.count, int) or n.count < 1:
                    raise GraphInvariantError("counts", f"intermediate {n.id} has count {n.count!r}")
            elif n.count is not None:
                raise GraphInvariantError("counts", f"{n.kind} node {n.id} carries a count")
        for u, v in self.edges:
            if self.nodes[v].kind == OBSERVATION:
                raise GraphInvariantError("observation-roots", f"observation {v} has a parent")
            if self.nodes[u].kind == ACTION:
                raise GraphInvariantError("action-sink", f"action node has child {v}")
        self._kahn()
        for n in self.nodes.values():
            if n.kind == OBSERVATION and (n.id, self.action_id) not in self.edges:
                raise GraphInvariantError("direct-edges", f"observation {n.id} lost its direct edge")
        dangling = self.dangling_intermediates()
        if dangling:
            raise GraphInvariantError("intermediate-path", f"nodes {dangling} are off every path")

    def _kahn(self) -> list[str]:
        indeg = {k: 0 for k in self.nodes}
        adj = self._adjacency()
        for _, v in self.edges:
            indeg[v] += 1

        def key(nid: str):
            n = self.nodes[nid]
            return (_KIND_RANK[n.kind], n.order, nid)

        heap = [key(k) for k, d in indeg.items() if d == 0]
        heapq.heapify(heap)
        out = []
        while heap:
            _, _, u = heapq.heappop(heap)
            out.append(u)
            for v in adj[u]:
                indeg[v] -= 1
                if indeg[v] == 0:
                    heapq.heappush(heap, key(v))
        if len(out) != len(self.nodes):
            raise GraphInvariantError("acyclic", "graph contains a cycle")
        return out


def init_graph(observation_keys: Sequence[str]) -> CausalGraph:
    """Observation nodes wired directly to a single action node."""
    keys = list(observation_keys)
    if not keys:
        raise ValueError("need at least one observation key")
    if len(set(keys)) != len(keys):
        raise ValueError("observation keys must be distinct")
    g = CausalGraph()
    for k in keys:
        if not isinstance(k, str) or not k.strip():
            raise ValueError("observation keys must be non-empty text")
        if k == ACTION_LABEL:
            raise ValueError(f"{ACTION_LABEL} is reserved for the action node")
        g._add_node(k, OBSERVATION, k)
    g._add_node(ACTION_LABEL, ACTION, ACTION_LABEL)
    for k in keys:
        g.edges.add((k, ACTION_LABEL))
    return g


def exact_matcher(candidate: str, existing: Sequence[str]) -> list[str]:
    return [e for e in existing if e == candidate]


def _rank_key(n: Node):
    return (-n.count, n.order)


def apply_chains(
    graph: CausalGraph,
    chains: Iterable[CausalChain],
    matcher: Optional[Matcher] = None,
) -> tuple[CausalGraph, list[ChainResult]]:
    """Merge extracted chains into a copy of ``graph``.

    Each intermediate label either reinforces an equivalent existing node
    (the highest-count hit when several match) or becomes a new node with
    count 1. Edges that would close a cycle are rejected one by one; any
    new node left off every observation -> action path is then dropped.
    """
    matcher = matcher or exact_matcher
    g = graph.copy()
    obs_keys = set(g.observation_keys())
    results = []
    for chain in chains:
        if chain.observation not in obs_keys:
            results.append(ChainResult(chain, False, f"unknown observation key {chain.observation!r}"))
            continue
        clash = [x for x in chain.intermediates if x in obs_keys]
        if clash:
            results.append(ChainResult(chain, False, f"intermediate label collides with observation {clash[0]!r}"))
            continue

        path = [chain.observation]
        created = []
        for label in chain.intermediates:
            mids = sorted(g.intermediates(), key=_rank_key)
            exact = [n for n in mids if n.label == label]
            if exact:
                hit = exact[0]
            else:
                hits = set(matcher(label, [n.label for n in mids]))
                hit = next((n for n in mids if n.label in hits), None)
            if hit is not None:
                hit.count += 1
                path.append(hit.id)
            else:
                node = g._add_node(f"m{g.next_order}", INTERMEDIATE, label, count=1)
                created.append(node.id)
                path.append(node.id)
        path.append(g.action_id)

        result = ChainResult(chain, True)
        for u, v in zip(path, path[1:]):
            if (u, v) in g.edges:
                continue
            if u == v or g.has_path(v, u):
                result.rejected_edges.append((u, v))
                continue
            g.edges.add((u, v))
        if result.rejected_edges:
            result.reason = "cycle"
        dangling = set(g.dangling_intermediates())
        for nid in created:
            if nid in dangling:
                g.remove_node(nid)
                result.dropped_nodes.append(nid)
        results.append(result)
        if result.rejected_edges:
            log.info("chain %s: rejected edges %s (cycle)", chain, result.rejected_edges)
    return g, results


def rank_intermediates(graph: CausalGraph) -> list[Node]:
    """Intermediates by count descending, then insertion order ascending."""
    return sorted(graph.intermediates(), key=_rank_key)


def prune_top_k(graph: CausalGraph, k) -> CausalGraph:
    """Keep the ``k`` best-ranked intermediates; drop the rest with their edges.

    Survivors stranded off every observation -> action path by the removal are
    dropped too. Parents are never spliced to children.
    """
    if k is None or (isinstance(k, float) and math.isinf(k)):
        return graph.copy()
    if k < 0:
        raise ValueError("k must be non-negative")
    g = graph.copy()
    ranked = rank_intermediates(g)
    for n in ranked[int(k):]:
        g.remove_node(n.id)
    while True:
        dangling = g.dangling_intermediates()
        if not dangling:
            break
        for nid in dangling:
            g.remove_node(nid)
    return g


def topological_order(graph: CausalGraph) -> list[str]:
    """Parents before children; ties by kind (observation, intermediate, action) then insertion order."""
    return graph._kahn()
