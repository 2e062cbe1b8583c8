"""Causal-graph opponent models: construction, pruning, inference and example pools."""

from somarena.scm.graph import (
    ACTION,
    ACTION_LABEL,
    INTERMEDIATE,
    OBSERVATION,
    CausalChain,
    CausalGraph,
    ChainResult,
    GraphInvariantError,
    Node,
    apply_chains,
    exact_matcher,
    init_graph,
    prune_top_k,
    rank_intermediates,
    topological_order,
)
from somarena.scm.inference import InferenceTrace, NodeRecord, infer, parse_node_response
from somarena.scm.pool import (
    ExamplePool,
    MatchPredicate,
    ReasoningExample,
    TargetLink,
    credit_assign,
    retrieve_examples,
)

__all__ = [
    "ACTION", "ACTION_LABEL", "INTERMEDIATE", "OBSERVATION",
    "CausalChain", "CausalGraph", "ChainResult", "GraphInvariantError", "Node",
    "apply_chains", "exact_matcher", "init_graph", "prune_top_k", "rank_intermediates",
    "topological_order", "InferenceTrace", "NodeRecord", "infer", "parse_node_response",
    "ExamplePool", "MatchPredicate", "ReasoningExample", "TargetLink", "credit_assign",
    "retrieve_examples",
]
