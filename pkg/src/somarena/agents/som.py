"""The structured opponent-modeling agent.

Each round, for every opponent whose action became public:

1. credit the stored prediction for that action (grow the opponent's pool),
2. reflect on the action, extract chains, merge them into the shared graph,
3. prune to the top-K intermediates,

then predict every opponent's next action by topological inference and
best-respond to the joint prediction.
"""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any, Callable, Optional

from somarena.agents.base import Agent
from somarena.agents.config import GAME_TOLERANCE, AgentConfig, SomParams
from somarena.agents.gametext import (
    SOM_KEYS,
    describe_game,
    describe_observation,
    fmt,
    instruction,
    is_clue_phase,
    parse_action,
    prediction_fallback,
    round_summary,
    som_observation_values,
)
from somarena.agents.klevel import g08a_best_response
from somarena.backend.base import Backend, BackendError
from somarena.backend.prompts import format_values, request
from somarena.backend.reasoning import JudgeMatcher, SimilarityMatcher, extract, reflect
from somarena.games.base import G08A, SAG, Observation
from somarena.games.env import revealed_actions
from somarena.scm.graph import CausalGraph, apply_chains, init_graph, prune_top_k
from somarena.scm.inference import InferenceTrace, NodeRecord, infer, parse_node_response
from somarena.scm.pool import ExamplePool, MatchPredicate, credit_assign
from somarena.text import parse_number

log = logging.getLogger(__name__)


def creation_stamp() -> str:
    """UTC timestamp for provenance; honours SOURCE_DATE_EPOCH for reproducible builds."""
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    moment = datetime.fromtimestamp(int(epoch), timezone.utc) if epoch else datetime.now(timezone.utc)
    return moment.strftime("%Y-%m-%dT%H:%M:%SZ")


@dataclass
class PendingPrediction:
    predicted: str
    trace: InferenceTrace


@dataclass
class OpponentModel:
    """Shared causal graph plus one example pool per opponent.

    ``pending``, ``frozen`` and ``events`` are runtime state and are neither
    compared nor serialized.
    """

    graph: CausalGraph
    pools: dict[str, ExamplePool] = field(default_factory=dict)
    game: str = ""
    provenance: dict[str, str] = field(default_factory=dict)
    pending: dict[str, PendingPrediction] = field(default_factory=dict, compare=False, repr=False)
    frozen: bool = field(default=False, compare=False)
    events: list[tuple[str, str]] = field(default_factory=list, compare=False, repr=False)

    @classmethod
    def fresh(cls, observation_keys, game: str = "", provenance: Optional[dict] = None) -> "OpponentModel":
        return cls(graph=init_graph(observation_keys), game=game, provenance=dict(provenance or {}))

    def pool(self, opponent: str, capacity: Optional[int] = 200) -> ExamplePool:
        if opponent not in self.pools:
            self.pools[opponent] = ExamplePool(opponent, capacity=capacity)
        return self.pools[opponent]


def _tolerance(params: SomParams, game: str) -> Optional[float]:
    return params.tolerance if params.tolerance is not None else GAME_TOLERANCE.get(game)


def _matcher(params: SomParams, backend: Backend):
    if params.judge_matcher:
        return JudgeMatcher(backend, params.match_threshold)
    return SimilarityMatcher(params.match_threshold)


def som_observe(
    model: OpponentModel,
    opponent: str,
    observation_values: dict[str, str],
    actual_action,
    backend: Backend,
    *,
    params: SomParams = SomParams(),
    history: str = "",
    context: str = "",
) -> OpponentModel:
    """Credit the pending prediction, then update and prune the graph. Mutates ``model``."""
    if actual_action is None:
        raise ValueError("the opponent's action must be observed")
    pending = model.pending.pop(opponent, None)
    if model.frozen:
        model.events.append(("frozen", opponent))
        return model
    actual = fmt(actual_action)

    if pending is not None and params.enable_graph:
        pool = model.pool(opponent, params.capacity)
        before = len(pool)
        credit_assign(pending.trace, pending.predicted, actual, MatchPredicate(_tolerance(params, model.game)), pool)
        model.events.append(("credit", opponent))
        log.debug("credit %s: predicted %s actual %s, pool %d -> %d",
                  opponent, pending.predicted, actual, before, len(pool))

    if params.enable_graph and params.enable_intermediates:
        try:
            text = reflect(history, observation_values, actual, backend, opponent=opponent, context=context)
            chains = extract(text, model.graph.observation_keys(), backend)
        except BackendError as err:
            log.warning("graph update skipped for %s: %s", opponent, err)
        else:
            model.graph, _ = apply_chains(model.graph, chains, _matcher(params, backend))
        model.events.append(("update", opponent))

    if params.enable_graph and params.enable_refine:
        model.graph = prune_top_k(model.graph, params.k)
        model.events.append(("prune", opponent))
    return model


def som_predict(
    model: OpponentModel,
    opponent: str,
    observation_values: dict[str, str],
    backend: Backend,
    *,
    params: SomParams = SomParams(),
    fallback_action: Optional[str] = None,
    context: str = "",
    history: str = "",
) -> tuple[str, InferenceTrace]:
    """Predict ``opponent``'s next action and keep the trace for credit assignment."""
    if params.enable_graph:
        pool = model.pools.get(opponent) if params.enable_examples else None
        trace = infer(
            model.graph, observation_values, pool, backend, params.m,
            fallback_action=fallback_action, context=context, use_examples=params.enable_examples,
        )
    else:
        trace = _direct_prediction(observation_values, backend, fallback_action, context, history, opponent)
    model.pending[opponent] = PendingPrediction(trace.predicted, trace)
    model.events.append(("predict", opponent))
    return trace.predicted, trace


def _direct_prediction(values, backend, fallback_action, context, history, opponent) -> InferenceTrace:
    """Unstructured single-prompt prediction, the no-graph ablation."""
    req = request("predict", "predict", context=context, opponent=opponent,
                  observation=format_values(values), history=history or "(none)")
    trace = InferenceTrace(observations=dict(values))
    try:
        value, reasoning = parse_node_response(backend.complete(req))
        if not value:
            raise BackendError("empty prediction")
        rec = NodeRecord("ACTION", "ACTION", "action", dict(values), [], value, reasoning)
    except BackendError as err:
        rec = NodeRecord("ACTION", "ACTION", "action", dict(values), [], "", "", failed=True, error=str(err))
        if fallback_action is not None:
            rec.value, rec.reasoning = str(fallback_action), f"fallback: {err}"
            trace.fallback_used = True
    trace.records.append(rec)
    trace.predicted = rec.value
    return trace


def som_act(obs: Observation, predictions: dict[int, str], backend: Optional[Backend] = None) -> Any:
    """Best response to the predicted opponent actions.

    G0.8A: integer closest to the fixed point x = 0.8 (x + S) / n.
    SAG: outbid the highest predicted rival by one when health is within two
    rounds of losses, otherwise bid nothing.
    Undercover: ask the backend with the predictions in context.
    """
    f = obs.fields
    if f["game"] == G08A:
        lo, hi = f["action-min"], f["action-max"]
        mid = (lo + hi) // 2
        total = 0.0
        for p in predictions.values():
            v = parse_number(p)
            total += mid if v is None else v
        return g08a_best_response(total, f["num-players"], lo, hi, f["target-factor"])
    if f["game"] == SAG:
        budget, hp, loss = f["own-budget"], f["own-hp"], f["round-hp-loss"]
        if hp > 2 * loss:
            return 0
        rivals = [parse_number(p) for p in predictions.values()]
        top = max((int(v) for v in rivals if v is not None), default=0)
        return max(0, min(budget, top + 1))
    return _undercover_act(obs, predictions, backend)


def _undercover_act(obs: Observation, predictions: dict[int, str], backend: Optional[Backend]):
    f = obs.fields
    me = f["own-id"]
    preds = "\n".join(f"player {j} is predicted to vote for {p}" for j, p in sorted(predictions.items()))
    if backend is not None:
        req = request("act", "act_som", context=describe_game(obs), observation=describe_observation(obs),
                      predictions=preds or "(none)", instruction=instruction(obs))
        try:
            action = parse_action(obs, backend.complete(req))
        except BackendError as err:
            log.warning("undercover act failed: %s", err)
            action = None
        if action is not None:
            return action
    if is_clue_phase(obs):
        return "pass"
    others = [i for i, a in enumerate(f["alive"]) if a and i != me]
    tally = {i: 0 for i in others}
    for p in predictions.values():
        v = parse_number(p)
        if v is not None and int(v) in tally:
            tally[int(v)] += 1
    return max(others, key=lambda i: (tally[i], -i))


class SomAgent(Agent):
    def __init__(self, config: AgentConfig, backend: Backend, model: Optional[OpponentModel] = None):
        super().__init__(config.name or "som", "som")
        self.config = config
        self.params = config.som
        self.backend = backend
        self.model = model
        self.last_seen: dict[int, Any] = {}
        self.round_summaries: list[str] = []

    def begin_episode(self, seat: int, spec, episode: int) -> None:
        super().begin_episode(seat, spec, episode)
        if self.model is None:
            self.model = OpponentModel.fresh(
                SOM_KEYS[spec.kind], game=spec.kind,
                provenance={"builder": self.name, "backend": getattr(self.backend, "name", "unknown"),
                            "game": spec.kind, "created": creation_stamp()},
            )
        self.model.pending.clear()
        self.last_seen = {}
        self.round_summaries = []

    def freeze(self) -> None:
        self.model.frozen = True

    def unfreeze(self) -> None:
        self.model.frozen = False

    @staticmethod
    def opponent_id(seat: int) -> str:
        return f"seat{seat}"

    def _history(self) -> str:
        return "\n".join(self.round_summaries[-5:])

    def act(self, obs: Observation) -> Any:
        context = describe_game(obs)
        if is_clue_phase(obs):
            return _undercover_act(obs, {}, self.backend)
        f = obs.fields
        predictions: dict[int, str] = {}
        for j, alive in enumerate(f["alive"]):
            if not alive or j == self.seat:
                continue
            values = som_observation_values(obs, j)
            predicted, _ = som_predict(
                self.model, self.opponent_id(j), values, self.backend, params=self.params,
                fallback_action=prediction_fallback(obs, j, self.last_seen.get(j)),
                context=context, history=self._history(),
            )
            predictions[j] = predicted
            self.prediction_log.append({"step": obs.fields["round"], "opponent": j, "predicted": predicted})
        return som_act(obs, predictions, self.backend)

    def observe(self, before: Observation, after: Observation, own_action: Any, reward: float) -> None:
        summary = round_summary(after)
        revealed = revealed_actions(after)
        context = describe_game(before)
        for j, action in sorted(revealed.items()):
            if j == self.seat:
                continue
            som_observe(
                self.model, self.opponent_id(j), som_observation_values(before, j), action,
                self.backend, params=self.params, history=self._history(), context=context,
            )
            self.last_seen[j] = action
        # hidden actions (losing sealed bids) cannot be credited
        if not is_clue_phase(before):
            for j in list(self.model.pending):
                if int(j[4:]) not in revealed:
                    self.model.pending.pop(j)
        if summary:
            self.round_summaries.append(summary)
