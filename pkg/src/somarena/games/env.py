"""Seeded episode driver: builds state, produces observations, clamps invalid actions."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Any, Optional

from somarena.games.base import (
    G08A,
    SAG,
    UNDERCOVER,
    GameError,
    GameSpec,
    GameState,
    InvalidActionError,
    Observation,
    PlayerStatus,
    RoundOutcome,
    TerminalStateError,
)
from somarena.games.g08a import g08a_step, validate_choice
from somarena.games.sag import initial_players, sag_step, validate_bid
from somarena.games.undercover import CLUE, VOTE, deal_roles, undercover_step, validate_vote


def initial_state(spec: GameSpec, rng: random.Random) -> GameState:
    n = spec.num_players
    if spec.kind == G08A:
        return GameState(kind=G08A, players=[PlayerStatus() for _ in range(n)])
    if spec.kind == SAG:
        return GameState(kind=SAG, players=initial_players(n, spec.params))
    return GameState(kind=UNDERCOVER, players=deal_roles(n, spec.params, rng), phase=CLUE)


def observation_for(agent_id: int, state: GameState, spec: GameSpec) -> Observation:
    """Public record plus the agent's own private fields. Deterministic in its inputs."""
    if not isinstance(agent_id, int) or not 0 <= agent_id < len(state.players):
        raise GameError(f"unknown agent id {agent_id!r}")
    me = state.players[agent_id]
    if not me.alive and not state.terminal:
        raise GameError(f"agent {agent_id} is eliminated")
    fields: dict[str, Any] = {
        "game": spec.kind,
        "round": state.round_index,
        "horizon": spec.horizon,
        "num-players": spec.num_players,
        "own-id": agent_id,
        "alive": [p.alive for p in state.players],
        "public": [dict(r) for r in state.public],
    }
    last = state.public[-1] if state.public else None
    p = spec.params
    if spec.kind == G08A:
        fields.update({
            "action-min": p.action_min,
            "action-max": p.action_max,
            "target-factor": p.target_factor,
            "own-score": me.score,
            "last-target": last["target"] if last else None,
            "last-mean": last["mean"] if last else None,
            "last-choices": list(last["choices"]) if last else None,
            "last-winners": list(last["winners"]) if last else None,
        })
    elif spec.kind == SAG:
        fields.update({
            "own-hp": me.hp,
            "own-budget": me.budget,
            "hp": [q.hp for q in state.players],
            "budgets": [q.budget for q in state.players],
            "hp-cap": p.hp_cap,
            "round-hp-loss": p.round_hp_loss,
            "initial-budget": p.initial_budget,
            "last-winner": last["winner"] if last else None,
            "last-price": last["price"] if last else None,
        })
    else:
        fields.update({
            "phase": state.phase,
            "own-word": me.word,
            "max-clue-rounds": p.max_clue_rounds,
        })
    return Observation(observer=agent_id, round_index=state.round_index, fields=fields)


def revealed_actions(obs: Observation) -> dict[int, Any]:
    """Opponent actions made public by the most recent step, as seen in ``obs``."""
    public = obs.fields["public"]
    if not public:
        return {}
    last = public[-1]
    game = obs.fields["game"]
    if game == G08A:
        return dict(enumerate(last["choices"]))
    if game == SAG:
        return {last["winner"]: last["price"]}
    if last.get("phase") == VOTE:
        return {int(k): v for k, v in last["votes"].items()}
    return {}


@dataclass
class StepResult:
    outcome: RoundOutcome
    actions: dict[int, Any]
    violations: list[dict[str, Any]] = field(default_factory=list)


class GameEnv:
    """One episode of one game. Single writer."""

    def __init__(self, spec: GameSpec, seed: Optional[int] = None):
        self.spec = spec
        self.seed = spec.seed if seed is None else seed
        self.reset()

    def reset(self) -> GameState:
        self.rng = random.Random(self.seed)
        self.state = initial_state(self.spec, self.rng)
        return self.state

    @property
    def terminal(self) -> bool:
        return self.state.terminal

    @property
    def phase(self) -> str:
        return self.state.phase

    def actors(self) -> list[int]:
        return [] if self.state.terminal else self.state.alive_ids()

    def observe(self, agent_id: int) -> Observation:
        return observation_for(agent_id, self.state, self.spec)

    def _sanitize(self, player: int, action: Any) -> tuple[Any, Optional[str]]:
        """Return a legal action and the violation reason if one was substituted."""
        spec, state = self.spec, self.state
        try:
            if spec.kind == G08A:
                return validate_choice(player, action, spec.params), None
            if spec.kind == SAG:
                return validate_bid(player, action, state.players[player].budget), None
            if state.phase == VOTE:
                return validate_vote(player, action, state), None
            if not isinstance(action, str):
                raise InvalidActionError(player, "clue must be text")
            return action, None
        except InvalidActionError as err:
            return self._substitute(player, action), err.reason

    def _substitute(self, player: int, action: Any) -> Any:
        spec, state = self.spec, self.state
        num = action if isinstance(action, int) and not isinstance(action, bool) else None
        if spec.kind == G08A:
            lo, hi = spec.params.action_min, spec.params.action_max
            return lo if num is None else min(max(num, lo), hi)
        if spec.kind == SAG:
            budget = state.players[player].budget
            return 0 if num is None else min(max(num, 0), budget)
        if state.phase == VOTE:
            valid = [i for i in state.alive_ids() if i != player]
            return self.rng.choice(valid)
        return ""

    def step(self, actions: dict[int, Any]) -> StepResult:
        if self.state.terminal:
            raise TerminalStateError("episode already finished")
        n = self.spec.num_players
        alive = self.state.alive_ids()
        violations = []
        joint: list[Any] = [None] * n
        for i in alive:
            legal, reason = self._sanitize(i, actions.get(i))
            if reason is not None:
                violations.append({"player": i, "given": actions.get(i), "used": legal, "reason": reason})
            joint[i] = legal

        if self.spec.kind == G08A:
            outcome = g08a_step(joint, self.spec.params)
            new = self.state.copy()
            for i, r in enumerate(outcome.rewards):
                new.players[i].score += r
                new.players[i].survived += 1
            new.public.append({"round": self.state.round_index, **outcome.reveal})
            new.round_index += 1
            new.step_index += 1
            outcome.state = new
        elif self.spec.kind == SAG:
            outcome = sag_step(joint, self.state, self.spec.params, self.rng)
        else:
            outcome = undercover_step(joint, self.state, self.spec.params, self.rng)

        new = outcome.state
        if not new.terminal and new.round_index >= self.spec.horizon:
            new.terminal = True
            if self.spec.kind == UNDERCOVER:
                # horizon reached with an Undercover alive
                new.winners = tuple(i for i, p in enumerate(new.players) if p.role == "undercover")
        if new.terminal and self.spec.kind != UNDERCOVER:
            new.winners = self._episode_leaders(new)
        self.state = new
        return StepResult(outcome=outcome, actions={i: joint[i] for i in alive}, violations=violations)

    def _episode_leaders(self, state: GameState) -> tuple[int, ...]:
        if self.spec.kind == G08A:
            key = [p.score for p in state.players]
        else:
            key = self.survival_rounds(state)
        best = max(key)
        return tuple(i for i, k in enumerate(key) if k == best)

    def survival_rounds(self, state: Optional[GameState] = None) -> list[int]:
        """Rounds survived per player; survivors of a finished episode are credited the horizon."""
        state = state or self.state
        out = []
        for p in state.players:
            if state.terminal and p.alive and self.spec.kind == SAG:
                out.append(self.spec.horizon)
            else:
                out.append(p.survived)
        return out

    def win_shares(self) -> list[float]:
        """Episode-level win share per player; tied leaders split one win."""
        n = self.spec.num_players
        if not self.state.terminal or not self.state.winners:
            return [0.0] * n
        winners = self.state.winners
        if self.spec.kind == UNDERCOVER:
            return [1.0 if i in winners else 0.0 for i in range(n)]
        share = 1.0 / len(winners)
        return [share if i in winners else 0.0 for i in range(n)]
