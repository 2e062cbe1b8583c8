"""Survival auction: sealed first-price bids for water that restores health."""

from __future__ import annotations

import random
from typing import Optional, Sequence

from somarena.games.base import (
    GameState,
    InvalidActionError,
    PlayerStatus,
    RoundOutcome,
    SagParams,
    TerminalStateError,
)


def initial_players(num_players: int, params: SagParams) -> list[PlayerStatus]:
    return [
        PlayerStatus(hp=params.initial_hp, budget=params.initial_budget)
        for _ in range(num_players)
    ]


def validate_bid(player: int, bid, budget: int) -> int:
    if isinstance(bid, bool) or not isinstance(bid, int):
        raise InvalidActionError(player, f"bid {bid!r} is not an integer")
    if bid < 0 or bid > budget:
        raise InvalidActionError(player, f"bid {bid} outside [0, {budget}]")
    return bid


def sag_step(
    bids: Sequence[Optional[int]],
    state: GameState,
    params: SagParams,
    rng: random.Random,
) -> RoundOutcome:
    """Resolve one auction round and return the outcome with the successor state.

    ``bids`` is aligned with players; eliminated players must pass ``None``.
    Ties on the highest bid draw once from ``rng``; no draw happens otherwise.
    """
    if state.terminal:
        raise TerminalStateError("episode already finished")
    if len(bids) != len(state.players):
        raise ValueError("one bid slot per player required")
    alive = state.alive_ids()
    for i, p in enumerate(state.players):
        if p.alive:
            validate_bid(i, bids[i], p.budget)
        elif bids[i] is not None:
            raise InvalidActionError(i, "eliminated players cannot bid")

    top = max(bids[i] for i in alive)
    tied = [i for i in alive if bids[i] == top]
    winner = tied[0] if len(tied) == 1 else rng.choice(tied)

    new = state.copy()
    eliminated = []
    for i in alive:
        p = new.players[i]
        if i == winner:
            p.budget -= top
            p.hp = params.hp_cap if params.full_restore else min(params.hp_cap, p.hp + params.round_hp_loss)
        else:
            p.hp -= params.round_hp_loss
            if p.hp <= 0:
                p.hp = 0
                p.alive = False
                eliminated.append(i)
    rewards = [0.0] * len(bids)
    for i in alive:
        if new.players[i].alive:
            new.players[i].survived += 1
            new.players[i].score += 1.0
            rewards[i] = 1.0
    reveal = {"winner": winner, "price": top, "eliminated": eliminated}
    new.public.append({"round": state.round_index, **reveal})
    new.round_index += 1
    new.step_index += 1
    if len(new.alive_ids()) <= 1:
        new.terminal = True
    return RoundOutcome(
        rewards=rewards,
        winners=(winner,),
        reveal=reveal,
        state=new,
        eliminated=tuple(eliminated),
    )
