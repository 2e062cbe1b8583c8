"""Undercover: Civilians and Undercovers hold different secret words; clue then vote each round."""

from __future__ import annotations

import random
from collections import Counter
from typing import Optional, Sequence

from somarena.games.base import (
    GameState,
    InvalidActionError,
    PlayerStatus,
    RoundOutcome,
    TerminalStateError,
    UndercoverParams,
)

CIVILIAN = "civilian"
UNDERCOVER_ROLE = "undercover"
CLUE = "clue"
VOTE = "vote"


def deal_roles(num_players: int, params: UndercoverParams, rng: random.Random) -> list[PlayerStatus]:
    civ_word, und_word = rng.choice(params.word_pairs)
    undercover = set(rng.sample(range(num_players), params.num_undercover))
    return [
        PlayerStatus(
            word=und_word if i in undercover else civ_word,
            role=UNDERCOVER_ROLE if i in undercover else CIVILIAN,
        )
        for i in range(num_players)
    ]


def validate_vote(player: int, target, state: GameState) -> int:
    if isinstance(target, bool) or not isinstance(target, int):
        raise InvalidActionError(player, f"vote {target!r} is not a player id")
    if target == player:
        raise InvalidActionError(player, "cannot vote for self")
    if not 0 <= target < len(state.players) or not state.players[target].alive:
        raise InvalidActionError(player, f"vote for eliminated or unknown player {target}")
    return target


def check_winner(state: GameState, params: UndercoverParams) -> Optional[str]:
    """Winning side after a vote, or None while the game continues."""
    alive = [state.players[i] for i in state.alive_ids()]
    n_und = sum(p.role == UNDERCOVER_ROLE for p in alive)
    n_civ = len(alive) - n_und
    if n_und == 0:
        return CIVILIAN
    if n_und >= n_civ:
        return UNDERCOVER_ROLE
    if state.round_index >= params.max_clue_rounds:
        return UNDERCOVER_ROLE
    return None


def undercover_step(
    phase_input: Sequence[Optional[object]],
    state: GameState,
    params: UndercoverParams,
    rng: random.Random,
) -> RoundOutcome:
    """Apply a clue phase or a vote phase, depending on ``state.phase``."""
    if state.terminal:
        raise TerminalStateError("episode already finished")
    if len(phase_input) != len(state.players):
        raise ValueError("one input slot per player required")
    alive = state.alive_ids()
    n = len(state.players)
    new = state.copy()
    new.step_index += 1

    if state.phase == CLUE:
        clues = {}
        for i in alive:
            clue = phase_input[i]
            if not isinstance(clue, str):
                raise InvalidActionError(i, "clue must be text")
            clues[i] = clue
        reveal = {"phase": CLUE, "clues": clues}
        new.public.append({"round": state.round_index, **reveal})
        new.phase = VOTE
        return RoundOutcome(rewards=[0.0] * n, winners=(), reveal=reveal, state=new)

    votes = {i: validate_vote(i, phase_input[i], state) for i in alive}
    tally = Counter(votes.values())
    top = max(tally.values())
    tied = sorted(t for t, c in tally.items() if c == top)
    out = tied[0] if len(tied) == 1 else rng.choice(tied)
    new.players[out].alive = False
    new.round_index += 1
    for i in new.alive_ids():
        new.players[i].survived += 1
    reveal = {"phase": VOTE, "votes": votes, "eliminated": out}
    new.public.append({"round": state.round_index, **reveal})
    new.phase = CLUE

    side = check_winner(new, params)
    rewards = [0.0] * n
    winners: tuple[int, ...] = ()
    if side is not None:
        new.terminal = True
        winners = tuple(i for i, p in enumerate(new.players) if p.role == side)
        new.winners = winners
        for i in winners:
            rewards[i] = 1.0
            new.players[i].score += 1.0
        reveal["winning-side"] = side
    return RoundOutcome(
        rewards=rewards, winners=winners, reveal=reveal, state=new, eliminated=(out,)
    )
