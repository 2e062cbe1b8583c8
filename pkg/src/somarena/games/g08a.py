"""Guess 0.8 of the average: every player picks an integer, closest to 0.8 x mean wins."""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from somarena.games.base import G08AParams, InvalidActionError, RoundOutcome


def validate_choice(player: int, choice, params: G08AParams) -> int:
    if isinstance(choice, bool) or not isinstance(choice, int):
        raise InvalidActionError(player, f"choice {choice!r} is not an integer")
    if not params.action_min <= choice <= params.action_max:
        raise InvalidActionError(
            player, f"choice {choice} outside [{params.action_min}, {params.action_max}]"
        )
    return choice


def g08a_step(choices: Sequence[int], params: G08AParams) -> RoundOutcome:
    """Score one round. Round winners split a reward of 1."""
    if len(choices) < 1:
        raise ValueError("need at least one choice")
    for i, c in enumerate(choices):
        validate_choice(i, c, params)
    # exact arithmetic so symmetric ties stay ties
    factor = Fraction(str(params.target_factor))
    mean = Fraction(sum(choices), len(choices))
    target = factor * mean
    distances = [abs(c - target) for c in choices]
    best = min(distances)
    winners = tuple(i for i, d in enumerate(distances) if d == best)
    share = 1.0 / len(winners)
    rewards = [share if i in winners else 0.0 for i in range(len(choices))]
    reveal = {
        "target": float(target),
        "mean": float(mean),
        "choices": list(choices),
        "winners": list(winners),
    }
    return RoundOutcome(rewards=rewards, winners=winners, reveal=reveal)
