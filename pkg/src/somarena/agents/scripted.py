"""Deterministic rule opponents used as learnability oracles."""

from __future__ import annotations

import re
from typing import Any

from somarena.agents.klevel import k_level_choice
from somarena.games.base import G08A, SAG, Observation, round_half_away
from somarena.games.undercover import VOTE
from somarena.text import jaccard

RULES = (
    "g08a-follow-target",
    "g08a-constant-<c>",
    "g08a-level-<k>",
    "sag-half-budget",
    "sag-urgent",
    "sag-constant-<c>",
    "undercover-basic",
)

_PARAM = re.compile(r"^(g08a-constant|g08a-level|sag-constant)-(\d+)$")


def known_rule(rule_id: str) -> bool:
    return rule_id in RULES or bool(_PARAM.match(rule_id))


def scripted_opponent(rule_id: str, obs: Observation) -> Any:
    """Action of a fixed rule given the acting player's observation."""
    f = obs.fields
    m = _PARAM.match(rule_id)
    if rule_id == "g08a-follow-target":
        if f["last-target"] is None:
            return 50
        return round_half_away(f["target-factor"] * f["last-target"])
    if m and m.group(1) == "g08a-constant":
        return int(m.group(2))
    if m and m.group(1) == "g08a-level":
        anchor = 50 if f["last-mean"] is None else round_half_away(f["last-mean"])
        return k_level_choice(int(m.group(2)), f["num-players"], anchor,
                              f["action-min"], f["action-max"], f["target-factor"])
    if rule_id == "sag-half-budget":
        return f["own-budget"] // 2
    if rule_id == "sag-urgent":
        return f["own-budget"] if f["own-hp"] <= f["round-hp-loss"] else 0
    if m and m.group(1) == "sag-constant":
        return min(int(m.group(2)), f["own-budget"])
    if rule_id == "undercover-basic":
        return _undercover_basic(obs)
    raise ValueError(f"unknown scripted rule {rule_id!r}")


def _undercover_basic(obs: Observation) -> Any:
    f = obs.fields
    me = f["own-id"]
    if f["phase"] != VOTE:
        # describes the word without revealing it
        return f"something with {len(f['own-word'])} letters"
    own_clues = [rec["clues"][me] for rec in f["public"] if rec.get("phase") == "clue" and me in rec["clues"]]
    mine = " ".join(own_clues)
    others = [i for i, a in enumerate(f["alive"]) if a and i != me]

    def oddness(i: int):
        theirs = " ".join(rec["clues"][i] for rec in f["public"] if rec.get("phase") == "clue" and i in rec["clues"])
        return (jaccard(mine, theirs), i)

    return min(others, key=oddness)
