"""Game-specific text for prompts, action grammars and fallbacks."""

from __future__ import annotations

import re
from typing import Any, Optional

from somarena.games.base import G08A, SAG, Observation, format_number
from somarena.games.undercover import VOTE
from somarena.text import last_integer

_ACTION = re.compile(r"ACTION\s*:\s*(.+)", re.IGNORECASE)

SOM_KEYS = {
    G08A: ("last-target", "opponent-last-choice", "round"),
    SAG: ("opponent-hp", "opponent-budget", "last-winning-bid", "round"),
    "undercover": ("opponent-clues", "alive-players", "round"),
}


def fmt(value: Any) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, (int, float)):
        return format_number(value)
    if isinstance(value, (list, tuple)):
        return ", ".join(fmt(v) for v in value) or "none"
    return str(value)


def describe_game(obs: Observation) -> str:
    f = obs.fields
    n = f["num-players"]
    if f["game"] == G08A:
        return (
            f"Game: {n} players each pick an integer in [{f['action-min']}, {f['action-max']}] every round; "
            f"whoever is closest to {fmt(f['target-factor'])} times the group average wins the round."
        )
    if f["game"] == SAG:
        return (
            f"Game: {n} players bid sealed amounts for water each round. The highest bidder pays its bid "
            f"and restores health to {f['hp-cap']}; everyone else loses {f['round-hp-loss']} health. "
            "Players at 0 health are eliminated. Survive as long as possible."
        )
    return (
        f"Game: {n} players; most share a secret word, the Undercovers hold a similar but different one. "
        "Each round every player gives a clue, then everyone votes to eliminate one player. "
        "Civilians win by eliminating all Undercovers."
    )


def describe_observation(obs: Observation) -> str:
    f = obs.fields
    lines = [f"round = {f['round']}", f"you are player {f['own-id']}"]
    if f["game"] == G08A:
        lines += [
            f"last target = {fmt(f['last-target'])}",
            f"last choices = {fmt(f['last-choices'])}",
            f"your score = {fmt(f['own-score'])}",
        ]
    elif f["game"] == SAG:
        lines += [
            f"your health = {f['own-hp']}",
            f"your budget = {f['own-budget']}",
            f"health of all players = {fmt(f['hp'])}",
            f"budgets of all players = {fmt(f['budgets'])}",
            f"last winner = {fmt(f['last-winner'])}, price = {fmt(f['last-price'])}",
        ]
    else:
        alive = [i for i, a in enumerate(f["alive"]) if a]
        lines += [f"phase = {f['phase']}", f"your word = {f['own-word']}", f"alive players = {fmt(alive)}"]
        for rec in f["public"]:
            if rec.get("phase") == "clue":
                for pid, clue in sorted(rec["clues"].items(), key=lambda kv: int(kv[0])):
                    lines.append(f"round {rec['round']} clue from player {pid}: {clue}")
            else:
                lines.append(f"round {rec['round']} eliminated player {rec['eliminated']}")
    return "\n".join(lines)


def instruction(obs: Observation) -> str:
    f = obs.fields
    if f["game"] == G08A:
        return f"Choose an integer between {f['action-min']} and {f['action-max']}."
    if f["game"] == SAG:
        return f"Choose a whole-number bid between 0 and your budget {f['own-budget']}."
    if f["phase"] == VOTE:
        others = [i for i, a in enumerate(f["alive"]) if a and i != f["own-id"]]
        return f"Vote for the player id you suspect holds the different word; choose one of {fmt(others)}."
    return "Give a short clue about your word without saying the word itself."


def is_clue_phase(obs: Observation) -> bool:
    return obs.fields["game"] == "undercover" and obs.fields["phase"] != VOTE


def parse_action(obs: Observation, text: str) -> Optional[Any]:
    """Extract an action under the game's grammar, or None if nothing usable is present."""
    if not isinstance(text, str):
        return None
    m = _ACTION.search(text)
    tail = m.group(1).strip() if m else text
    if is_clue_phase(obs):
        clue = tail.strip().splitlines()[0].strip() if tail.strip() else ""
        return clue[:200] or None
    n = last_integer(tail.splitlines()[0] if m else tail)
    return n


def fallback_action(obs: Observation, last_own: Optional[Any] = None) -> Any:
    f = obs.fields
    if is_clue_phase(obs):
        return "pass"
    if f["game"] == "undercover":
        others = [i for i, a in enumerate(f["alive"]) if a and i != f["own-id"]]
        return others[0]
    if last_own is not None:
        return last_own
    return f["action-min"] if f["game"] == G08A else 0


def prediction_fallback(obs: Observation, opponent: int, last_seen: Optional[Any]) -> str:
    """Prediction used when inference fails: the opponent's last action, else a neutral default."""
    if last_seen is not None:
        return fmt(last_seen)
    f = obs.fields
    if f["game"] == G08A:
        return fmt((f["action-min"] + f["action-max"]) // 2)
    if f["game"] == SAG:
        return "0"
    others = [i for i, a in enumerate(f["alive"]) if a and i != opponent]
    return fmt(others[0]) if others else "none"


def som_observation_values(obs: Observation, opponent: int) -> dict[str, str]:
    """Root values of the opponent model, from ``obs`` as seen by the modeling agent."""
    f = obs.fields
    if f["game"] == G08A:
        choices = f["last-choices"]
        return {
            "last-target": fmt(f["last-target"]),
            "opponent-last-choice": fmt(choices[opponent] if choices else None),
            "round": fmt(f["round"]),
        }
    if f["game"] == SAG:
        last_price = f["last-price"]
        return {
            "opponent-hp": fmt(f["hp"][opponent]),
            "opponent-budget": fmt(f["budgets"][opponent]),
            "last-winning-bid": fmt(last_price),
            "round": fmt(f["round"]),
        }
    clues = [
        rec["clues"][opponent] for rec in f["public"]
        if rec.get("phase") == "clue" and opponent in rec["clues"]
    ]
    alive = [i for i, a in enumerate(f["alive"]) if a]
    return {
        "opponent-clues": " | ".join(clues) or "none",
        "alive-players": fmt(alive),
        "round": fmt(f["round"]),
    }


def round_summary(obs_after: Observation) -> str:
    """One line describing the most recent public record in ``obs_after``."""
    public = obs_after.fields["public"]
    return summarize_record(obs_after.fields["game"], public[-1]) if public else ""


def summarize_record(game: str, rec: dict[str, Any]) -> str:
    if game == G08A:
        return (f"round {rec['round']}: choices {fmt(rec['choices'])}, "
                f"target {fmt(rec['target'])}, winners {fmt(rec['winners'])}")
    if game == SAG:
        out = f"round {rec['round']}: player {rec['winner']} won the water for {rec['price']}"
        if rec["eliminated"]:
            out += f"; eliminated {fmt(rec['eliminated'])}"
        return out
    if rec.get("phase") == "clue":
        clues = "; ".join(f"player {k}: {v}" for k, v in sorted(rec["clues"].items()))
        return f"round {rec['round']} clues: {clues}"
    votes = "; ".join(f"{k}->{v}" for k, v in sorted(rec["votes"].items()))
    return f"round {rec['round']} votes: {votes}; eliminated player {rec['eliminated']}"
