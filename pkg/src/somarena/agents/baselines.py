"""Prompt-strategy baselines sharing one backend, plus scripted and mixed seats."""

from __future__ import annotations

import logging
import random
import re
from collections import deque
from dataclasses import dataclass
from typing import Any, Optional, Sequence

from somarena.agents.base import Agent
from somarena.agents.config import MIXED_POOL, AgentConfig
from somarena.agents.gametext import (
    describe_game,
    describe_observation,
    fallback_action,
    instruction,
    parse_action,
    round_summary,
)
from somarena.agents.klevel import k_level_choice
from somarena.agents.scripted import scripted_opponent
from somarena.backend.base import Backend, BackendError
from somarena.backend.prompts import request
from somarena.games.base import G08A, Observation, round_half_away
from somarena.text import parse_number

log = logging.getLogger(__name__)

_SCORE = re.compile(r"SCORE\s*:\s*(-?\d+(?:\.\d+)?)", re.IGNORECASE)


@dataclass
class ActResult:
    action: Any
    violation: Optional[str] = None
    text: str = ""


def _digest_block(digest: str) -> str:
    return f"History from earlier games:\n{digest}" if digest else ""


def _common(obs: Observation, history: Sequence[str], digest: str) -> dict[str, str]:
    recent = "\n".join(history[-5:])
    state = describe_observation(obs)
    if recent:
        state = f"{state}\nEarlier rounds this game:\n{recent}"
    return dict(context=describe_game(obs), digest=_digest_block(digest),
                observation=state, instruction=instruction(obs))


def _finish(obs: Observation, text: str, last_own: Any) -> ActResult:
    action = parse_action(obs, text)
    if action is None:
        return ActResult(fallback_action(obs, last_own), "unparseable backend output", text)
    return ActResult(action, None, text)


def _score(text: str) -> float:
    m = _SCORE.search(text)
    value = float(m.group(1)) if m else parse_number(text)
    return 0.0 if value is None else value


def baseline_act(
    kind: str,
    history: Sequence[str],
    obs: Observation,
    backend: Backend,
    *,
    digest: str = "",
    memory: Sequence[str] = (),
    k_level: int = 2,
    breadth: int = 3,
    last_own: Any = None,
) -> ActResult:
    """One action from a prompt strategy. Never raises on bad backend output."""
    fields = _common(obs, history, digest)
    try:
        if kind == "llm-only":
            return _finish(obs, backend.complete(request("act", "act_direct", **fields)), last_own)
        if kind == "cot":
            return _finish(obs, backend.complete(request("act", "act_cot", **fields)), last_own)
        if kind == "reflexion":
            lessons = "\n".join(f"- {m}" for m in memory) or "(none yet)"
            return _finish(obs, backend.complete(request("act", "act_reflexion", memory=lessons, **fields)), last_own)
        if kind == "k-r":
            result = _finish(obs, backend.complete(request("act", "act_kr", level=k_level, **fields)), last_own)
            if result.violation is None:
                return result
            return _analytic_kr(obs, k_level, last_own, result)
        if kind == "tot":
            return _tot(obs, backend, fields, breadth, last_own)
    except BackendError as err:
        log.warning("%s backend failure: %s", kind, err)
        if kind == "k-r":
            return _analytic_kr(obs, k_level, last_own, ActResult(None, str(err)))
        return ActResult(fallback_action(obs, last_own), f"backend failure: {err}")
    raise ValueError(f"unknown baseline kind {kind!r}")


def _analytic_kr(obs: Observation, k: int, last_own: Any, failed: ActResult) -> ActResult:
    f = obs.fields
    if f["game"] != G08A:
        return ActResult(fallback_action(obs, last_own), failed.violation, failed.text)
    anchor = 50 if f["last-mean"] is None else round_half_away(f["last-mean"])
    choice = k_level_choice(k, f["num-players"], anchor, f["action-min"], f["action-max"], f["target-factor"])
    return ActResult(choice, failed.violation, failed.text)


def _tot(obs: Observation, backend: Backend, fields: dict, breadth: int, last_own: Any) -> ActResult:
    """Breadth-``breadth`` proposals, one self-evaluation each, best score wins (first on ties)."""
    candidates = []
    for i in range(1, breadth + 1):
        text = backend.complete(request("act", "act_tot_propose", index=i, breadth=breadth, **fields))
        action = parse_action(obs, text)
        if action is not None:
            candidates.append((i, action, text))
    if not candidates:
        return ActResult(fallback_action(obs, last_own), "no parseable candidate")
    best, best_score = None, float("-inf")
    for i, action, text in candidates:
        try:
            reply = backend.complete(request(
                "evaluate", "act_tot_evaluate", context=fields["context"],
                observation=fields["observation"], index=i, candidate=text,
            ))
            score = _score(reply)
        except BackendError:
            score = 0.0
        if score > best_score:
            best, best_score = (action, text), score
    return ActResult(best[0], None, best[1])


class PromptAgent(Agent):
    def __init__(self, config: AgentConfig, backend: Backend, kind: Optional[str] = None):
        super().__init__(config.name, kind or config.kind)
        self.config = config
        self.backend = backend
        self.history: list[str] = []
        self.memory: deque[str] = deque(maxlen=config.reflexion_memory)
        self.last_own: Any = None

    def begin_episode(self, seat, spec, episode):
        super().begin_episode(seat, spec, episode)
        self.history = []
        self.memory.clear()
        self.last_own = None

    def act(self, obs: Observation) -> Any:
        result = baseline_act(
            self.kind, self.history, obs, self.backend, digest=self.digest,
            memory=list(self.memory), k_level=self.config.k_level,
            breadth=self.config.tot_breadth, last_own=self.last_own,
        )
        if result.violation:
            self.violations.append({"round": obs.round_index, "reason": result.violation,
                                    "used": result.action})
        self.last_own = result.action
        return result.action

    def observe(self, before, after, own_action, reward):
        summary = round_summary(after)
        if summary:
            self.history.append(summary)
        if self.kind == "reflexion" and summary and self.memory.maxlen:
            try:
                note = self.backend.complete(request(
                    "reflect", "self_reflect", context=describe_game(before),
                    summary=summary, action=own_action, reward=reward,
                ))
            except BackendError as err:
                log.warning("reflexion self-reflection skipped: %s", err)
            else:
                if note.strip():
                    self.memory.append(note.strip().splitlines()[0][:300])


def mixed_opponent(seed: int, episode: int) -> str:
    """Baseline kind for one episode, drawn uniformly from the four reasoning strategies."""
    return random.Random(f"mixed:{seed}:{episode}").choice(MIXED_POOL)


class MixedAgent(Agent):
    def __init__(self, config: AgentConfig, backend: Backend):
        super().__init__(config.name, "mixed")
        self.config = config
        self.backend = backend
        self.current: Optional[PromptAgent] = None
        self.kinds: list[str] = []

    def begin_episode(self, seat, spec, episode):
        super().begin_episode(seat, spec, episode)
        kind = mixed_opponent(self.config.seed, episode)
        self.kinds.append(kind)
        self.current = PromptAgent(self.config, self.backend, kind=kind)
        self.current.set_history_digest(self.digest)
        self.current.begin_episode(seat, spec, episode)

    def act(self, obs):
        action = self.current.act(obs)
        self.violations = self.current.violations
        return action

    def observe(self, before, after, own_action, reward):
        self.current.observe(before, after, own_action, reward)


class ScriptedAgent(Agent):
    def __init__(self, config: AgentConfig):
        super().__init__(config.name, "scripted")
        self.rule = config.rule

    def act(self, obs):
        return scripted_opponent(self.rule, obs)
