from __future__ import annotations

from typing import Any, Optional

from somarena.games.base import GameSpec, Observation


class Agent:
    """A seat at the table. One instance plays one episode at a time.

    ``prediction_log`` collects opponent predictions made during the current
    step; the runner drains it after every step. ``violations`` records
    actions the agent had to substitute because its reasoner's output was
    unusable.
    """

    def __init__(self, name: str, kind: str):
        self.name = name
        self.kind = kind
        self.seat = -1
        self.spec: Optional[GameSpec] = None
        self.episode = 0
        self.digest = ""
        self.prediction_log: list[dict[str, Any]] = []
        self.violations: list[dict[str, Any]] = []

    def begin_episode(self, seat: int, spec: GameSpec, episode: int) -> None:
        self.seat = seat
        self.spec = spec
        self.episode = episode
        self.prediction_log = []
        self.violations = []

    def act(self, obs: Observation) -> Any:
        raise NotImplementedError

    def observe(self, before: Observation, after: Observation, own_action: Any, reward: float) -> None:
        """Called after every step the agent took part in."""

    def end_episode(self) -> None:
        pass

    def set_history_digest(self, digest: str) -> None:
        self.digest = digest

    def freeze(self) -> None:
        pass

    def unfreeze(self) -> None:
        pass

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.name!r})"
