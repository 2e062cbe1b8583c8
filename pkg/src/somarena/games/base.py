"""Shared game types: specs, per-game parameters, state, observations and outcomes."""

from __future__ import annotations

import copy
import math
from dataclasses import asdict, dataclass, field
from typing import Any, Optional, Union

G08A = "g08a"
SAG = "sag"
UNDERCOVER = "undercover"
GAME_KINDS = (G08A, SAG, UNDERCOVER)


class GameError(Exception):
    """Base class for game rule errors."""


class InvalidActionError(GameError):
    """An action violates the game's legal action set."""

    def __init__(self, player: int, reason: str):
        super().__init__(f"player {player}: {reason}")
        self.player = player
        self.reason = reason


class TerminalStateError(GameError):
    """A step was attempted on a finished episode."""


def round_half_away(x: float) -> int:
    """Round to the nearest integer, ties away from zero."""
    return int(math.copysign(math.floor(abs(x) + 0.5), x))


def format_number(x: Union[int, float]) -> str:
    """Canonical text for a number; integral floats print without a fraction."""
    if isinstance(x, float) and x.is_integer():
        return str(int(x))
    return repr(x) if isinstance(x, float) else str(x)


@dataclass(frozen=True)
class G08AParams:
    action_min: int = 1
    action_max: int = 100
    target_factor: float = 0.8

    def __post_init__(self):
        if not self.action_min < self.action_max:
            raise ValueError("action_min must be below action_max")
        if not 0 < self.target_factor < 1:
            raise ValueError("target_factor must lie in (0, 1)")


@dataclass(frozen=True)
class SagParams:
    initial_hp: int = 10
    hp_cap: int = 10
    round_hp_loss: int = 2
    initial_budget: int = 100
    full_restore: bool = True

    def __post_init__(self):
        if not 0 < self.round_hp_loss <= self.initial_hp <= self.hp_cap:
            raise ValueError("need 0 < round_hp_loss <= initial_hp <= hp_cap")
        if self.initial_budget < 0:
            raise ValueError("initial_budget must be non-negative")


DEFAULT_WORD_PAIRS = (
    ("apple", "pear"),
    ("coffee", "tea"),
    ("guitar", "violin"),
    ("river", "lake"),
)


@dataclass(frozen=True)
class UndercoverParams:
    num_undercover: int = 1
    word_pairs: tuple[tuple[str, str], ...] = DEFAULT_WORD_PAIRS
    max_clue_rounds: int = 3

    def __post_init__(self):
        if self.num_undercover < 1:
            raise ValueError("num_undercover must be positive")
        if self.max_clue_rounds < 1:
            raise ValueError("max_clue_rounds must be positive")
        if not self.word_pairs:
            raise ValueError("word_pairs must be non-empty")
        pairs = tuple(tuple(p) for p in self.word_pairs)
        for civ, und in pairs:
            if civ == und:
                raise ValueError(f"word pair ({civ!r}, {und!r}) is not distinct")
        object.__setattr__(self, "word_pairs", pairs)


GameParams = Union[G08AParams, SagParams, UndercoverParams]
_PARAM_TYPES = {G08A: G08AParams, SAG: SagParams, UNDERCOVER: UndercoverParams}


@dataclass(frozen=True)
class GameSpec:
    """One game configuration; ``discount`` is carried but the episode objective is undiscounted."""

    kind: str
    num_players: int
    horizon: int
    discount: float = 1.0
    seed: int = 0
    params: Optional[GameParams] = None

    def __post_init__(self):
        if self.kind not in GAME_KINDS:
            raise ValueError(f"unknown game kind {self.kind!r}")
        if self.num_players < 2:
            raise ValueError("num_players must be at least 2")
        if self.horizon < 1:
            raise ValueError("horizon must be at least 1")
        if not 0.0 <= self.discount <= 1.0:
            raise ValueError("discount must lie in [0, 1]")
        if self.params is None:
            object.__setattr__(self, "params", _PARAM_TYPES[self.kind]())
        elif not isinstance(self.params, _PARAM_TYPES[self.kind]):
            raise ValueError(f"params of type {type(self.params).__name__} do not fit {self.kind}")
        if self.kind == UNDERCOVER and self.params.num_undercover >= self.num_players:
            raise ValueError("num_undercover must be below num_players")

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "GameSpec":
        data = dict(data)
        kind = data.pop("kind")
        raw = data.pop("params", None) or {}
        param_type = _PARAM_TYPES.get(kind)
        if param_type is None:
            raise ValueError(f"unknown game kind {kind!r}")
        if "word_pairs" in raw:
            raw = dict(raw, word_pairs=tuple(tuple(p) for p in raw["word_pairs"]))
        unknown = set(data) - {"num_players", "horizon", "discount", "seed"}
        if unknown:
            raise ValueError(f"unknown game keys: {sorted(unknown)}")
        return cls(kind=kind, params=param_type(**raw), **data)

    def to_dict(self) -> dict[str, Any]:
        out = asdict(self)
        if "word_pairs" in out["params"]:
            out["params"]["word_pairs"] = [list(p) for p in out["params"]["word_pairs"]]
        return out

    def action_range(self) -> Optional[tuple[int, int]]:
        """Numeric action bounds, or None for text-action games."""
        if self.kind == G08A:
            return self.params.action_min, self.params.action_max
        if self.kind == SAG:
            return 0, self.params.initial_budget
        return None


def load_game_spec(path) -> GameSpec:
    """Read a GameSpec from a TOML file (top-level keys plus a ``[params]`` table)."""
    from somarena._toml import load_toml

    data = load_toml(path)
    if "game" in data:
        data = data["game"]
    return GameSpec.from_dict(data)


@dataclass
class PlayerStatus:
    alive: bool = True
    hp: Optional[int] = None
    budget: Optional[int] = None
    word: Optional[str] = None
    role: Optional[str] = None
    score: float = 0.0
    survived: int = 0


@dataclass
class GameState:
    kind: str
    players: list[PlayerStatus]
    round_index: int = 0
    public: list[dict[str, Any]] = field(default_factory=list)
    terminal: bool = False
    winners: tuple[int, ...] = ()
    phase: str = "play"
    step_index: int = 0

    def alive_ids(self) -> list[int]:
        return [i for i, p in enumerate(self.players) if p.alive]

    def copy(self) -> "GameState":
        return copy.deepcopy(self)


@dataclass
class RoundOutcome:
    rewards: list[float]
    winners: tuple[int, ...]
    reveal: dict[str, Any]
    state: Optional[GameState] = None
    eliminated: tuple[int, ...] = ()


@dataclass(frozen=True)
class Observation:
    observer: int
    round_index: int
    fields: dict[str, Any]

    def __getitem__(self, key: str) -> Any:
        return self.fields[key]

    def get(self, key: str, default: Any = None) -> Any:
        return self.fields.get(key, default)


@dataclass
class Trajectory:
    """Local history of one agent: (observation, own action, reward) per step."""

    agent: int
    steps: list[tuple[Observation, Any, float]] = field(default_factory=list)

    def append(self, observation: Observation, action: Any, reward: float) -> None:
        self.steps.append((observation, action, reward))

    @property
    def rewards(self) -> list[float]:
        return [r for _, _, r in self.steps]

    def __len__(self) -> int:
        return len(self.steps)


def episode_return(rewards, discount: float = 1.0) -> float:
    """Discounted sum of a reward sequence or of a Trajectory's rewards."""
    if isinstance(rewards, Trajectory):
        rewards = rewards.rewards
    total = 0.0
    weight = 1.0
    for r in rewards:
        total += weight * r
        weight *= discount
    return total
