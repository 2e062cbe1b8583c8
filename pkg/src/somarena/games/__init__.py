from somarena.games.base import (
    G08A,
    GAME_KINDS,
    SAG,
    UNDERCOVER,
    G08AParams,
    GameError,
    GameSpec,
    GameState,
    InvalidActionError,
    Observation,
    PlayerStatus,
    RoundOutcome,
    SagParams,
    TerminalStateError,
    Trajectory,
    UndercoverParams,
    episode_return,
    format_number,
    load_game_spec,
    round_half_away,
)
from somarena.games.env import GameEnv, StepResult, observation_for, revealed_actions
from somarena.games.g08a import g08a_step
from somarena.games.sag import sag_step
from somarena.games.undercover import undercover_step

__all__ = [
    "G08A", "SAG", "UNDERCOVER", "GAME_KINDS",
    "G08AParams", "SagParams", "UndercoverParams",
    "GameSpec", "GameState", "PlayerStatus", "Observation", "RoundOutcome", "Trajectory",
    "GameError", "InvalidActionError", "TerminalStateError",
    "GameEnv", "StepResult",
    "g08a_step", "sag_step", "undercover_step", "observation_for", "revealed_actions",
    "episode_return", "format_number", "round_half_away", "load_game_spec",
]
