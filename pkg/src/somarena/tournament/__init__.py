"""Match orchestration, metrics and reports."""

from somarena.tournament.ablation import run_ablation
from somarena.tournament.config import (
    BackendConfig,
    Cell,
    ConfigError,
    MatchConfig,
    load_match_config,
    parse_match_config,
)
from somarena.tournament.metrics import mean_std, prediction_deviation
from somarena.tournament.report import (
    AblationReport,
    CellReport,
    MatchReport,
    check_invariants,
    render_ablation,
    render_report,
)
from somarena.tournament.runner import EpisodeRecord, RunResult, derive_seed, run_cell, run_episode, run_match

__all__ = [
    "run_ablation", "BackendConfig", "Cell", "ConfigError", "MatchConfig", "load_match_config",
    "parse_match_config", "mean_std", "prediction_deviation", "AblationReport", "CellReport",
    "MatchReport", "check_invariants", "render_ablation", "render_report", "EpisodeRecord",
    "RunResult", "derive_seed", "run_cell", "run_episode", "run_match",
]
