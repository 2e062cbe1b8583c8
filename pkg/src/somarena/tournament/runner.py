"""Episode and match orchestration: warm-up, freeze, evaluation."""

from __future__ import annotations

import copy
import hashlib
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Mapping, Optional, Sequence

from somarena.agents.base import Agent
from somarena.agents.factory import build_agent
from somarena.agents.gametext import summarize_record
from somarena.agents.som import OpponentModel, SomAgent
from somarena.backend.base import Backend, BackendError
from somarena.games.base import GameSpec
from somarena.games.env import GameEnv
from somarena.games.log import RoundLog, observation_digest
from somarena.scm.graph import GraphInvariantError
from somarena.store import save_model
from somarena.tournament.config import Cell, MatchConfig
from somarena.tournament.metrics import prediction_deviation

log = logging.getLogger(__name__)

WARMUP, EVAL = "warmup", "eval"
DIGEST_EPISODES = 5


def derive_seed(seed: int, run: int, episode: int) -> int:
    """Episode seed shared by every cell of a match, so methods face the same deals."""
    h = hashlib.blake2b(f"{seed}:{run}:{episode}".encode(), digest_size=8).digest()
    return int.from_bytes(h, "big") % (2**31)


@dataclass
class EpisodeRecord:
    episode: int
    phase: str
    seed: int
    valid: bool = True
    error: str = ""
    error_kind: str = ""
    winners: list[int] = field(default_factory=list)
    win_shares: list[float] = field(default_factory=list)
    survival: list[int] = field(default_factory=list)
    steps: int = 0
    predictions: list[dict[str, Any]] = field(default_factory=list)
    violations: int = 0
    summaries: list[str] = field(default_factory=list)

    def pairs(self, observer: int = 0) -> list[tuple[str, Any]]:
        return [(p["predicted"], p["actual"]) for p in self.predictions if p["observer"] == observer]

    def to_dict(self) -> dict[str, Any]:
        return dict(vars(self))

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "EpisodeRecord":
        return cls(**data)


def _error_kind(err: BaseException) -> str:
    if isinstance(err, BackendError):
        return "backend"
    if isinstance(err, GraphInvariantError):
        return "invariant"
    return "agent"


def run_episode(
    spec: GameSpec,
    agents: Sequence[Agent],
    seed: int,
    *,
    episode: int = 0,
    phase: str = EVAL,
    log_path: Optional[Path] = None,
) -> EpisodeRecord:
    """Play one episode to the horizon or the game's own end.

    A fatal agent error aborts the episode and marks it invalid; the record
    keeps whatever happened before the failure.
    """
    if len(agents) != spec.num_players:
        raise ValueError(f"{len(agents)} agents for a {spec.num_players}-player game")
    env = GameEnv(spec, seed)
    record = EpisodeRecord(episode=episode, phase=phase, seed=seed)
    rlog = RoundLog(log_path)
    rlog.append({"type": "episode", "episode": episode, "phase": phase, "seed": seed,
                 "seats": [f"{a.kind}:{a.name}" for a in agents]})
    try:
        for seat, agent in enumerate(agents):
            agent.begin_episode(seat, spec, episode)
        while not env.terminal:
            actors = env.actors()
            game_phase = env.phase
            before = {i: env.observe(i) for i in actors}
            proposed, predictions = {}, []
            for i in actors:
                proposed[i] = agents[i].act(before[i])
                for p in agents[i].prediction_log:
                    predictions.append({"step": record.steps, "round": before[i].round_index,
                                        "observer": i, "opponent": p["opponent"], "predicted": p["predicted"]})
                agents[i].prediction_log.clear()
            result = env.step(proposed)
            for p in predictions:
                p["actual"] = result.actions.get(p["opponent"])
            record.predictions.extend(predictions)
            record.violations += len(result.violations)
            public = env.state.public[-1]
            record.summaries.append(summarize_record(spec.kind, public))
            rlog.append({
                "type": "step", "step": record.steps, "round": before[actors[0]].round_index,
                "game_phase": game_phase,
                "observations": {str(i): observation_digest(o) for i, o in before.items()},
                "actions": {str(i): a for i, a in result.actions.items()},
                "rewards": list(result.outcome.rewards),
                "public": public,
                "violations": result.violations,
                "agent_violations": _drain_violations(agents, actors),
                "predictions": predictions,
            })
            record.steps += 1
            for i in actors:
                if env.state.players[i].alive or env.terminal:
                    agents[i].observe(before[i], env.observe(i), result.actions[i], result.outcome.rewards[i])
        for agent in agents:
            agent.end_episode()
    except Exception as err:  # a seat failed; the episode cannot be scored
        record.valid = False
        record.error = f"{type(err).__name__}: {err}"
        record.error_kind = _error_kind(err)
        log.error("episode %d (%s) invalid: %s", episode, phase, record.error)
    else:
        record.winners = list(env.state.winners)
        record.win_shares = env.win_shares()
        record.survival = env.survival_rounds()
    rlog.append({"type": "result", "valid": record.valid, "error": record.error, "winners": record.winners,
                 "win_shares": record.win_shares, "survival": record.survival, "steps": record.steps})
    return record


def _drain_violations(agents: Sequence[Agent], actors) -> dict[str, list]:
    out = {}
    for i in actors:
        if agents[i].violations:
            out[str(i)] = list(agents[i].violations)
            agents[i].violations.clear()
    return out


@dataclass
class RunResult:
    run: int
    warmup: list[EpisodeRecord] = field(default_factory=list)
    eval: list[EpisodeRecord] = field(default_factory=list)
    freeze_ok: Optional[bool] = None
    models: dict[int, OpponentModel] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "run": self.run,
            "freeze_ok": self.freeze_ok,
            "warmup": [r.to_dict() for r in self.warmup],
            "eval": [r.to_dict() for r in self.eval],
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "RunResult":
        return cls(
            run=data["run"], freeze_ok=data["freeze_ok"],
            warmup=[EpisodeRecord.from_dict(r) for r in data["warmup"]],
            eval=[EpisodeRecord.from_dict(r) for r in data["eval"]],
        )


def _digest(records: Sequence[EpisodeRecord]) -> str:
    blocks = []
    for r in records[-DIGEST_EPISODES:]:
        if r.valid:
            blocks.append(f"episode {r.episode}:\n" + "\n".join(r.summaries))
    return "\n".join(blocks)


def _seat_agents(
    config: MatchConfig, cell: Cell, run: int, backends: Mapping[str, Backend],
    initial_models: Mapping[str, OpponentModel],
) -> list[Agent]:
    agents = []
    for seat, name in enumerate(cell.seats):
        cfg = config.agents[name]
        if cfg.kind == "mixed":
            cfg = replace(cfg, seed=derive_seed(config.seed + cfg.seed, run, -1 - seat))
        model = copy.deepcopy(initial_models[name]) if name in initial_models else None
        agents.append(build_agent(cfg, backends, model))
    return agents


def _ensure_model(agent: Agent, seat: int, spec: GameSpec) -> None:
    if isinstance(agent, SomAgent) and agent.model is None:
        agent.begin_episode(seat, spec, 0)


def _som_models(agents: Sequence[Agent]) -> dict[int, OpponentModel]:
    return {i: a.model for i, a in enumerate(agents) if isinstance(a, SomAgent) and a.model is not None}


def run_cell(
    config: MatchConfig,
    cell: Cell,
    run: int,
    backends: Mapping[str, Backend],
    *,
    log_dir: Optional[Path] = None,
    initial_models: Mapping[str, OpponentModel] = {},
    frozen_agents: frozenset = frozenset(),
) -> RunResult:
    """One independent run of one cell: warm-up with learning, then evaluation."""
    agents = _seat_agents(config, cell, run, backends, initial_models)
    result = RunResult(run)
    spec = config.game

    def path(phase: str, ep: int) -> Optional[Path]:
        if log_dir is None:
            return None
        return Path(log_dir) / f"{cell.evaluated}__vs__{cell.opponent}" / f"run{run}" / f"{phase}-{ep:03d}.jsonl"

    for seat, agent in enumerate(agents):
        if cell.seats[seat] in frozen_agents:
            _ensure_model(agent, seat, spec)
            agent.freeze()
    for ep in range(config.warmup):
        seed = derive_seed(config.seed, run, ep)
        result.warmup.append(run_episode(spec, agents, seed, episode=ep, phase=WARMUP, log_path=path(WARMUP, ep)))

    digest = _digest(result.warmup)
    for seat, agent in enumerate(agents):
        agent.set_history_digest(digest)
        if config.freeze_eval:
            _ensure_model(agent, seat, spec)
            agent.freeze()
    before = {i: save_model(m) for i, m in _som_models(agents).items()}

    for k in range(config.eval):
        ep = config.warmup + k
        seed = derive_seed(config.seed, run, ep)
        result.eval.append(run_episode(spec, agents, seed, episode=ep, phase=EVAL, log_path=path(EVAL, ep)))

    result.models = _som_models(agents)
    if config.freeze_eval and before:
        result.freeze_ok = all(save_model(result.models[i]) == b for i, b in before.items())
    return result


def run_match(
    config: MatchConfig,
    *,
    backends: Optional[Mapping[str, Backend]] = None,
    log_dir: Optional[Path] = None,
    initial_models: Mapping[str, OpponentModel] = {},
    frozen_agents: Sequence[str] = (),
):
    """Run every cell for ``config.runs`` independent runs; runs execute in parallel up to ``parallelism``."""
    from somarena.tournament.report import CellReport, MatchReport

    if backends is None:
        backends = config.build_backends()
    cells = config.cells()
    units = [(ci, cell, run) for ci, cell in enumerate(cells) for run in range(config.runs)]
    frozen = frozenset(frozen_agents)

    def work(unit):
        _, cell, run = unit
        return run_cell(config, cell, run, backends, log_dir=log_dir,
                        initial_models=initial_models, frozen_agents=frozen)

    if config.parallelism > 1 and len(units) > 1:
        with ThreadPoolExecutor(max_workers=config.parallelism) as pool:
            results = list(pool.map(work, units))
    else:
        results = [work(u) for u in units]

    report = MatchReport(config=config.to_dict())
    for ci, cell in enumerate(cells):
        runs = [r for (i, _, _), r in zip(units, results) if i == ci]
        report.cells.append(CellReport(cell.evaluated, cell.opponent, list(cell.seats), runs))
    return report


def episode_deviation(record: EpisodeRecord, spec: GameSpec, observer: int = 0) -> Optional[float]:
    rng = spec.action_range()
    if rng is None:
        return None
    return prediction_deviation(record.pairs(observer), rng[1] - rng[0])
