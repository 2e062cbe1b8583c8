from __future__ import annotations

from dataclasses import replace
from pathlib import Path
from statistics import mean
from typing import Mapping, Optional

from somarena.agents.config import ABLATION_VARIANTS
from somarena.backend.base import Backend
from somarena.tournament.config import ConfigError, MatchConfig
from somarena.tournament.report import AblationReport, AblationRow, MatchReport
from somarena.tournament.runner import run_match


def _som_agent(config: MatchConfig, agent: Optional[str]) -> str:
    evaluated = [c.evaluated for c in config.cells()]
    candidates = sorted({n for n in evaluated if config.agents[n].kind == "som"})
    if agent is not None:
        if agent not in candidates:
            raise ConfigError(f"{agent!r} is not an evaluated SOM agent")
        return agent
    if len(candidates) != 1:
        raise ConfigError(f"ablation needs exactly one evaluated SOM agent, found {candidates}")
    return candidates[0]


def _pooled(stats: list[Optional[dict]]) -> Optional[dict]:
    defined = [s for s in stats if s is not None]
    if not defined:
        return None
    return {"mean": mean(s["mean"] for s in defined), "std": mean(s["std"] for s in defined),
            "n": sum(s["n"] for s in defined)}


def run_ablation(
    config: MatchConfig,
    *,
    agent: Optional[str] = None,
    backends: Optional[Mapping[str, Backend]] = None,
    log_dir: Optional[Path] = None,
) -> tuple[AblationReport, list[MatchReport]]:
    """Run the five component variants under one seed set.

    Each variant differs from the config only in the SOM agent's component
    flags. Cells with several opponents are averaged into one row.
    """
    name = _som_agent(config, agent)
    if backends is None:
        backends = config.build_backends()
    out, matches = AblationReport(name), []
    for i, (label, flags) in enumerate(ABLATION_VARIANTS):
        agents = dict(config.agents)
        agents[name] = agents[name].with_som(**flags)
        variant = replace(config, agents=agents)
        sub = Path(log_dir) / f"variant{i}" if log_dir is not None else None
        report = run_match(variant, backends=backends, log_dir=sub)
        spec = report.spec
        cells = [c.aggregates(spec) for c in report.cells if c.evaluated == name]
        out.rows.append(AblationRow(
            label, dict(flags),
            _pooled([c["deviation"] for c in cells]),
            _pooled([c["win_rate"] for c in cells]),
        ))
        matches.append(report)
    return out, matches
