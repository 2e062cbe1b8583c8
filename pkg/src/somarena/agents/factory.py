from __future__ import annotations

from typing import Mapping, Optional

from somarena.agents.base import Agent
from somarena.agents.baselines import MixedAgent, PromptAgent, ScriptedAgent
from somarena.agents.config import BASELINE_KINDS, AgentConfig
from somarena.agents.som import OpponentModel, SomAgent
from somarena.backend.base import Backend


def build_agent(
    config: AgentConfig,
    backends: Mapping[str, Backend],
    model: Optional[OpponentModel] = None,
) -> Agent:
    """Instantiate the agent described by ``config``, resolving its backend by name."""
    if config.kind == "scripted":
        return ScriptedAgent(config)
    if config.backend is None:
        if len(backends) != 1:
            raise ValueError(f"agent {config.name!r} must name one of the backends {sorted(backends)}")
        backend = next(iter(backends.values()))
    elif config.backend in backends:
        backend = backends[config.backend]
    else:
        raise ValueError(f"agent {config.name!r} refers to unknown backend {config.backend!r}")
    if config.kind == "som":
        return SomAgent(config, backend, model)
    if config.kind == "mixed":
        return MixedAgent(config, backend)
    if config.kind in BASELINE_KINDS:
        return PromptAgent(config, backend)
    raise ValueError(f"unknown agent kind {config.kind!r}")
