"""The opponent-modeling agent, prompt baselines and scripted opponents."""

from somarena.agents.base import Agent
from somarena.agents.baselines import (
    ActResult,
    MixedAgent,
    PromptAgent,
    ScriptedAgent,
    baseline_act,
    mixed_opponent,
)
from somarena.agents.config import (
    ABLATION_VARIANTS,
    AGENT_KINDS,
    BASELINE_KINDS,
    MIXED_POOL,
    AgentConfig,
    SomParams,
)
from somarena.agents.factory import build_agent
from somarena.agents.klevel import g08a_best_response, k_level_choice
from somarena.agents.scripted import known_rule, scripted_opponent
from somarena.agents.som import OpponentModel, SomAgent, som_act, som_observe, som_predict

__all__ = [
    "Agent", "ActResult", "MixedAgent", "PromptAgent", "ScriptedAgent", "SomAgent",
    "baseline_act", "mixed_opponent", "ABLATION_VARIANTS", "AGENT_KINDS", "BASELINE_KINDS",
    "MIXED_POOL", "AgentConfig", "SomParams", "build_agent", "g08a_best_response",
    "k_level_choice", "known_rule", "scripted_opponent", "OpponentModel", "som_act",
    "som_observe", "som_predict",
]
