"""Reasoner backends: a scripted rule table and an OpenAI-compatible HTTP client."""

from somarena.backend.base import (
    PURPOSES,
    Backend,
    BackendError,
    BackendRequest,
    Message,
    NoRuleError,
    TransportError,
)
from somarena.backend.http import HttpBackend
from somarena.backend.scripted import ScriptedBackend, ScriptedRule, ScriptedRuleSet, TemplateError

__all__ = [
    "PURPOSES", "Backend", "BackendError", "BackendRequest", "Message", "NoRuleError",
    "TransportError", "HttpBackend", "ScriptedBackend", "ScriptedRule", "ScriptedRuleSet",
    "TemplateError",
]
