from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Protocol

PURPOSES = ("reflect", "extract", "match", "infer", "act", "predict", "evaluate")
ROLES = ("system", "user", "assistant")


class BackendError(Exception):
    """A reasoner could not produce text."""


class TransportError(BackendError):
    """Network or HTTP failure after the retry budget was spent."""

    def __init__(self, message: str, attempts: int, status: Optional[int] = None, retryable: bool = True):
        super().__init__(message)
        self.attempts = attempts
        self.status = status
        self.retryable = retryable


class NoRuleError(BackendError):
    """No scripted rule matched the request."""


@dataclass(frozen=True)
class Message:
    role: str
    content: str


@dataclass(frozen=True)
class BackendRequest:
    messages: tuple[Message, ...]
    purpose: str
    temperature: float = 0.0
    max_tokens: int = 512

    def __post_init__(self):
        object.__setattr__(self, "messages", tuple(self.messages))
        if self.purpose not in PURPOSES:
            raise ValueError(f"unknown purpose {self.purpose!r}")
        if not any(m.role == "user" for m in self.messages):
            raise ValueError("request needs at least one user message")
        if any(m.role not in ROLES for m in self.messages):
            raise ValueError("unknown message role")
        if self.temperature < 0:
            raise ValueError("temperature must be non-negative")
        if self.max_tokens < 1:
            raise ValueError("max_tokens must be positive")

    @classmethod
    def simple(cls, purpose: str, user: str, system: Optional[str] = None, **kw) -> "BackendRequest":
        msgs = [Message("system", system)] if system else []
        msgs.append(Message("user", user))
        return cls(tuple(msgs), purpose, **kw)

    @property
    def user_text(self) -> str:
        return "\n".join(m.content for m in self.messages if m.role == "user")

    def as_payload(self) -> list[dict[str, str]]:
        return [{"role": m.role, "content": m.content} for m in self.messages]


class Backend(Protocol):
    name: str

    def complete(self, request: BackendRequest) -> str: ...

