"""Match configuration files (TOML)."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Optional

from somarena._toml import load_toml
from somarena.agents.config import AgentConfig
from somarena.backend.base import Backend
from somarena.backend.http import HttpBackend
from somarena.backend.scripted import ScriptedBackend, ScriptedRuleSet
from somarena.games.base import GameSpec

_SECRET_KEYS = {"api_key", "apikey", "key", "token", "secret", "password", "authorization"}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class BackendConfig:
    """A named backend. Scripted backends read a rule file; HTTP backends read credentials from the environment."""

    name: str
    kind: str = "scripted"
    rules: Optional[str] = None
    model: Optional[str] = None
    endpoint: Optional[str] = None
    timeout: float = 60.0
    attempts: int = 3

    def __post_init__(self):
        if self.kind not in ("scripted", "http"):
            raise ConfigError(f"backend {self.name!r}: unknown kind {self.kind!r}")
        if self.kind == "scripted" and not self.rules:
            raise ConfigError(f"backend {self.name!r}: scripted backends need a rules file")

    @classmethod
    def from_dict(cls, name: str, data: dict[str, Any], base: Path) -> "BackendConfig":
        secrets = {k for k in data if k.lower() in _SECRET_KEYS}
        if secrets:
            raise ConfigError(
                f"backend {name!r}: {sorted(secrets)} not allowed in config files; "
                "set SOMARENA_API_KEY in the environment instead"
            )
        data = dict(data)
        if data.get("rules"):
            data["rules"] = str((base / data["rules"]).resolve())
        try:
            return cls(name=name, **data)
        except TypeError as err:
            raise ConfigError(f"backend {name!r}: {err}") from None

    def build(self) -> Backend:
        if self.kind == "scripted":
            try:
                return ScriptedBackend(ScriptedRuleSet.from_file(self.rules), name=self.name)
            except OSError as err:
                raise ConfigError(f"backend {self.name!r}: cannot read rules: {err}") from None
            except ValueError as err:
                raise ConfigError(f"backend {self.name!r}: bad rules file: {err}") from None
        return HttpBackend(self.model, self.endpoint, timeout=self.timeout, attempts=self.attempts, name=self.name)


@dataclass(frozen=True)
class Cell:
    """One evaluated-method x opponent-method pairing; seat 0 is the evaluated agent."""

    evaluated: str
    opponent: str
    seats: tuple[str, ...]


@dataclass(frozen=True)
class MatchConfig:
    game: GameSpec
    agents: dict[str, AgentConfig]
    backends: dict[str, BackendConfig] = field(default_factory=dict)
    evaluated: tuple[str, ...] = ()
    opponents: tuple[str, ...] = ()
    seats: tuple[str, ...] = ()
    warmup: int = 5
    eval: int = 5
    runs: int = 1
    seed: int = 0
    freeze_eval: bool = True
    parallelism: int = 1

    def __post_init__(self):
        for name in ("warmup", "eval"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be non-negative")
        if self.runs < 1:
            raise ConfigError("runs must be at least 1")
        if self.parallelism < 1:
            raise ConfigError("parallelism must be at least 1")
        if self.seats:
            if len(self.seats) != self.game.num_players:
                raise ConfigError(f"{len(self.seats)} seats listed for a {self.game.num_players}-player game")
        elif not self.evaluated or not self.opponents:
            raise ConfigError("give either match.seats or both match.evaluated and match.opponents")
        for name in (*self.seats, *self.evaluated, *self.opponents):
            if name not in self.agents:
                raise ConfigError(f"unknown agent {name!r}")
        for a in self.agents.values():
            if a.kind != "scripted" and a.backend is not None and a.backend not in self.backends:
                raise ConfigError(f"agent {a.name!r} refers to unknown backend {a.backend!r}")
            if a.kind != "scripted" and a.backend is None and len(self.backends) != 1:
                raise ConfigError(f"agent {a.name!r} must name a backend")

    def cells(self) -> list[Cell]:
        if self.seats:
            return [Cell(self.seats[0], "+".join(self.seats[1:]), self.seats)]
        n = self.game.num_players
        return [Cell(e, o, (e,) + (o,) * (n - 1)) for e in self.evaluated for o in self.opponents]

    def with_overrides(
        self,
        *,
        seed: Optional[int] = None,
        backend: Optional[str] = None,
        parallelism: Optional[int] = None,
        freeze_eval: Optional[bool] = None,
    ) -> "MatchConfig":
        cfg = self
        if seed is not None:
            cfg = replace(cfg, seed=seed, game=replace(cfg.game, seed=seed))
        if parallelism is not None:
            cfg = replace(cfg, parallelism=parallelism)
        if freeze_eval is not None:
            cfg = replace(cfg, freeze_eval=freeze_eval)
        if backend is not None:
            if backend not in cfg.backends:
                raise ConfigError(f"unknown backend {backend!r}; configured: {sorted(cfg.backends)}")
            agents = {k: a if a.kind == "scripted" else replace(a, backend=backend) for k, a in cfg.agents.items()}
            cfg = replace(cfg, agents=agents)
        return cfg

    def build_backends(self) -> dict[str, Backend]:
        return {name: b.build() for name, b in sorted(self.backends.items())}

    def to_dict(self) -> dict[str, Any]:
        return {
            "game": self.game.to_dict(),
            "agents": {k: v.to_dict() for k, v in sorted(self.agents.items())},
            "backends": {k: vars(v).copy() for k, v in sorted(self.backends.items())},
            "match": {
                "evaluated": list(self.evaluated), "opponents": list(self.opponents), "seats": list(self.seats),
                "warmup": self.warmup, "eval": self.eval, "runs": self.runs, "seed": self.seed,
                "freeze_eval": self.freeze_eval, "parallelism": self.parallelism,
            },
        }


def parse_match_config(data: dict[str, Any], base: Path = Path(".")) -> MatchConfig:
    try:
        game = GameSpec.from_dict(data["game"])
        match = dict(data.get("match", {}))
        backends = {
            name: BackendConfig.from_dict(name, raw, base) for name, raw in data.get("backends", {}).items()
        }
        agents = {name: AgentConfig.from_dict(raw, name=name) for name, raw in data.get("agents", {}).items()}
        for key in ("evaluated", "opponents", "seats"):
            if key in match:
                match[key] = tuple(match[key])
        match.setdefault("seed", game.seed)
        return MatchConfig(game=game, agents=agents, backends=backends, **match)
    except ConfigError:
        raise
    except KeyError as err:
        raise ConfigError(f"missing config section {err}") from None
    except (TypeError, ValueError) as err:
        raise ConfigError(str(err)) from None


def load_match_config(path) -> MatchConfig:
    path = Path(path)
    try:
        data = load_toml(path)
    except OSError as err:
        raise ConfigError(f"cannot read config {path}: {err}") from None
    except ValueError as err:
        raise ConfigError(f"config {path} is not valid TOML: {err}") from None
    return parse_match_config(data, path.parent)
