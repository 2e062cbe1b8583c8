"""Versioned prompt templates stored as package data under ``templates/``."""

from __future__ import annotations

import re
from functools import lru_cache
from importlib import resources
from string import Template
from typing import Iterable, Mapping

from somarena.backend.base import BackendRequest

SYSTEM = "You are a careful strategic reasoner in multi-player games."
_HEADER = re.compile(r"^# template: (?P<name>\S+) v(?P<version>\d+)\s*$")


@lru_cache(maxsize=None)
def load_template(name: str) -> tuple[Template, int]:
    raw = resources.files("somarena.backend").joinpath("templates", f"{name}.txt").read_text("utf-8")
    first, _, body = raw.partition("\n")
    m = _HEADER.match(first)
    if not m or m.group("name") != name:
        raise ValueError(f"template {name!r} is missing its version header")
    return Template(body), int(m.group("version"))


def template_version(name: str) -> int:
    return load_template(name)[1]


def render(name: str, **fields) -> str:
    text = load_template(name)[0].substitute({k: "" if v is None else str(v) for k, v in fields.items()})
    # empty optional sections leave blank lines behind
    return re.sub(r"\n{3,}", "\n\n", text).strip() + "\n"


def format_values(values: Mapping[str, object]) -> str:
    return "\n".join(f"{k} = {v}" for k, v in values.items()) or "(none)"


def format_examples(examples: Iterable) -> str:
    lines = []
    for e in examples:
        given = "; ".join(f"{k}: {v}" for k, v in e.parent_values)
        lines.append(f"- given {given} => {e.child_value} ({e.reasoning})")
    return "\n".join(lines) or "(none)"


def request(purpose: str, template: str, **fields) -> BackendRequest:
    return BackendRequest.simple(purpose, render(template, **fields), system=SYSTEM)


def infer_request(node: str, kind: str, parents: Mapping[str, str], examples, context: str = "") -> BackendRequest:
    return request(
        "infer", "infer", context=context, node=node, kind=kind,
        parents=format_values(parents), examples=format_examples(examples),
    )
