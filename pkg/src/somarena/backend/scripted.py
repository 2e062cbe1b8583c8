"""Deterministic rule-table backend for tests and desk-scale experiments.

Each rule pairs a purpose and a regular expression over the request's user
text with a response template. ``{expr}`` segments in the template are
evaluated as arithmetic over the regex's named captures, e.g.::

    [[rule]]
    purpose = "infer"
    pattern = 'Node: ACTION\\n(?s:.*?)last-target = (?P<t>-?\\d+(?:\\.\\d+)?)'
    response = "VALUE: {round(0.8 * t)}"

``round`` rounds half away from zero. ``{{`` and ``}}`` are literal braces.
"""

from __future__ import annotations

import ast
import math
import operator
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Union

from somarena._toml import load_toml, loads_toml
from somarena.backend.base import PURPOSES, BackendError, BackendRequest, NoRuleError
from somarena.games.base import format_number, round_half_away


class TemplateError(BackendError):
    """A response template could not be evaluated."""


_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.FloorDiv: operator.floordiv,
    ast.Mod: operator.mod,
    ast.Pow: operator.pow,
}
_UNARY = {ast.USub: operator.neg, ast.UAdd: operator.pos}
_COMPARE = {
    ast.Lt: operator.lt,
    ast.LtE: operator.le,
    ast.Gt: operator.gt,
    ast.GtE: operator.ge,
    ast.Eq: operator.eq,
    ast.NotEq: operator.ne,
}
_FUNCS = {
    "round": round_half_away,
    "floor": math.floor,
    "ceil": math.ceil,
    "abs": abs,
    "min": min,
    "max": max,
    "int": int,
}


def _eval(node: ast.AST, names: dict[str, Any]):
    if isinstance(node, ast.Expression):
        return _eval(node.body, names)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
        return node.value
    if isinstance(node, ast.Name):
        if node.id not in names or names[node.id] is None:
            raise TemplateError(f"unknown or empty capture {node.id!r}")
        return names[node.id]
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        left, right = _eval(node.left, names), _eval(node.right, names)
        if not all(isinstance(x, (int, float)) for x in (left, right)):
            raise TemplateError("arithmetic on non-numeric capture")
        try:
            return _BINOPS[type(node.op)](left, right)
        except ZeroDivisionError as err:
            raise TemplateError(str(err)) from err
    if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY:
        return _UNARY[type(node.op)](_eval(node.operand, names))
    if isinstance(node, ast.IfExp):
        return _eval(node.body, names) if _eval(node.test, names) else _eval(node.orelse, names)
    if isinstance(node, ast.Compare) and all(type(op) in _COMPARE for op in node.ops):
        left = _eval(node.left, names)
        for op, comp in zip(node.ops, node.comparators):
            right = _eval(comp, names)
            if not _COMPARE[type(op)](left, right):
                return False
            left = right
        return True
    if (
        isinstance(node, ast.Call)
        and isinstance(node.func, ast.Name)
        and node.func.id in _FUNCS
        and not node.keywords
    ):
        return _FUNCS[node.func.id](*(_eval(a, names) for a in node.args))
    raise TemplateError(f"unsupported expression: {ast.dump(node)}")


def _coerce(value):
    if value is None:
        return None
    try:
        f = float(value)
    except ValueError:
        return value
    return int(f) if f.is_integer() and re.fullmatch(r"-?\d+", value.strip()) else f


_SEGMENT = re.compile(r"\{\{|\}\}|\{([^{}]*)\}")


def render_template(template: str, captures: dict[str, Any]) -> str:
    names = {k: _coerce(v) for k, v in captures.items()}

    def sub(m: re.Match) -> str:
        if m.group(0) == "{{":
            return "{"
        if m.group(0) == "}}":
            return "}"
        expr = m.group(1).strip()
        try:
            tree = ast.parse(expr, mode="eval")
        except SyntaxError as err:
            raise TemplateError(f"bad expression {expr!r}") from err
        value = _eval(tree, names)
        return value if isinstance(value, str) else format_number(value)

    return _SEGMENT.sub(sub, template)


@dataclass(frozen=True)
class ScriptedRule:
    purpose: str
    pattern: str
    response: str

    def __post_init__(self):
        if self.purpose != "*" and self.purpose not in PURPOSES:
            raise ValueError(f"unknown purpose {self.purpose!r}")
        try:
            re.compile(self.pattern)
        except re.error as err:
            raise ValueError(f"bad rule pattern {self.pattern!r}: {err}") from err
        # parse every template segment now so malformed rule files fail at load time
        for m in _SEGMENT.finditer(self.response):
            if m.group(1) is not None:
                try:
                    ast.parse(m.group(1).strip(), mode="eval")
                except SyntaxError as err:
                    raise ValueError(f"bad template expression {m.group(1)!r}") from err


@dataclass(frozen=True)
class ScriptedRuleSet:
    rules: tuple[ScriptedRule, ...]
    name: str = "scripted"

    @classmethod
    def from_dict(cls, data: dict) -> "ScriptedRuleSet":
        rules = tuple(ScriptedRule(**r) for r in data.get("rule", []))
        return cls(rules=rules, name=data.get("name", "scripted"))

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "ScriptedRuleSet":
        return cls.from_dict(load_toml(path))

    @classmethod
    def from_text(cls, text: str) -> "ScriptedRuleSet":
        return cls.from_dict(loads_toml(text))


class ScriptedBackend:
    """First matching rule wins. Immutable once built, so safe to share across threads."""

    def __init__(self, rules: ScriptedRuleSet, name: str = None):
        self.rules = rules
        self.name = name or rules.name
        self._compiled = tuple((r, re.compile(r.pattern, re.DOTALL)) for r in rules.rules)

    @classmethod
    def from_rules(cls, *rules: tuple[str, str, str], name: str = "scripted") -> "ScriptedBackend":
        return cls(ScriptedRuleSet(tuple(ScriptedRule(*r) for r in rules), name))

    def complete(self, request: BackendRequest) -> str:
        text = request.user_text
        for rule, rx in self._compiled:
            if rule.purpose not in ("*", request.purpose):
                continue
            m = rx.search(text)
            if m:
                return render_template(rule.response, m.groupdict())
        raise NoRuleError(f"no rule for purpose {request.purpose!r}")
