"""Match reports: per-episode records, aggregates and rendering."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from statistics import mean
from typing import Any, Optional

from somarena.games.base import UNDERCOVER, GameSpec
from somarena.tournament.metrics import mean_std, prediction_deviation
from somarena.tournament.runner import RunResult

FORMATS = ("table", "json")
METRICS = (
    ("win_rate", "Win rate"),
    ("survival", "Survival rounds"),
    ("deviation", "Prediction deviation (%)"),
)


def run_metrics(run: RunResult, spec: GameSpec, seat: int = 0) -> dict[str, Optional[float]]:
    """Per-run metrics of ``seat`` over the valid evaluation episodes."""
    valid = [r for r in run.eval if r.valid]
    rng = spec.action_range()
    pairs = [pair for r in valid for pair in r.pairs(seat)]
    return {
        "win_rate": mean(r.win_shares[seat] for r in valid) if valid else None,
        "survival": mean(r.survival[seat] for r in valid) if valid else None,
        "deviation": prediction_deviation(pairs, rng[1] - rng[0]) if rng else None,
    }


@dataclass
class CellReport:
    evaluated: str
    opponent: str
    seats: list[str]
    runs: list[RunResult] = field(default_factory=list)

    def aggregates(self, spec: GameSpec) -> dict[str, Any]:
        per_run = [run_metrics(r, spec) for r in self.runs]
        out: dict[str, Any] = {key: mean_std([m[key] for m in per_run]) for key, _ in METRICS}
        out["episodes"] = sum(1 for r in self.runs for e in r.eval if e.valid)
        out["invalid"] = sum(1 for r in self.runs for e in r.eval if not e.valid)
        return out

    def to_dict(self, spec: GameSpec) -> dict[str, Any]:
        return {
            "evaluated": self.evaluated,
            "opponent": self.opponent,
            "seats": list(self.seats),
            "aggregates": self.aggregates(spec),
            "runs": [r.to_dict() for r in self.runs],
        }


@dataclass
class MatchReport:
    config: dict[str, Any]
    cells: list[CellReport] = field(default_factory=list)

    @property
    def spec(self) -> GameSpec:
        return GameSpec.from_dict(self.config["game"])

    def episodes(self, phase: str = "eval"):
        for c in self.cells:
            for r in c.runs:
                yield from getattr(r, phase)

    def validity(self) -> dict[str, Any]:
        records = list(self.episodes("warmup")) + list(self.episodes("eval"))
        invalid = [r for r in records if not r.valid]
        kinds: dict[str, int] = {}
        for r in invalid:
            kinds[r.error_kind] = kinds.get(r.error_kind, 0) + 1
        return {"episodes": len(records), "invalid": len(invalid), "by_kind": dict(sorted(kinds.items()))}

    def to_dict(self) -> dict[str, Any]:
        spec = self.spec
        return {
            "format": "somarena-report 1",
            "config": self.config,
            "cells": [c.to_dict(spec) for c in self.cells],
            "validity": self.validity(),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "MatchReport":
        cells = [
            CellReport(c["evaluated"], c["opponent"], list(c["seats"]), [RunResult.from_dict(r) for r in c["runs"]])
            for c in data["cells"]
        ]
        return cls(config=data["config"], cells=cells)


def check_invariants(report: MatchReport) -> list[str]:
    """Problems with a finished report; an empty list means every check passed."""
    spec = report.spec
    problems = []
    for c in report.cells:
        for run in c.runs:
            where = f"{c.evaluated} vs {c.opponent}, run {run.run}"
            if run.freeze_ok is False:
                problems.append(f"{where}: frozen model changed during evaluation")
            for e in run.warmup + run.eval:
                if not e.valid:
                    continue
                if any(s > spec.horizon for s in e.survival):
                    problems.append(f"{where}, episode {e.episode}: survival exceeds the horizon")
                if spec.kind != UNDERCOVER and sum(e.win_shares) > 1 + 1e-9:
                    problems.append(f"{where}, episode {e.episode}: win shares sum above 1")
                if any(not 0 <= s <= 1 for s in e.win_shares):
                    problems.append(f"{where}, episode {e.episode}: win share outside [0, 1]")
    return problems


def _fmt(stat: Optional[dict], digits: int = 2) -> str:
    if stat is None:
        return "-"
    return f"{stat['mean']:.{digits}f} ± {stat['std']:.{digits}f}"


def _table(rows: list[list[str]]) -> list[str]:
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    out = []
    for k, r in enumerate(rows):
        out.append("| " + " | ".join(cell.ljust(w) for cell, w in zip(r, widths)) + " |")
        if k == 0:
            out.append("|" + "|".join("-" * (w + 2) for w in widths) + "|")
    return out


def _matrix(report: MatchReport, key: str, aggs: dict) -> list[list[str]]:
    evaluated = list(dict.fromkeys(c.evaluated for c in report.cells))
    opponents = list(dict.fromkeys(c.opponent for c in report.cells))
    rows = [["evaluated \\ opponent", *opponents, "avg"]]
    for e in evaluated:
        row, means = [e], []
        for o in opponents:
            stat = aggs.get((e, o), {}).get(key)
            row.append(_fmt(stat))
            if stat is not None:
                means.append(stat["mean"])
        row.append(f"{mean(means):.2f}" if means else "-")
        rows.append(row)
    return rows


def render_report(report: MatchReport, fmt: str = "table") -> str:
    """Evaluated-method x opponent-method matrices; byte-stable for a fixed report."""
    if fmt not in FORMATS:
        raise ValueError(f"unknown report format {fmt!r}; choose from {FORMATS}")
    if fmt == "json":
        return json.dumps(report.to_dict(), sort_keys=True, indent=2, ensure_ascii=False) + "\n"
    spec = report.spec
    m = report.config.get("match", {})
    validity = report.validity()
    evals = sum(1 for _ in report.episodes("eval"))
    lines = [
        "somarena match report",
        f"game: {spec.kind}, {spec.num_players} players, horizon {spec.horizon}",
        f"protocol: warm-up {m.get('warmup', 0)}, eval {m.get('eval', 0)}, runs {m.get('runs', 1)}, "
        f"seed {m.get('seed', spec.seed)}, freeze-eval {'on' if m.get('freeze_eval', True) else 'off'}",
        f"episodes: {evals} evaluation, {validity['invalid']} invalid of {validity['episodes']}",
    ]
    aggs = {(c.evaluated, c.opponent): c.aggregates(spec) for c in report.cells}
    for key, title in METRICS:
        if key == "survival" and spec.kind != "sag":
            continue
        if key == "deviation" and spec.action_range() is None:
            continue
        lines += ["", f"{title} (mean ± std over runs)", *_table(_matrix(report, key, aggs))]
    return "\n".join(lines) + "\n"


@dataclass
class AblationRow:
    variant: str
    flags: dict[str, bool]
    deviation: Optional[dict]
    win_rate: Optional[dict]


@dataclass
class AblationReport:
    agent: str
    rows: list[AblationRow] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {"agent": self.agent, "rows": [vars(r) for r in self.rows]}


def render_ablation(report: AblationReport, fmt: str = "table") -> str:
    if fmt not in FORMATS:
        raise ValueError(f"unknown report format {fmt!r}; choose from {FORMATS}")
    if fmt == "json":
        return json.dumps(report.to_dict(), sort_keys=True, indent=2, ensure_ascii=False) + "\n"
    rows = [["Variant", "Prediction deviation (%)", "Win rate"]]
    rows += [[r.variant, _fmt(r.deviation), _fmt(r.win_rate)] for r in report.rows]
    return "\n".join([f"somarena ablation report: agent {report.agent}", "", *_table(rows)]) + "\n"
