"""Command-line entry point: ``somarena <subcommand> ...``.

Exit codes: 0 success, 2 configuration error, 3 backend failure,
4 invariant violation, 5 model archive rejected.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from somarena.backend.base import BackendError
from somarena.scm.graph import GraphInvariantError
from somarena.store import EXTENSION, ArchiveError, read_model, save_model
from somarena.tournament.ablation import run_ablation
from somarena.tournament.config import ConfigError, MatchConfig, load_match_config
from somarena.tournament.report import (
    FORMATS,
    AblationReport,
    AblationRow,
    MatchReport,
    check_invariants,
    render_ablation,
    render_report,
)
from somarena.tournament.runner import run_match

EXIT_OK, EXIT_CONFIG, EXIT_BACKEND, EXIT_INVARIANT, EXIT_ARCHIVE = 0, 2, 3, 4, 5

log = logging.getLogger("somarena")


def _load(args) -> MatchConfig:
    if not args.config:
        raise ConfigError("--config is required")
    cfg = load_match_config(args.config)
    return cfg.with_overrides(
        seed=args.seed, backend=args.backend, parallelism=args.parallelism, freeze_eval=args.freeze_eval,
    )


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def _snapshot(cfg: MatchConfig, out: Path) -> None:
    rules = {}
    for name, b in sorted(cfg.backends.items()):
        if b.kind == "scripted":
            rules[name] = Path(b.rules).read_text(encoding="utf-8")
    _write(out / "config.json", json.dumps({"config": cfg.to_dict(), "rules": rules},
                                           sort_keys=True, indent=2, ensure_ascii=False) + "\n")


def _outcome(report: MatchReport) -> int:
    problems = check_invariants(report)
    for p in problems:
        log.error("invariant check failed: %s", p)
    kinds = report.validity()["by_kind"]
    if problems or kinds.get("invariant"):
        return EXIT_INVARIANT
    if kinds.get("backend"):
        log.error("%d episode(s) invalid after backend failures", kinds["backend"])
        return EXIT_BACKEND
    return EXIT_OK


def _write_report(report: MatchReport, out: Path) -> None:
    _write(out / "report.txt", render_report(report, "table"))
    _write(out / "report.json", render_report(report, "json"))


def _write_models(report_models, out: Path) -> list[Path]:
    paths = []
    for name, model in report_models:
        path = out / "models" / f"{name}{EXTENSION}"
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(save_model(model))
        paths.append(path)
    return paths


def _run(cfg: MatchConfig, out: Path, **kwargs):
    models = []
    report = run_match(cfg, log_dir=out / "logs", **kwargs)
    for cell in report.cells:
        for run in cell.runs:
            for seat, model in sorted(run.models.items()):
                models.append((f"{cell.evaluated}__vs__{cell.opponent}__run{run.run}__seat{seat}", model))
    return report, models


def cmd_run(args) -> int:
    cfg = _load(args)
    out = Path(args.out)
    _snapshot(cfg, out)
    if args.ablation:
        ablation, matches = run_ablation(cfg, log_dir=out / "logs")
        _write(out / "ablation.txt", render_ablation(ablation, "table"))
        _write(out / "ablation.json", render_ablation(ablation, "json"))
        sys.stdout.write(render_ablation(ablation, "table"))
        return max(_outcome(m) for m in matches)
    report, models = _run(cfg, out)
    _write_report(report, out)
    _write_models(models, out)
    sys.stdout.write(render_report(report, "table"))
    return _outcome(report)


def cmd_report(args) -> int:
    out = Path(args.out)
    name = "ablation.json" if args.ablation else "report.json"
    try:
        data = json.loads((out / name).read_text(encoding="utf-8"))
    except (OSError, ValueError) as err:
        raise ConfigError(f"cannot read {out / name}: {err}") from None
    if args.ablation:
        ablation = AblationReport(data["agent"], [AblationRow(**r) for r in data["rows"]])
        sys.stdout.write(render_ablation(ablation, args.format))
        return EXIT_OK
    report = MatchReport.from_dict(data)
    sys.stdout.write(render_report(report, args.format))
    return _outcome(report)


def _agent_seat(cfg: MatchConfig, agent: str) -> None:
    if agent not in cfg.agents or cfg.agents[agent].kind != "som":
        raise ConfigError(f"{agent!r} is not a SOM agent in this config")
    if not any(agent in c.seats for c in cfg.cells()):
        raise ConfigError(f"{agent!r} does not play in any cell")


def cmd_export_model(args) -> int:
    """Run the match and export the named agent's model from its first seat in the first run."""
    cfg = _load(args)
    _agent_seat(cfg, args.agent)
    out = Path(args.out)
    _snapshot(cfg, out)
    report, models = _run(cfg, out)
    _write_report(report, out)
    for cell in report.cells:
        if args.agent in cell.seats:
            seat = cell.seats.index(args.agent)
            model = cell.runs[0].models[seat]
            break
    data = save_model(model, include_graph=not args.exclude_graph, include_pools=not args.exclude_pools)
    path = out / f"{args.agent}{EXTENSION}"
    path.write_bytes(data)
    print(f"wrote {path}")
    return _outcome(report)


def cmd_import_model(args) -> int:
    cfg = _load(args)
    _agent_seat(cfg, args.agent)
    model = read_model(args.archive)
    if model.game and model.game != cfg.game.kind:
        raise ArchiveError(f"archive was built for {model.game!r}, config plays {cfg.game.kind!r}", "game")
    out = Path(args.out)
    _snapshot(cfg, out)
    frozen = [args.agent] if args.frozen else []
    report, models = _run(cfg, out, initial_models={args.agent: model}, frozen_agents=frozen)
    _write_report(report, out)
    _write_models(models, out)
    sys.stdout.write(render_report(report, "table"))
    return _outcome(report)


def cmd_validate_config(args) -> int:
    cfg = _load(args)
    cfg.build_backends()
    cells = cfg.cells()
    print(f"ok: {cfg.game.kind}, {cfg.game.num_players} players, {len(cells)} cell(s), "
          f"{cfg.runs} run(s) x ({cfg.warmup} warm-up + {cfg.eval} eval) episodes")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="somarena", description="Opponent-modeling game tournaments.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_out=True):
        p.add_argument("--config", help="match config (TOML)")
        if needs_out:
            p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--seed", type=int, help="override the match and game seed")
        p.add_argument("--backend", help="use this configured backend for every reasoning agent")
        p.add_argument("--parallelism", type=int, help="concurrent runs")
        p.add_argument("--freeze-eval", action=argparse.BooleanOptionalAction, default=None,
                       help="freeze opponent models during evaluation")
        p.add_argument("--log-level", default="WARNING", help="DEBUG, INFO, WARNING or ERROR")

    p = sub.add_parser("run", help="run a match (or the ablation ladder) and write artifacts")
    common(p)
    p.add_argument("--ablation", action="store_true", help="run the five component variants")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("report", help="re-render a saved report")
    p.add_argument("--out", required=True, help="output directory of an earlier run")
    p.add_argument("--format", choices=FORMATS, default="table")
    p.add_argument("--ablation", action="store_true", help="render ablation.json instead")
    p.add_argument("--log-level", default="WARNING")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("export-model", help="run a match and export one SOM agent's model")
    common(p)
    p.add_argument("--agent", required=True)
    p.add_argument("--exclude-graph", action="store_true", help="keep only the observation/action skeleton")
    p.add_argument("--exclude-pools", action="store_true", help="drop the example pools")
    p.set_defaults(func=cmd_export_model)

    p = sub.add_parser("import-model", help="run a match with a SOM agent starting from an archive")
    common(p)
    p.add_argument("--agent", required=True)
    p.add_argument("--archive", required=True)
    p.add_argument("--frozen", action="store_true", help="never update the imported model")
    p.set_defaults(func=cmd_import_model)

    p = sub.add_parser("validate-config", help="check a config without running it")
    common(p, needs_out=False)
    p.set_defaults(func=cmd_validate_config)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=getattr(logging, str(args.log_level).upper(), logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except ConfigError as err:
        log.error("config error: %s", err)
        return EXIT_CONFIG
    except ArchiveError as err:
        log.error("archive rejected (%s): %s", err.invariant or "format", err)
        return EXIT_ARCHIVE
    except BackendError as err:
        log.error("backend failure: %s", err)
        return EXIT_BACKEND
    except GraphInvariantError as err:
        log.error("invariant violation: %s", err)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
