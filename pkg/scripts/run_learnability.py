"""Learnability curve: per-round prediction deviation of the SOM agent against the follow-target rule.

    python3 scripts/run_learnability.py [--config configs/learnability.toml] [--runs 3]
"""

from __future__ import annotations

import argparse
from dataclasses import replace
from pathlib import Path

from somarena.tournament import run_match
from somarena.tournament.config import load_match_config
from somarena.tournament.metrics import prediction_deviation

ROOT = Path(__file__).resolve().parent.parent


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--config", default=str(ROOT / "configs" / "learnability.toml"))
    parser.add_argument("--runs", type=int, default=None)
    args = parser.parse_args()
    cfg = load_match_config(args.config)
    if args.runs:
        cfg = replace(cfg, runs=args.runs)
    report = run_match(cfg)
    rng = report.spec.action_range()
    span = rng[1] - rng[0]
    print("run  phase   episode  deviation per round (%)")
    for run in report.cells[0].runs:
        for rec in run.warmup + run.eval:
            by_round: dict[int, list] = {}
            for p in rec.predictions:
                if p["observer"] == 0:
                    by_round.setdefault(p["round"], []).append((p["predicted"], p["actual"]))
            curve = [prediction_deviation(by_round[r], span) for r in sorted(by_round)]
            cells = " ".join(f"{d:5.1f}" for d in curve)
            print(f"{run.run:3d}  {rec.phase:6s}  {rec.episode:7d}  {cells}")


if __name__ == "__main__":
    main()
