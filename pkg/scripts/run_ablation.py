"""Component ablation on a match config (defaults to the learnability fixture).

    python3 scripts/run_ablation.py [--config configs/learnability.toml] [--agent som] [--json]
"""

from __future__ import annotations

import argparse
from pathlib import Path

from somarena.tournament.ablation import run_ablation
from somarena.tournament.config import load_match_config
from somarena.tournament.report import render_ablation

ROOT = Path(__file__).resolve().parent.parent


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--config", default=str(ROOT / "configs" / "learnability.toml"))
    parser.add_argument("--agent", default=None, help="evaluated SOM agent, if the config has several")
    parser.add_argument("--json", action="store_true")
    args = parser.parse_args()
    ablation, _ = run_ablation(load_match_config(args.config), agent=args.agent)
    print(render_ablation(ablation, "json" if args.json else "table"), end="")


if __name__ == "__main__":
    main()
