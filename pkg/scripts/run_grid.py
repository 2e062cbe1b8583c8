"""Evaluated-by-opponent grid for one game config, written to an output directory.

    python3 scripts/run_grid.py configs/g08a_grid.toml --out runs/g08a [--seed 3]
"""

from __future__ import annotations

import argparse
import sys

from somarena.cli import main as cli_main


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("config")
    parser.add_argument("--out", required=True)
    parser.add_argument("--seed", type=int)
    args = parser.parse_args()
    argv = ["run", "--config", args.config, "--out", args.out]
    if args.seed is not None:
        argv += ["--seed", str(args.seed)]
    return cli_main(argv)


if __name__ == "__main__":
    sys.exit(main())
