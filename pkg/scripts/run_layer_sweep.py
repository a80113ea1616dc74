#!/usr/bin/env python3
"""Minimum rate versus stack depth for all six schemes, desk scale.

Produces results/layers.csv and results/layers_summary.csv; render the
summary with ``simfigures render --kind sweep``.
"""

import argparse
from pathlib import Path

from simrsma.cli import main as cli_main


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", default="results", type=Path)
    parser.add_argument("--trials", type=int, default=50)
    parser.add_argument("--workers", type=int, default=2)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()
    args.out_dir.mkdir(parents=True, exist_ok=True)

    results = args.out_dir / "layers.csv"
    config = Path(__file__).resolve().parent.parent / "configs" / "desk.cfg"
    cli_main(
        [
            "run",
            "--config", str(config),
            "--sweep", "layers",
            "--values", "2,3,4,5,6,7",
            "--trials", str(args.trials),
            "--seed", str(args.seed),
            "--workers", str(args.workers),
            "--out", str(results),
        ]
    )
    cli_main(["summarize", "--in", str(results), "--out", str(args.out_dir / "layers_summary.csv")])


if __name__ == "__main__":
    main()
