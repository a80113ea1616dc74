#!/usr/bin/env python3
"""Minimum rate versus inter-layer spacing (in wavelengths), desk scale.

Covers the region around the 5/24-wavelength peak for the two metasurface
schemes; writes results/spacing.csv and its summary.
"""

import argparse
from pathlib import Path

from simrsma.cli import main as cli_main


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", default="results", type=Path)
    parser.add_argument("--trials", type=int, default=30)
    parser.add_argument("--workers", type=int, default=2)
    parser.add_argument("--seed", type=int, default=11)
    args = parser.parse_args()
    args.out_dir.mkdir(parents=True, exist_ok=True)

    results = args.out_dir / "spacing.csv"
    config = Path(__file__).resolve().parent.parent / "configs" / "desk.cfg"
    values = ",".join(str(v) for v in (1 / 24, 1 / 12, 5 / 24, 1 / 4, 1 / 2, 1.0))
    cli_main(
        [
            "run",
            "--config", str(config),
            "--sweep", "spacing",
            "--values", values,
            "--schemes", "sim_hrsma,sim_rsma",
            "--trials", str(args.trials),
            "--seed", str(args.seed),
            "--workers", str(args.workers),
            "--out", str(results),
        ]
    )
    cli_main(["summarize", "--in", str(results), "--out", str(args.out_dir / "spacing_summary.csv")])


if __name__ == "__main__":
    main()
