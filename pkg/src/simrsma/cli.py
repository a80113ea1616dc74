"""Command-line entry points: ``simrsma run`` and ``simrsma summarize``.

Every ``run`` flag can also be supplied through an environment variable named
``SIMRSMA_<FLAG>`` (flag upper-cased, dashes to underscores), e.g.
``SIMRSMA_TRIALS=50`` or ``SIMRSMA_TRACE_DIR=traces/``.  Explicit flags win
over the environment.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .baselines import SchemeId
from .harness import (
    SWEEP_PARAMETERS,
    SweepSpec,
    read_results,
    run_sweep,
    split_config,
    summarize,
    write_results,
    write_summary,
)
from .scenario import parse_config_file

ENV_PREFIX = "SIMRSMA_"

ALL_SCHEMES = ",".join(s.value for s in SchemeId)


def _env_default(flag: str, fallback):
    return os.environ.get(ENV_PREFIX + flag.upper().replace("-", "_"), fallback)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="simrsma",
        description="Batch link-level sweeps for the metasurface-assisted "
        "hierarchical rate-splitting downlink.",
        epilog=f"Flags double as environment variables with the {ENV_PREFIX} prefix "
        f"(e.g. {ENV_PREFIX}TRIALS, {ENV_PREFIX}OUT).",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a parameter sweep and write a results CSV")
    run_p.add_argument("--config", default=_env_default("config", None), help="key=value config file")
    run_p.add_argument(
        "--sweep",
        choices=SWEEP_PARAMETERS,
        default=_env_default("sweep", None),
        help="parameter to sweep (spacing values are in wavelengths, power in dBm)",
    )
    run_p.add_argument(
        "--values",
        default=_env_default("values", None),
        help="comma-separated sweep values",
    )
    run_p.add_argument(
        "--schemes",
        default=_env_default("schemes", ALL_SCHEMES),
        help=f"comma-separated scheme names (default: all of {ALL_SCHEMES})",
    )
    run_p.add_argument("--trials", type=int, default=int(_env_default("trials", 1)))
    run_p.add_argument("--seed", type=int, default=int(_env_default("seed", 0)))
    run_p.add_argument("--out", default=_env_default("out", None), help="results CSV path")
    run_p.add_argument("--workers", type=int, default=int(_env_default("workers", 1)))
    run_p.add_argument(
        "--trace-dir",
        default=_env_default("trace-dir", None),
        help="directory for per-solve convergence traces",
    )

    sum_p = sub.add_parser("summarize", help="aggregate a results CSV into mean +/- stderr")
    sum_p.add_argument("--in", dest="input", required=True, help="results CSV from `run`")
    sum_p.add_argument("--out", required=True, help="summary CSV path")
    return parser


def _cmd_run(args) -> int:
    if args.sweep is None or args.values is None or args.out is None:
        print("run: --sweep, --values and --out are required", file=sys.stderr)
        return 2
    base_config: dict = {}
    solver_config: dict = {}
    if args.config:
        base_config, solver_config = split_config(parse_config_file(args.config))
    values = tuple(float(v) for v in str(args.values).split(",") if v.strip())
    schemes = tuple(SchemeId.from_name(s) for s in str(args.schemes).split(",") if s.strip())
    spec = SweepSpec(
        parameter=args.sweep,
        values=values,
        schemes=schemes,
        trials=args.trials,
        master_seed=args.seed,
        base_config=base_config,
        solver_config=solver_config,
    )
    if args.trace_dir:
        Path(args.trace_dir).mkdir(parents=True, exist_ok=True)
    errors: list[str] = []
    results = run_sweep(spec, workers=args.workers, trace_dir=args.trace_dir, errors_out=errors)
    out = Path(args.out)
    if out.parent != Path(""):
        out.parent.mkdir(parents=True, exist_ok=True)
    write_results(out, results)
    print(f"wrote {len(results)} rows to {out}")
    if errors:
        err_path = Path(str(out) + ".errors.txt")
        err_path.write_text("\n".join(errors) + "\n", encoding="utf-8")
        print(f"{len(errors)} cell(s) failed; details in {err_path}", file=sys.stderr)
    return 0


def _cmd_summarize(args) -> int:
    rows = summarize(read_results(args.input))
    write_summary(args.out, rows)
    print(f"wrote {len(rows)} summary rows to {args.out}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "summarize":
        return _cmd_summarize(args)
    raise AssertionError(f"unhandled command {args.command!r}")


if __name__ == "__main__":
    raise SystemExit(main())
