"""``simfigures render`` command line."""

from __future__ import annotations

import argparse

from .plots import PlotSpec, render
from .styles import load_styles


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="simfigures", description="Render simrsma CSV outputs.")
    sub = parser.add_subparsers(dest="command", required=True)
    render_p = sub.add_parser("render", help="render a sweep or convergence figure")
    render_p.add_argument("--kind", choices=("convergence", "sweep"), required=True)
    render_p.add_argument(
        "--in", dest="inputs", required=True,
        help="input CSV path(s), comma-separated for convergence traces",
    )
    render_p.add_argument("--out", required=True, help="output image (.svg, .png, or .pdf)")
    render_p.add_argument("--styles", default=None, help="JSON file overriding scheme styles")
    render_p.add_argument("--logx", action="store_true", help="log-scale x axis (power sweeps)")
    render_p.add_argument("--raw", action="store_true", help="also draw raw iterate traces, faint")
    render_p.add_argument("--xlabel", default=None)
    render_p.add_argument("--ylabel", default="minimum rate (bits/s/Hz)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    spec = PlotSpec(
        inputs=tuple(p.strip() for p in args.inputs.split(",") if p.strip()),
        kind=args.kind,
        output=args.out,
        styles=load_styles(args.styles),
        xlabel=args.xlabel,
        ylabel=args.ylabel,
        logx=args.logx,
        show_raw=args.raw,
    )
    path = render(spec)
    print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
