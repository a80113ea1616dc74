"""Render sweep curves and convergence traces from harness CSV files.

Outputs are byte-deterministic for fixed inputs: the SVG id hash salt is
pinned and date metadata is stripped, so re-rendering a figure from the same
CSVs reproduces the file exactly.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .styles import TRACE_COLORS, load_styles

matplotlib.rcParams["svg.hashsalt"] = "simfigures"

TRACE_COLUMNS = ("t", "r_min_raw", "r_min_incumbent")
SUMMARY_COLUMNS = (
    "sweep_param",
    "sweep_value",
    "scheme",
    "trials",
    "mean_r_min_bpshz",
    "stderr_r_min_bpshz",
)

SWEEP_AXIS_LABELS = {
    "layers": "metasurface layers",
    "elements": "elements per layer",
    "antennas": "active BS antennas",
    "power": "transmit power (dBm)",
    "users": "users",
    "spacing": "layer spacing (wavelengths)",
}


@dataclass(frozen=True)
class PlotSpec:
    """What to render: inputs, kind, labels, destination, styling."""

    inputs: tuple[str, ...]
    kind: str  # "convergence" | "sweep"
    output: str
    styles: dict = field(default_factory=load_styles)
    xlabel: str | None = None
    ylabel: str = "minimum rate (bits/s/Hz)"
    logx: bool = False
    show_raw: bool = False

    def __post_init__(self):
        if self.kind not in ("convergence", "sweep"):
            raise ValueError(f"PlotSpec: kind must be convergence or sweep, got {self.kind!r}")
        if not self.inputs:
            raise ValueError("PlotSpec: no input files")
        for path in self.inputs:
            if not Path(path).exists():
                raise FileNotFoundError(f"PlotSpec: input {path} does not exist")


def _read_csv(path) -> tuple[list[str], list[dict]]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        rows = list(reader)
        return list(reader.fieldnames or []), rows


def _require_columns(path, fieldnames, required) -> None:
    missing = [c for c in required if c not in fieldnames]
    if missing:
        raise ValueError(
            f"{path}: missing column(s) {missing}; found {fieldnames}"
        )


def render_convergence(spec: PlotSpec):
    """One incumbent curve per trace file (raw iterates optional, faint)."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for i, path in enumerate(spec.inputs):
        fieldnames, rows = _read_csv(path)
        _require_columns(path, fieldnames, TRACE_COLUMNS)
        t = [int(r["t"]) for r in rows]
        best = [float(r["r_min_incumbent"]) for r in rows]
        color = TRACE_COLORS[i % len(TRACE_COLORS)]
        label = Path(path).stem.replace("trace_", "")
        if spec.show_raw:
            raw = [float(r["r_min_raw"]) for r in rows]
            ax.plot(t, raw, color=color, alpha=0.25, linewidth=0.7)
        ax.plot(t, best, color=color, label=label, linewidth=1.6)
    ax.set_xlabel(spec.xlabel or "iteration")
    ax.set_ylabel(spec.ylabel)
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    return fig


def render_sweep(spec: PlotSpec):
    """Mean +/- standard error per scheme against the swept value."""
    if len(spec.inputs) != 1:
        raise ValueError("render_sweep: expected exactly one summary CSV")
    path = spec.inputs[0]
    fieldnames, rows = _read_csv(path)
    _require_columns(path, fieldnames, SUMMARY_COLUMNS)
    unknown = sorted({r["scheme"] for r in rows} - set(spec.styles))
    if unknown:
        raise ValueError(f"{path}: unknown scheme name(s) {unknown}")

    sweep_params = {r["sweep_param"] for r in rows}
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    schemes = sorted({r["scheme"] for r in rows}, key=lambda s: list(spec.styles).index(s))
    for scheme in schemes:
        series = sorted(
            (float(r["sweep_value"]), float(r["mean_r_min_bpshz"]), float(r["stderr_r_min_bpshz"]))
            for r in rows
            if r["scheme"] == scheme
        )
        x, mean, err = zip(*series)
        style = spec.styles[scheme]
        ax.errorbar(
            x,
            mean,
            yerr=err,
            color=style["color"],
            marker=style["marker"],
            linestyle=style["linestyle"],
            label=style.get("label", scheme),
            capsize=3,
            markersize=5,
        )
    if spec.logx:
        ax.set_xscale("log")
    default_xlabel = SWEEP_AXIS_LABELS.get(next(iter(sweep_params)), "sweep value")
    ax.set_xlabel(spec.xlabel or default_xlabel)
    ax.set_ylabel(spec.ylabel)
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    return fig


def save_figure(fig, output) -> None:
    """Deterministic save: pinned dpi, no date metadata."""
    output = Path(output)
    output.parent.mkdir(parents=True, exist_ok=True)
    suffix = output.suffix.lower()
    metadata = None
    if suffix == ".svg":
        metadata = {"Date": None}
    elif suffix == ".pdf":
        metadata = {"CreationDate": None}
    fig.savefig(output, dpi=150, metadata=metadata)
    plt.close(fig)


def render(spec: PlotSpec) -> Path:
    fig = render_convergence(spec) if spec.kind == "convergence" else render_sweep(spec)
    save_figure(fig, spec.output)
    return Path(spec.output)
