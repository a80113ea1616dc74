"""Fixed per-scheme plot styles, consistent across every figure."""

from __future__ import annotations

import json

SCHEME_STYLES: dict[str, dict] = {
    "sim_hrsma": {"color": "#d62728", "marker": "o", "linestyle": "-", "label": "SIM-HRSMA"},
    "sim_rsma": {"color": "#ff7f0e", "marker": "s", "linestyle": "-", "label": "SIM-RSMA"},
    "hbf_hrsma": {"color": "#1f77b4", "marker": "^", "linestyle": "--", "label": "HBF-HRSMA"},
    "hbf_rsma": {"color": "#17becf", "marker": "v", "linestyle": "--", "label": "HBF-RSMA"},
    "np_hrsma": {"color": "#2ca02c", "marker": "D", "linestyle": ":", "label": "NP-HRSMA"},
    "np_rsma": {"color": "#9467bd", "marker": "x", "linestyle": ":", "label": "NP-RSMA"},
}

TRACE_COLORS = ["#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"]


def load_styles(path=None) -> dict[str, dict]:
    """Built-in scheme styles, optionally overlaid from a JSON file."""
    styles = {k: dict(v) for k, v in SCHEME_STYLES.items()}
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            for scheme, overrides in json.load(fh).items():
                styles.setdefault(scheme, {}).update(overrides)
    return styles
