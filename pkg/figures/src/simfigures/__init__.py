"""Publication-style plots for simrsma sweep and convergence CSV files."""

from .plots import PlotSpec, render, render_convergence, render_sweep, save_figure
from .styles import SCHEME_STYLES, load_styles

__all__ = [
    "PlotSpec",
    "SCHEME_STYLES",
    "load_styles",
    "render",
    "render_convergence",
    "render_sweep",
    "save_figure",
]
