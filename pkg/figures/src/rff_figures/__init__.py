"""Figure rendering for rff-lab CSV outputs."""

__version__ = "0.1.0"

from .render import FigureSpec, build_figure, discover_specs, render

__all__ = ["FigureSpec", "build_figure", "discover_specs", "render"]
