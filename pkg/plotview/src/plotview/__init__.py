"""Batch figure rendering for the simulation CLI's CSV outputs.

Consumes only the fixed CSV schemas (``step_exponent,delta,error`` and
``t,y,I,truncated``); byte-stable re-rendering to SVG/PNG.
"""
from .render import (
    CONVERGENCE_HEADER,
    TRAJECTORY_HEADER,
    FigureKind,
    FigureSpec,
    SchemaError,
    build_loglog_figure,
    build_paths_figure,
    load_convergence,
    load_trajectory,
    plot_loglog,
    plot_paths,
)

__all__ = [
    "CONVERGENCE_HEADER",
    "TRAJECTORY_HEADER",
    "FigureKind",
    "FigureSpec",
    "SchemaError",
    "build_loglog_figure",
    "build_paths_figure",
    "load_convergence",
    "load_trajectory",
    "plot_loglog",
    "plot_paths",
]
