"""Figure construction from fixed-schema CSV files.

Two figure kinds, matching the files the simulation CLI writes:

* ``loglog_error`` — log2 strong error against log2 step size from a
  convergence CSV, with a dashed slope-1 reference anchored at the
  finest data point and the fitted slope annotated.
* ``sample_paths`` — overlay of infected-count trajectories from one or
  more trajectory CSVs, with the domain bounds 0 and N drawn (and an
  optional extinction-threshold line).

Inputs are read-only, and the style is pinned so re-rendering identical
inputs produces identical bytes (SVG and PNG; no date metadata).
"""
from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

CONVERGENCE_HEADER = ["step_exponent", "delta", "error"]
TRAJECTORY_HEADER = ["t", "y", "I", "truncated"]

# deterministic output: fixed figure geometry, no randomized SVG ids,
# text kept as text (not glyph paths), date metadata suppressed at save
_STYLE = {
    "figure.figsize": (6.4, 4.8),
    "figure.dpi": 100,
    "savefig.dpi": 100,
    "svg.hashsalt": "plotview",
    "svg.fonttype": "none",
    "axes.grid": True,
    "grid.alpha": 0.3,
    "font.family": "DejaVu Sans",
}

_FORMATS = (".svg", ".png")


class SchemaError(Exception):
    """An input file is missing data or does not match its fixed schema."""


class FigureKind(Enum):
    LOGLOG_ERROR = "loglog_error"
    SAMPLE_PATHS = "sample_paths"


@dataclass(frozen=True)
class FigureSpec:
    """What to draw: input CSVs, figure kind, output path, labels.

    ``cap_n`` (the upper domain bound) is required for sample-path
    figures; ``threshold`` optionally adds a horizontal extinction
    threshold line to them.  Output format follows the extension of
    ``out`` and must be .svg or .png.
    """

    kind: FigureKind
    inputs: tuple[str, ...]
    out: str
    title: str = ""
    xlabel: str = ""
    ylabel: str = ""
    cap_n: Optional[float] = None
    threshold: Optional[float] = None


# ---------------------------------------------------------------------------
# CSV loading
# ---------------------------------------------------------------------------


def _read_rows(path: str, header: list[str]) -> list[list[str]]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            first = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file, expected header {','.join(header)}")
        if first != header:
            raise SchemaError(
                f"{path}: header {','.join(first)!r} does not match {','.join(header)!r}"
            )
        rows = [row for row in reader if row]
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    for row in rows:
        if len(row) != len(header):
            raise SchemaError(f"{path}: row {row!r} has {len(row)} fields, expected {len(header)}")
    return rows


def load_convergence(path: str) -> tuple[list[int], list[float], list[float]]:
    """Read a convergence CSV into (step exponents, step sizes, errors).

    Raises:
        SchemaError: wrong header, no rows, fewer than two rows,
            non-numeric fields, or non-positive step sizes / errors
            (which have no logarithm to plot).
    """
    rows = _read_rows(path, CONVERGENCE_HEADER)
    if len(rows) < 2:
        raise SchemaError(f"{path}: {len(rows)} data row(s), need at least 2 for a slope")
    exponents, deltas, errors = [], [], []
    for row in rows:
        try:
            exponents.append(int(row[0]))
            deltas.append(float(row[1]))
            errors.append(float(row[2]))
        except ValueError:
            raise SchemaError(f"{path}: non-numeric row {row!r}")
    if any(d <= 0 for d in deltas) or any(e <= 0 for e in errors):
        raise SchemaError(f"{path}: step sizes and errors must be positive on a log plot")
    return exponents, deltas, errors


def load_trajectory(path: str) -> tuple[list[float], list[float]]:
    """Read a trajectory CSV into (times, infected counts).

    The log-odds column may be empty (the classical scheme writes none);
    it is schema-checked but not plotted.
    """
    rows = _read_rows(path, TRAJECTORY_HEADER)
    times, infected = [], []
    for row in rows:
        try:
            times.append(float(row[0]))
            infected.append(float(row[2]))
            int(row[3])
        except ValueError:
            raise SchemaError(f"{path}: non-numeric row {row!r}")
    return times, infected


# ---------------------------------------------------------------------------
# figure construction
# ---------------------------------------------------------------------------


def _fit_slope(xs: list[float], ys: list[float]) -> float:
    n = len(xs)
    mean_x = sum(xs) / n
    mean_y = sum(ys) / n
    sxx = sum((x - mean_x) ** 2 for x in xs)
    if sxx == 0.0:
        raise SchemaError("all step sizes identical; slope undefined")
    sxy = sum((x - mean_x) * (y - mean_y) for x, y in zip(xs, ys))
    return sxy / sxx


def _reference_endpoints(
    log_deltas: list[float], log_errors: list[float]
) -> tuple[tuple[float, float], tuple[float, float]]:
    """Slope-1 segment through the finest data point, spanning the data."""
    finest = min(range(len(log_deltas)), key=lambda i: log_deltas[i])
    x0, y0 = log_deltas[finest], log_errors[finest]
    x1 = max(log_deltas)
    return (x0, y0), (x1, y0 + (x1 - x0))


def _check_spec(spec: FigureSpec, expected: FigureKind) -> None:
    if spec.kind is not expected:
        raise SchemaError(f"spec kind {spec.kind.value} does not match {expected.value}")
    ext = os.path.splitext(spec.out)[1].lower()
    if ext not in _FORMATS:
        raise SchemaError(f"output {spec.out!r}: format must be one of {'/'.join(_FORMATS)}")
    if not spec.inputs:
        raise SchemaError("no input files given")


def _save(fig, out: str) -> None:
    # element ids are salted at save time, so the pinned style must wrap
    # savefig too; Date: None strips the SVG <dc:date> stamp (PNG has none)
    with plt.rc_context(_STYLE):
        fig.savefig(out, metadata={"Date": None} if out.lower().endswith(".svg") else None)
    plt.close(fig)


def build_loglog_figure(spec: FigureSpec):
    """Assemble the log-log error figure; returns (figure, fitted slope)."""
    _check_spec(spec, FigureKind.LOGLOG_ERROR)
    if len(spec.inputs) != 1:
        raise SchemaError(f"loglog_error takes exactly one CSV, got {len(spec.inputs)}")
    _, deltas, errors = load_convergence(spec.inputs[0])
    order = sorted(range(len(deltas)), key=lambda i: deltas[i])
    log_d = [math.log2(deltas[i]) for i in order]
    log_e = [math.log2(errors[i]) for i in order]
    slope = _fit_slope(log_d, log_e)
    (x0, y0), (x1, y1) = _reference_endpoints(log_d, log_e)

    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        ax.plot(log_d, log_e, "o-", color="tab:blue", label="strong error")
        ax.plot([x0, x1], [y0, y1], "--", color="tab:red", label="slope-1 reference")
        ax.annotate(
            f"slope = {slope:.2f}",
            xy=(0.05, 0.92),
            xycoords="axes fraction",
            fontsize=11,
        )
        ax.set_xlabel(spec.xlabel or "log2(step size)")
        ax.set_ylabel(spec.ylabel or "log2(strong error)")
        if spec.title:
            ax.set_title(spec.title)
        ax.legend(loc="lower right")
    return fig, slope


def plot_loglog(spec: FigureSpec) -> float:
    """Render the log-log error figure to ``spec.out``; returns the fitted slope."""
    fig, slope = build_loglog_figure(spec)
    _save(fig, spec.out)
    return slope


def build_paths_figure(spec: FigureSpec):
    """Assemble the sample-path overlay; returns (figure, number of paths)."""
    _check_spec(spec, FigureKind.SAMPLE_PATHS)
    if spec.cap_n is None or spec.cap_n <= 0:
        raise SchemaError("sample_paths needs the population size N (cap_n > 0)")
    series = [load_trajectory(path) for path in spec.inputs]

    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        for times, infected in series:
            ax.plot(times, infected, linewidth=1.0)
        ax.axhline(0.0, color="black", linewidth=1.2)
        ax.axhline(spec.cap_n, color="black", linewidth=1.2, linestyle="--")
        if spec.threshold is not None:
            ax.axhline(spec.threshold, color="tab:red", linewidth=1.0, linestyle=":")
        ax.set_xlabel(spec.xlabel or "t")
        ax.set_ylabel(spec.ylabel or "infected count")
        if spec.title:
            ax.set_title(spec.title)
    return fig, len(series)


def plot_paths(spec: FigureSpec) -> int:
    """Render the sample-path overlay to ``spec.out``; returns the path count."""
    fig, count = build_paths_figure(spec)
    _save(fig, spec.out)
    return count
