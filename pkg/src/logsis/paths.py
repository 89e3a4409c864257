"""Reproducible Brownian increment grids with dyadic coarsening.

Each path owns an independent random stream produced by the counter-based
Philox bit generator keyed with (seed, path_index), so path j's increments
never depend on how many other paths were generated or in which order.
Gaussians come from numpy's ziggurat ``standard_normal``; for a fixed
numpy build the whole grid is a pure function of (seed, path_index,
fine_exponent, horizon).

Coarse increments are formed by summing adjacent pairs one dyadic level
at a time.  That tree order makes multi-stage coarsening bitwise
identical to direct coarsening, which floating-point addition would not
grant to a flat left-to-right sum.
"""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np


class ExponentError(ValueError):
    """Raised when a dyadic exponent is out of range or finer than the grid."""


class CapacityError(ValueError):
    """Raised when a requested grid exceeds the in-memory step budget."""


# Eagerly materialized grids beyond this many increments must use the
# streaming interface instead.
MAX_EAGER_STEPS = 1 << 24

_HEADER = struct.Struct("<QQqd")


def _step_count(horizon: float, dt: float) -> int:
    """Number of increments covering the horizon, robust to one-ulp ratio error."""
    ratio = horizon / dt
    return math.ceil(ratio - 1e-9)


def _path_generator(seed: int, path_index: int) -> np.random.Generator:
    """Independent Gaussian stream for one path, keyed by (seed, path_index)."""
    bitgen = np.random.Philox(key=np.array([seed, path_index], dtype=np.uint64))
    return np.random.Generator(bitgen)


@dataclass(frozen=True)
class BrownianGrid:
    """Increments of one Brownian path sampled on a uniform grid.

    Attributes:
        seed: stream seed shared by a whole study.
        path_index: which path within the study this grid belongs to.
        fine_exponent: L such that dt = 2**-L, or None for an explicit dt.
        horizon: time horizon T covered by the increments.
        dt: spacing of the grid; each increment is N(0, dt).
        increments: float64 array of length ceil(T / dt).
    """

    seed: int
    path_index: int
    fine_exponent: Optional[int]
    horizon: float
    dt: float
    increments: np.ndarray

    def __post_init__(self) -> None:
        if self.fine_exponent is not None and self.dt != 2.0 ** -self.fine_exponent:
            raise ExponentError(
                f"dt={self.dt} inconsistent with fine_exponent={self.fine_exponent}"
            )


def _validate_key(seed: int, path_index: int) -> None:
    if not (0 <= seed < 2**64):
        raise ExponentError(f"seed must fit in an unsigned 64-bit integer, got {seed}")
    if not (0 <= path_index < 2**64):
        raise ExponentError(f"path_index must fit in an unsigned 64-bit integer, got {path_index}")


def generate(seed: int, path_index: int, fine_exponent: int, horizon: float) -> BrownianGrid:
    """Materialize the dyadic increment grid for one path.

    Args:
        seed: study-level seed.
        path_index: path number, determines the independent substream.
        fine_exponent: L, grid spacing dt = 2**-L.
        horizon: time horizon T > 0.

    Raises:
        CapacityError: if ceil(T * 2**L) exceeds the eager budget of
            ``MAX_EAGER_STEPS``; use :func:`stream_increments` instead.
    """
    _validate_key(seed, path_index)
    if fine_exponent < 0 or fine_exponent > 62:
        raise ExponentError(f"fine_exponent must lie in [0, 62], got {fine_exponent}")
    if not (horizon > 0) or not math.isfinite(horizon):
        raise ExponentError(f"horizon must be a finite positive time, got {horizon}")
    dt = 2.0**-fine_exponent
    count = _step_count(horizon, dt)
    if count > MAX_EAGER_STEPS:
        raise CapacityError(
            f"grid of {count} increments exceeds the eager budget {MAX_EAGER_STEPS}; "
            "use stream_increments"
        )
    rng = _path_generator(seed, path_index)
    increments = rng.standard_normal(count) * math.sqrt(dt)
    return BrownianGrid(
        seed=seed,
        path_index=path_index,
        fine_exponent=fine_exponent,
        horizon=horizon,
        dt=dt,
        increments=increments,
    )


def generate_at(seed: int, path_index: int, dt: float, horizon: float) -> BrownianGrid:
    """Materialize increments at an explicit, possibly non-dyadic spacing.

    Used by fixed-step runs (e.g. extinction scans at dt = 1e-2) where
    dyadic coupling across resolutions is not needed.  Such grids cannot
    be coarsened.
    """
    _validate_key(seed, path_index)
    if not (0 < dt) or not math.isfinite(dt):
        raise ExponentError(f"dt must be a finite positive spacing, got {dt}")
    if not (horizon > 0) or not math.isfinite(horizon):
        raise ExponentError(f"horizon must be a finite positive time, got {horizon}")
    count = _step_count(horizon, dt)
    if count > MAX_EAGER_STEPS:
        raise CapacityError(
            f"grid of {count} increments exceeds the eager budget {MAX_EAGER_STEPS}"
        )
    rng = _path_generator(seed, path_index)
    increments = rng.standard_normal(count) * math.sqrt(dt)
    return BrownianGrid(
        seed=seed,
        path_index=path_index,
        fine_exponent=None,
        horizon=horizon,
        dt=dt,
        increments=increments,
    )


def stream_increments(
    seed: int,
    path_index: int,
    fine_exponent: int,
    horizon: float,
    chunk_size: int = 1 << 16,
) -> Iterator[np.ndarray]:
    """Yield the same increment sequence as :func:`generate`, in chunks.

    The Gaussian stream carries its state across chunks, so concatenating
    the yielded arrays reproduces the eager grid bit for bit while never
    holding more than ``chunk_size`` increments at once.
    """
    _validate_key(seed, path_index)
    if fine_exponent < 0 or fine_exponent > 62:
        raise ExponentError(f"fine_exponent must lie in [0, 62], got {fine_exponent}")
    if chunk_size <= 0:
        raise CapacityError(f"chunk_size must be positive, got {chunk_size}")
    dt = 2.0**-fine_exponent
    remaining = _step_count(horizon, dt)
    scale = math.sqrt(dt)
    rng = _path_generator(seed, path_index)
    while remaining > 0:
        block = min(chunk_size, remaining)
        yield rng.standard_normal(block) * scale
        remaining -= block


def coarsen(grid: BrownianGrid, coarse_exponent: int) -> BrownianGrid:
    """Aggregate a dyadic grid to spacing 2**-coarse_exponent.

    Each coarse increment is the sum of the 2**(L - l) fine increments it
    spans, accumulated pairwise one level at a time.  Coarsening to l2 and
    then to l1 therefore yields bitwise the same grid as coarsening
    straight to l1.

    Raises:
        ExponentError: if the grid is non-dyadic, the target is finer than
            the grid, or the increment count does not split into whole
            coarse steps.
    """
    if grid.fine_exponent is None:
        raise ExponentError("cannot coarsen a grid generated at an explicit dt")
    if coarse_exponent > grid.fine_exponent:
        raise ExponentError(
            f"coarse_exponent={coarse_exponent} finer than grid exponent {grid.fine_exponent}"
        )
    if coarse_exponent < 0:
        raise ExponentError(f"coarse_exponent must be >= 0, got {coarse_exponent}")
    levels = grid.fine_exponent - coarse_exponent
    merged = grid.increments
    if merged.size % (1 << levels) != 0:
        raise ExponentError(
            f"{merged.size} increments do not split into whole 2**{levels}-step blocks"
        )
    for _ in range(levels):
        merged = merged[0::2] + merged[1::2]
    return BrownianGrid(
        seed=grid.seed,
        path_index=grid.path_index,
        fine_exponent=coarse_exponent,
        horizon=grid.horizon,
        dt=2.0**-coarse_exponent,
        increments=merged,
    )


def dump_grid(grid: BrownianGrid, path: str) -> None:
    """Write a grid to a little-endian binary file for offline inspection.

    Layout: header (seed u64, path_index u64, fine_exponent i64 with -1
    meaning explicit dt, horizon f64, dt f64) followed by the raw float64
    increments.
    """
    exponent = -1 if grid.fine_exponent is None else grid.fine_exponent
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(grid.seed, grid.path_index, exponent, grid.horizon))
        fh.write(struct.pack("<d", grid.dt))
        fh.write(grid.increments.astype("<f8", copy=False).tobytes())


def load_grid(path: str) -> BrownianGrid:
    """Read a grid written by :func:`dump_grid`."""
    with open(path, "rb") as fh:
        seed, path_index, exponent, horizon = _HEADER.unpack(fh.read(_HEADER.size))
        (dt,) = struct.unpack("<d", fh.read(8))
        increments = np.frombuffer(fh.read(), dtype="<f8").copy()
    return BrownianGrid(
        seed=seed,
        path_index=path_index,
        fine_exponent=None if exponent == -1 else exponent,
        horizon=horizon,
        dt=dt,
        increments=increments,
    )
