"""Explicit one-step maps and trajectory integration for the SIS diffusion.

Three schemes share one driver:

* ``CLASSICAL_EM``: Euler-Maruyama applied to the infected count itself.
  Nothing stops an iterate from leaving (0, N); excursions are counted as
  domain exits.  Kept as the baseline the transformed schemes improve on.
* ``LOG_EM``: Euler-Maruyama in log-odds coordinates.  Iterates map back
  into (0, N) automatically, but the e^y removal term can blow up when an
  iterate runs far to the right.
* ``LOG_TEM``: LOG_EM followed by the cap y <- min(y, log(K / sqrt(dt))),
  which tames the removal term while vanishing from the limit as dt -> 0.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import paths as paths_mod
from .model import SisParams
from .paths import BrownianGrid, ExponentError
from .transform import drift_f, forward, inverse


class ConfigError(ValueError):
    """Raised when a scheme configuration violates one of its constraints."""


class SchemeKind(enum.Enum):
    CLASSICAL_EM = "em"
    LOG_EM = "logem"
    LOG_TEM = "logtem"


def default_cap_multiplier(params: SisParams) -> float:
    """Default truncation constant K = 2*(1 + exp(Y0)), twice the lower bound."""
    return 2.0 * (1.0 + math.exp(forward(params.i0, params)))


def truncation_cap(cap_multiplier: float, dt: float) -> float:
    """Cap value log(K / sqrt(dt)) applied to log-odds iterates."""
    return math.log(cap_multiplier) - 0.5 * math.log(dt)


@dataclass(frozen=True)
class SchemeConfig:
    """Scheme selection plus stepping, truncation and recording controls.

    Exactly one of ``step_exponent`` (dt = 2**-l, couples to dyadic
    Brownian grids) and ``explicit_dt`` must be given.  ``cap_multiplier``
    of None means the default 2*(1 + exp(Y0)); ``math.inf`` disables the
    cap, which is the hook for checking that truncation never engages.

    ``record_stride`` keeps every s-th state (plus the final one) so long
    runs need not hold every step in memory.  ``record_pre_truncation``
    additionally stores the uncapped proposals, for tests that examine
    the truncation ordering.
    """

    scheme: SchemeKind
    horizon: float
    step_exponent: Optional[int] = None
    explicit_dt: Optional[float] = None
    cap_multiplier: Optional[float] = None
    record_stride: int = 1
    record_pre_truncation: bool = False

    def __post_init__(self) -> None:
        if (self.step_exponent is None) == (self.explicit_dt is None):
            raise ConfigError("exactly one of step_exponent and explicit_dt must be set")
        if self.step_exponent is not None and not (0 < self.step_exponent <= 62):
            raise ConfigError(f"step_exponent must lie in [1, 62], got {self.step_exponent}")
        if self.explicit_dt is not None and not (0.0 < self.explicit_dt):
            raise ConfigError(f"explicit_dt must be positive, got {self.explicit_dt}")
        if not (self.horizon > 0) or not math.isfinite(self.horizon):
            raise ConfigError(f"horizon must be a finite positive time, got {self.horizon}")
        if self.scheme is SchemeKind.LOG_TEM and not (0.0 < self.dt < 1.0):
            raise ConfigError(f"LOG_TEM requires dt in (0, 1), got {self.dt}")
        if self.record_stride < 1:
            raise ConfigError(f"record_stride must be >= 1, got {self.record_stride}")
        if self.cap_multiplier is not None and not self.cap_multiplier > 0:
            raise ConfigError(f"cap_multiplier must be positive, got {self.cap_multiplier}")

    @property
    def dt(self) -> float:
        """Step size resolved from the exponent or taken verbatim."""
        if self.step_exponent is not None:
            return 2.0**-self.step_exponent
        assert self.explicit_dt is not None
        return self.explicit_dt


@dataclass(frozen=True)
class TrajectoryRecord:
    """States of one integrated path at the recorded grid times.

    ``y_states`` is None for CLASSICAL_EM, otherwise ``i_states`` is the
    image of ``y_states`` under the inverse transform index by index.
    ``truncation_count`` and ``domain_exits`` count events over all steps,
    recorded or not; ``truncated_flags[r]`` marks whether any step since
    the previous recorded time was capped.  ``boundary_saturated``
    reports whether any recorded infected count sits exactly on 0 or N
    through floating-point saturation.
    """

    params: SisParams
    scheme: SchemeKind
    dt: float
    times: np.ndarray
    i_states: np.ndarray
    y_states: Optional[np.ndarray]
    truncation_count: int
    domain_exits: int
    boundary_saturated: bool
    cap: Optional[float]
    truncated_flags: Optional[np.ndarray] = field(default=None)
    pre_truncation: Optional[np.ndarray] = field(default=None)

    @property
    def s_states(self) -> np.ndarray:
        """Susceptible counts, defined as N - I so S + I = N by construction."""
        return self.params.cap_n - self.i_states


def step_log_em(y: float, db: float, dt: float, params: SisParams) -> float:
    """One Euler-Maruyama step of the log-odds process."""
    return y + drift_f(y, params) * dt + params.sigma_n * db


def step_log_tem(
    y: float, db: float, dt: float, params: SisParams, cap_multiplier: float
) -> tuple[float, bool]:
    """One truncated step: the LOG_EM proposal capped at log(K / sqrt(dt)).

    Returns:
        (next state, True when the cap engaged).
    """
    proposal = step_log_em(y, db, dt, params)
    cap = truncation_cap(cap_multiplier, dt)
    if proposal > cap:
        return cap, True
    return proposal, False


def step_classical_em(i: float, db: float, dt: float, params: SisParams) -> tuple[float, bool]:
    """One Euler-Maruyama step on the infected count itself.

    Returns:
        (next state, True when the result left the open interval (0, N)).
    """
    drift = params.eta * i - params.beta * i * i
    diffusion = params.sigma * i * (params.cap_n - i)
    i_next = i + drift * dt + diffusion * db
    return i_next, not (0.0 < i_next < params.cap_n)


def _resolve_increments(config: SchemeConfig, grid: BrownianGrid) -> np.ndarray:
    """Increments of the grid at the config's step size, coarsening if needed."""
    dt = config.dt
    if config.step_exponent is not None:
        if grid.fine_exponent is None:
            if grid.dt != dt:
                raise ExponentError(
                    f"explicit grid spacing {grid.dt} does not match dt=2**-{config.step_exponent}"
                )
            return grid.increments
        if grid.fine_exponent < config.step_exponent:
            raise ExponentError(
                f"grid at exponent {grid.fine_exponent} too coarse for step exponent "
                f"{config.step_exponent}"
            )
        if grid.fine_exponent == config.step_exponent:
            return grid.increments
        return paths_mod.coarsen(grid, config.step_exponent).increments
    if grid.dt != dt:
        raise ExponentError(f"grid spacing {grid.dt} does not match explicit_dt={dt}")
    return grid.increments


def _step_count(horizon: float, dt: float) -> int:
    """Number of whole steps floor(T / dt), robust to one-ulp ratio error."""
    return math.floor(horizon / dt + 1e-9)


def run_trajectory(params: SisParams, config: SchemeConfig, grid: BrownianGrid) -> TrajectoryRecord:
    """Integrate one path of the configured scheme over the grid's increments.

    The run covers floor(horizon / dt) steps; a horizon shorter than one
    step yields a record holding only the initial state.  The grid must
    supply at least that many increments at the config's spacing.

    Returns a record that is a pure function of (params, config, grid).
    """
    increments = _resolve_increments(config, grid)
    dt = config.dt
    n_steps = _step_count(config.horizon, dt)
    if n_steps > increments.size:
        raise ExponentError(
            f"grid supplies {increments.size} increments, {n_steps} needed for horizon "
            f"{config.horizon}"
        )

    stride = config.record_stride
    recorded_ks = list(range(0, n_steps + 1, stride))
    if recorded_ks[-1] != n_steps:
        recorded_ks.append(n_steps)
    times = np.array(recorded_ks, dtype=np.float64) * dt

    if config.scheme is SchemeKind.CLASSICAL_EM:
        return _run_classical(params, config, increments, n_steps, recorded_ks, times, dt)
    return _run_log(params, config, increments, n_steps, recorded_ks, times, dt)


def _run_classical(
    params: SisParams,
    config: SchemeConfig,
    increments: np.ndarray,
    n_steps: int,
    recorded_ks: list[int],
    times: np.ndarray,
    dt: float,
) -> TrajectoryRecord:
    i_states = np.empty(len(recorded_ks), dtype=np.float64)
    # Python floats in the hot loop: identical IEEE doubles, no numpy
    # scalar overhead, and overflow past the domain stays silent
    incs = increments[:n_steps].tolist()
    i = params.i0
    domain_exits = 0
    rec = 0
    if recorded_ks[rec] == 0:
        i_states[rec] = i
        rec += 1
    for k in range(n_steps):
        i, exited = step_classical_em(i, incs[k], dt, params)
        if exited:
            domain_exits += 1
        if rec < len(recorded_ks) and recorded_ks[rec] == k + 1:
            i_states[rec] = i
            rec += 1
    return TrajectoryRecord(
        params=params,
        scheme=config.scheme,
        dt=dt,
        times=times,
        i_states=i_states,
        y_states=None,
        truncation_count=0,
        domain_exits=domain_exits,
        boundary_saturated=bool(np.any(i_states <= 0.0) or np.any(i_states >= params.cap_n)),
        cap=None,
        truncated_flags=np.zeros(len(recorded_ks), dtype=np.uint8),
    )


def _run_log(
    params: SisParams,
    config: SchemeConfig,
    increments: np.ndarray,
    n_steps: int,
    recorded_ks: list[int],
    times: np.ndarray,
    dt: float,
) -> TrajectoryRecord:
    truncated_scheme = config.scheme is SchemeKind.LOG_TEM
    cap: Optional[float] = None
    if truncated_scheme:
        k_mult = config.cap_multiplier
        if k_mult is None:
            k_mult = default_cap_multiplier(params)
        floor_k = 1.0 + math.exp(forward(params.i0, params))
        if not k_mult > floor_k:
            raise ConfigError(
                f"cap_multiplier must exceed 1 + exp(Y0) = {floor_k}, got {k_mult}"
            )
        cap = truncation_cap(k_mult, dt)

    y_states = np.empty(len(recorded_ks), dtype=np.float64)
    truncated_flags = np.zeros(len(recorded_ks), dtype=np.uint8)
    pre_trunc = np.empty(n_steps, dtype=np.float64) if config.record_pre_truncation else None
    incs = increments[:n_steps].tolist()
    y = forward(params.i0, params)
    truncation_count = 0
    window_truncated = False
    rec = 0
    if recorded_ks[rec] == 0:
        y_states[rec] = y
        rec += 1
    for k in range(n_steps):
        proposal = step_log_em(y, incs[k], dt, params)
        if pre_trunc is not None:
            pre_trunc[k] = proposal
        if truncated_scheme and proposal > cap:
            y = cap
            truncation_count += 1
            window_truncated = True
        else:
            y = proposal
        if rec < len(recorded_ks) and recorded_ks[rec] == k + 1:
            y_states[rec] = y
            truncated_flags[rec] = 1 if window_truncated else 0
            window_truncated = False
            rec += 1

    i_states = np.array([inverse(v, params) for v in y_states], dtype=np.float64)
    saturated = bool(np.any(i_states <= 0.0) or np.any(i_states >= params.cap_n))
    return TrajectoryRecord(
        params=params,
        scheme=config.scheme,
        dt=dt,
        times=times,
        i_states=i_states,
        y_states=y_states,
        truncation_count=truncation_count,
        domain_exits=0,
        boundary_saturated=saturated,
        cap=cap,
        truncated_flags=truncated_flags,
        pre_truncation=pre_trunc,
    )
