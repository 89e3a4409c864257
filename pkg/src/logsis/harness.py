"""Monte Carlo studies: strong convergence order and extinction diagnostics.

The convergence study couples every coarse run to a fine reference run
through a shared dyadic Brownian grid, estimates

    Error(p; dt) = ( E[ sup_k |I_ref(t_k) - I_k|^p ] )^(1/p)

over the coarse grid times, and fits the order as the slope of
log2 Error against log2 dt.  The extinction study integrates the capped
log-odds scheme over a long horizon and compares per-path decay
exponents with the theoretical log-growth bound shifted by the
step-size penalty h(dt).

Everything here is a pure function of (parameters, configuration, seed):
paths are keyed individually, workers write into preallocated slots, and
reductions run single-threaded in index order, so reports are bitwise
reproducible regardless of the thread count.
"""
from __future__ import annotations

import enum
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import paths as paths_mod
from .model import DerivedQuantities, Regime, SisParams, derive
from .schemes import (
    ConfigError,
    SchemeConfig,
    SchemeKind,
    TrajectoryRecord,
    default_cap_multiplier,
    run_trajectory,
)
from .transform import log_infected


class RegimeError(ValueError):
    """Raised when an extinction diagnostic is requested outside its regime."""


class DegenerateFitError(ValueError):
    """Raised when an order fit lacks two distinct abscissae or finite logs."""


class HForm(enum.Enum):
    """Step-size penalty variants.

    AS_PRINTED reproduces the penalty exactly as commonly stated, with a
    step-independent middle term.  AS_DERIVED carries the dt^(1/2) factor
    on that term, consistent with the dt^(3/2) bound it descends from,
    and is the monotone-vanishing form used for threshold solving.
    """

    AS_PRINTED = "printed"
    AS_DERIVED = "derived"


class BoundKind(enum.Enum):
    SMALL_NOISE = "small"
    LARGE_NOISE = "large"


def h_of_delta(params: SisParams, cap_multiplier: float, dt: float, form: HForm = HForm.AS_DERIVED) -> float:
    """Step-size penalty h(dt) added to the extinction bounds.

    h(dt) = 6*|eta + sigma^2*N^2/2|^3 * dt^2
          + 6*K^3*(mu+gamma)^3 * [dt^(1/2) if AS_DERIVED else 1]
          + 4*|sigma*N|^3 * dt^(1/2)
    """
    if not (dt > 0):
        raise ConfigError(f"h(dt) requires dt > 0, got {dt}")
    s2n2 = params.sigma_n * params.sigma_n
    first = 6.0 * abs(params.eta + 0.5 * s2n2) ** 3 * dt * dt
    middle = 6.0 * cap_multiplier**3 * params.mu_gamma**3
    if form is HForm.AS_DERIVED:
        middle *= math.sqrt(dt)
    last = 4.0 * abs(params.sigma_n) ** 3 * math.sqrt(dt)
    return first + middle + last


@dataclass(frozen=True)
class DeltaThreshold:
    """Outcome of solving h(dt) = rhs on (0, 1).

    ``root`` is the unique solution when one exists.  ``all_admissible``
    means h stays below rhs on all of (0, 1), so every step size keeps
    the shifted extinction bound negative.  Both fields unset means even
    dt -> 0 cannot push the bound below zero (rhs <= h(0+)).
    """

    kind: BoundKind
    form: HForm
    rhs: float
    root: Optional[float]
    all_admissible: bool


def _threshold_rhs(quantities: DerivedQuantities, kind: BoundKind) -> float:
    if kind is BoundKind.SMALL_NOISE:
        return -quantities.ext_bound_a
    if quantities.ext_bound_b is None:
        raise RegimeError("large-noise threshold undefined when sigma == 0")
    return -quantities.ext_bound_b


def delta_threshold(
    params: SisParams,
    cap_multiplier: float,
    kind: BoundKind,
    form: HForm = HForm.AS_DERIVED,
    rel_tol: float = 1e-10,
) -> DeltaThreshold:
    """Largest step size keeping an extinction bound negative.

    Solves h(dt) = rhs for dt in (0, 1) by bisection in log(dt), where
    rhs is the magnitude of the relevant negative log-growth bound.  The
    penalty h is strictly increasing in dt, so the root is unique.

    Args:
        params: model coefficients.
        cap_multiplier: truncation constant K entering h.
        kind: which bound the threshold protects.
        form: penalty variant; AS_DERIVED vanishes as dt -> 0.
        rel_tol: relative width of the final bracket.
    """
    rhs = _threshold_rhs(derive(params), kind)
    lo, hi = 1e-300, 1.0 - 2**-53
    if rhs <= h_of_delta(params, cap_multiplier, lo, form):
        return DeltaThreshold(kind=kind, form=form, rhs=rhs, root=None, all_admissible=False)
    if rhs >= h_of_delta(params, cap_multiplier, hi, form):
        return DeltaThreshold(kind=kind, form=form, rhs=rhs, root=None, all_admissible=True)
    ulo, uhi = math.log(lo), math.log(hi)
    while uhi - ulo > rel_tol:
        mid = 0.5 * (ulo + uhi)
        if h_of_delta(params, cap_multiplier, math.exp(mid), form) < rhs:
            ulo = mid
        else:
            uhi = mid
    root = math.exp(0.5 * (ulo + uhi))
    return DeltaThreshold(kind=kind, form=form, rhs=rhs, root=root, all_admissible=False)


def fit_slope(log2_deltas: Sequence[float], log2_errors: Sequence[float]) -> tuple[float, float, float]:
    """Ordinary least squares fit of log2 error against log2 step size.

    Returns:
        (slope, intercept, r_squared).

    Raises:
        DegenerateFitError: fewer than two distinct abscissae, or any
            non-finite coordinate (for instance a log of a zero error).
    """
    x = np.asarray(log2_deltas, dtype=np.float64)
    y = np.asarray(log2_errors, dtype=np.float64)
    if x.size != y.size:
        raise DegenerateFitError(f"mismatched lengths {x.size} and {y.size}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise DegenerateFitError("non-finite coordinates in order fit")
    if x.size < 2 or np.all(x == x[0]):
        raise DegenerateFitError("order fit needs at least two distinct step sizes")
    xc = x - x.mean()
    yc = y - y.mean()
    sxx = float(np.dot(xc, xc))
    sxy = float(np.dot(xc, yc))
    syy = float(np.dot(yc, yc))
    slope = sxy / sxx
    intercept = float(y.mean() - slope * x.mean())
    r_squared = 1.0 if syy == 0.0 else (sxy * sxy) / (sxx * syy)
    return slope, intercept, r_squared


# ---------------------------------------------------------------------------
# strong convergence study
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConvergenceReport:
    """Strong error estimates across step sizes, with the fitted order."""

    scheme: SchemeKind
    p: float
    m_paths: int
    t_final: float
    reference_exponent: int
    step_exponents: tuple[int, ...]
    seed: int
    deltas: np.ndarray
    errors: np.ndarray
    per_path_sups: np.ndarray
    slope: float
    intercept: float
    r_squared: float
    regime: Regime


def _map_paths(worker, m_paths: int, threads: int) -> None:
    """Run ``worker(j)`` for every path index, optionally on a thread pool.

    Workers only write into slots owned by their index, and all
    reductions happen after the pool drains, so the thread count cannot
    influence any result.
    """
    if threads <= 1:
        for j in range(m_paths):
            worker(j)
        return
    with ThreadPoolExecutor(max_workers=threads) as pool:
        list(pool.map(worker, range(m_paths)))


def strong_error_study(
    params: SisParams,
    scheme: SchemeKind,
    step_exponents: Sequence[int],
    reference_exponent: int,
    p: float,
    m_paths: int,
    t_final: float,
    seed: int,
    threads: int = 1,
    cap_multiplier: Optional[float] = None,
) -> ConvergenceReport:
    """Estimate the strong order of a scheme by coupled Monte Carlo.

    Every path draws one Brownian grid at the reference resolution; the
    reference trajectory and all coarse trajectories of that path consume
    exact partial sums of the same increments, so the comparison isolates
    discretization error.

    Args:
        params: model coefficients.
        scheme: which one-step map to study.
        step_exponents: coarse dyadic exponents l, dt = 2**-l.
        reference_exponent: fine exponent, strictly larger than every l.
        p: error moment order, > 0.
        m_paths: number of Monte Carlo paths.
        t_final: horizon of each trajectory.
        seed: study seed; path j uses the (seed, j) stream.
        threads: worker threads; results do not depend on this.
        cap_multiplier: truncation constant for LOG_TEM runs, None for
            the default 2*(1 + exp(Y0)).
    """
    exponents = tuple(int(l) for l in step_exponents)
    if not exponents:
        raise ConfigError("step_exponents must be non-empty")
    if reference_exponent <= max(exponents):
        raise ConfigError(
            f"reference exponent {reference_exponent} must be strictly finer than "
            f"every coarse exponent {exponents}"
        )
    if m_paths < 1:
        raise ConfigError(f"m_paths must be >= 1, got {m_paths}")
    if not (p > 0):
        raise ConfigError(f"moment order p must be > 0, got {p}")

    ref_config = SchemeConfig(
        scheme=scheme,
        horizon=t_final,
        step_exponent=reference_exponent,
        cap_multiplier=cap_multiplier,
    )
    coarse_configs = [
        SchemeConfig(
            scheme=scheme,
            horizon=t_final,
            step_exponent=l,
            cap_multiplier=cap_multiplier,
        )
        for l in exponents
    ]

    sups = np.empty((m_paths, len(exponents)), dtype=np.float64)

    def worker(j: int) -> None:
        grid = paths_mod.generate(seed, j, reference_exponent, t_final)
        ref = run_trajectory(params, ref_config, grid)
        for idx, l in enumerate(exponents):
            coarse = run_trajectory(params, coarse_configs[idx], grid)
            stride = 1 << (reference_exponent - l)
            diff = np.abs(ref.i_states[::stride] - coarse.i_states)
            sups[j, idx] = float(diff.max())

    _map_paths(worker, m_paths, threads)

    errors = np.mean(sups**p, axis=0) ** (1.0 / p)
    deltas = np.array([2.0**-l for l in exponents])
    # zero errors (scheme exactly reproducing the reference) are degenerate for
    # the log-log fit; let fit_slope reject the -inf instead of warning here
    with np.errstate(divide="ignore"):
        log_deltas, log_errors = np.log2(deltas), np.log2(errors)
    slope, intercept, r_squared = fit_slope(log_deltas, log_errors)
    return ConvergenceReport(
        scheme=scheme,
        p=float(p),
        m_paths=m_paths,
        t_final=float(t_final),
        reference_exponent=reference_exponent,
        step_exponents=exponents,
        seed=seed,
        deltas=deltas,
        errors=errors,
        per_path_sups=sups,
        slope=slope,
        intercept=intercept,
        r_squared=r_squared,
        regime=derive(params).regime,
    )


# ---------------------------------------------------------------------------
# extinction study
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExtinctionReport:
    """Per-path decay exponents against the theoretical log-growth bound.

    ``exponents[j] = (log I_T - log I_0) / T`` for path j, computed in
    log-odds coordinates so it stays finite long after the infected count
    has underflowed.  ``theoretical_bound`` is the regime's log-growth
    bound shifted by h(dt); None when the parameters are unclassified.
    """

    scheme: SchemeKind
    dt: float
    horizon: float
    m_paths: int
    seed: int
    extinction_threshold: float
    cap_multiplier: float
    h_form: HForm
    regime: Regime
    exponents: np.ndarray
    final_log_infected: np.ndarray
    mean_exponent: float
    median_exponent: float
    fraction_below: float
    ext_bound: Optional[float]
    h_value: float
    theoretical_bound: Optional[float]
    delta_star: Optional[float]
    truncation_total: int


def _grid_for(config: SchemeConfig, seed: int, path_index: int) -> paths_mod.BrownianGrid:
    if config.step_exponent is not None:
        return paths_mod.generate(seed, path_index, config.step_exponent, config.horizon)
    assert config.explicit_dt is not None
    return paths_mod.generate_at(seed, path_index, config.explicit_dt, config.horizon)


def extinction_study(
    params: SisParams,
    config: SchemeConfig,
    m_paths: int,
    seed: int,
    extinction_threshold: float = 1e-3,
    h_form: HForm = HForm.AS_DERIVED,
    threads: int = 1,
    allow_unclassified: bool = False,
) -> ExtinctionReport:
    """Measure almost-sure decay of the infected count path by path.

    Args:
        params: model coefficients; must fall in an extinction regime
            unless ``allow_unclassified`` is set.
        config: scheme configuration driving every path; must be one of
            the log-odds schemes so decay stays measurable after the
            infected count underflows.
        m_paths: number of independent paths.
        seed: study seed; path j uses the (seed, j) stream.
        extinction_threshold: prevalence under which a path counts as
            extinct at the final time.
        h_form: penalty variant entering the shifted bound.
        threads: worker threads; results do not depend on this.
        allow_unclassified: permit parameters outside both regimes (the
            report then carries no theoretical bound).

    Raises:
        RegimeError: unclassified parameters without the override.
        ConfigError: classical-EM configuration, or an invalid threshold.
    """
    if config.scheme is SchemeKind.CLASSICAL_EM:
        raise ConfigError("extinction diagnostics need a log-odds scheme")
    if not (0 < extinction_threshold < params.cap_n):
        raise ConfigError(f"extinction_threshold must lie in (0, N), got {extinction_threshold}")
    if m_paths < 1:
        raise ConfigError(f"m_paths must be >= 1, got {m_paths}")

    quantities = derive(params)
    if quantities.regime is Regime.UNCLASSIFIED and not allow_unclassified:
        raise RegimeError(
            "parameters satisfy neither extinction condition; pass allow_unclassified "
            "to run the study without a theoretical bound"
        )

    cap_multiplier = config.cap_multiplier
    if cap_multiplier is None and config.scheme is SchemeKind.LOG_TEM:
        cap_multiplier = default_cap_multiplier(params)
    if cap_multiplier is None:
        cap_multiplier = default_cap_multiplier(params)

    exponents = np.empty(m_paths, dtype=np.float64)
    final_log = np.empty(m_paths, dtype=np.float64)
    truncations = np.zeros(m_paths, dtype=np.int64)
    log_i0 = math.log(params.i0)

    def worker(j: int) -> None:
        grid = _grid_for(config, seed, j)
        record = run_trajectory(params, config, grid)
        assert record.y_states is not None
        y_final = float(record.y_states[-1])
        t_final = float(record.times[-1])
        final_log[j] = log_infected(y_final, params)
        exponents[j] = (final_log[j] - log_i0) / t_final
        truncations[j] = record.truncation_count

    _map_paths(worker, m_paths, threads)

    log_threshold = math.log(extinction_threshold)
    below = final_log < log_threshold
    fraction_below = float(np.count_nonzero(below)) / m_paths

    h_value = h_of_delta(params, cap_multiplier, config.dt, h_form)
    ext_bound: Optional[float] = None
    theoretical_bound: Optional[float] = None
    delta_star: Optional[float] = None
    if quantities.regime is Regime.EXTINCT_SMALL_NOISE:
        ext_bound = quantities.ext_bound_a
        kind = BoundKind.SMALL_NOISE
    elif quantities.regime is Regime.EXTINCT_LARGE_NOISE:
        ext_bound = quantities.ext_bound_b
        kind = BoundKind.LARGE_NOISE
    else:
        kind = None
    if ext_bound is not None and kind is not None:
        theoretical_bound = ext_bound + h_value
        delta_star = delta_threshold(params, cap_multiplier, kind, h_form).root

    return ExtinctionReport(
        scheme=config.scheme,
        dt=config.dt,
        horizon=float(config.horizon),
        m_paths=m_paths,
        seed=seed,
        extinction_threshold=extinction_threshold,
        cap_multiplier=cap_multiplier,
        h_form=h_form,
        regime=quantities.regime,
        exponents=exponents,
        final_log_infected=final_log,
        mean_exponent=float(np.mean(exponents)),
        median_exponent=float(np.median(exponents)),
        fraction_below=fraction_below,
        ext_bound=ext_bound,
        h_value=h_value,
        theoretical_bound=theoretical_bound,
        delta_star=delta_star,
        truncation_total=int(np.sum(truncations)),
    )


# ---------------------------------------------------------------------------
# serialization: CSV rows and JSON summaries
# ---------------------------------------------------------------------------


def _fmt(value: float) -> str:
    """Seventeen significant digits, enough to round-trip any double."""
    return format(float(value), ".17g")


def write_convergence_csv(report: ConvergenceReport, path: str) -> None:
    """One row per step size: exponent, dt, strong error estimate."""
    with open(path, "w", newline="\n") as fh:
        fh.write("step_exponent,delta,error\n")
        for l, dt, err in zip(report.step_exponents, report.deltas, report.errors):
            fh.write(f"{l},{_fmt(dt)},{_fmt(err)}\n")


def write_extinction_csv(report: ExtinctionReport, path: str) -> None:
    """One row per path: index, decay exponent, final log prevalence, flag."""
    log_threshold = math.log(report.extinction_threshold)
    with open(path, "w", newline="\n") as fh:
        fh.write("path_index,exponent,final_log_infected,below_threshold\n")
        for j in range(report.m_paths):
            below = 1 if report.final_log_infected[j] < log_threshold else 0
            fh.write(
                f"{j},{_fmt(report.exponents[j])},{_fmt(report.final_log_infected[j])},{below}\n"
            )


def write_trajectory_csv(record: TrajectoryRecord, path: str) -> None:
    """One row per recorded time: t, log-odds state, infected count, truncation flag.

    The log-odds column is empty for the classical scheme, which never
    leaves linear coordinates.
    """
    flags = record.truncated_flags
    with open(path, "w", newline="\n") as fh:
        fh.write("t,y,I,truncated\n")
        for idx in range(record.times.size):
            y_text = "" if record.y_states is None else _fmt(record.y_states[idx])
            flag = 0 if flags is None else int(flags[idx])
            fh.write(f"{_fmt(record.times[idx])},{y_text},{_fmt(record.i_states[idx])},{flag}\n")


_SUMMARY_KEYS = {
    "kind": str,
    "scheme": str,
    "regime": str,
    "seed": int,
    "m_paths": int,
    "slope": (float, type(None)),
    "r_squared": (float, type(None)),
    "errors": (list, type(None)),
    "step_exponents": (list, type(None)),
    "p": (float, type(None)),
    "t_final": (float, type(None)),
    "reference_exponent": (int, type(None)),
    "dt": (float, type(None)),
    "horizon": (float, type(None)),
    "bound": (float, type(None)),
    "h": (float, type(None)),
    "h_form": (str, type(None)),
    "delta_star": (float, type(None)),
    "mean_exponent": (float, type(None)),
    "median_exponent": (float, type(None)),
    "fraction_below": (float, type(None)),
    "extinction_threshold": (float, type(None)),
    "cap_multiplier": (float, type(None)),
}


def validate_summary(summary: dict) -> None:
    """Check a summary mapping against the fixed key and type schema.

    Raises:
        ValueError: unknown keys, missing keys, or a type mismatch.
    """
    missing = set(_SUMMARY_KEYS) - set(summary)
    extra = set(summary) - set(_SUMMARY_KEYS)
    if missing or extra:
        raise ValueError(f"summary keys wrong: missing={sorted(missing)} extra={sorted(extra)}")
    for key, expected in _SUMMARY_KEYS.items():
        value = summary[key]
        if not isinstance(value, expected):
            raise ValueError(f"summary[{key!r}] has type {type(value).__name__}")
    if summary["kind"] not in ("convergence", "extinction"):
        raise ValueError(f"summary kind {summary['kind']!r} unknown")


def convergence_summary(report: ConvergenceReport) -> dict:
    """JSON-ready summary of a convergence study."""
    summary = {
        "kind": "convergence",
        "scheme": report.scheme.value,
        "regime": report.regime.value,
        "seed": int(report.seed),
        "m_paths": int(report.m_paths),
        "slope": float(report.slope),
        "r_squared": float(report.r_squared),
        "errors": [float(e) for e in report.errors],
        "step_exponents": [int(l) for l in report.step_exponents],
        "p": float(report.p),
        "t_final": float(report.t_final),
        "reference_exponent": int(report.reference_exponent),
        "dt": None,
        "horizon": None,
        "bound": None,
        "h": None,
        "h_form": None,
        "delta_star": None,
        "mean_exponent": None,
        "median_exponent": None,
        "fraction_below": None,
        "extinction_threshold": None,
        "cap_multiplier": None,
    }
    validate_summary(summary)
    return summary


def extinction_summary(report: ExtinctionReport) -> dict:
    """JSON-ready summary of an extinction study."""
    summary = {
        "kind": "extinction",
        "scheme": report.scheme.value,
        "regime": report.regime.value,
        "seed": int(report.seed),
        "m_paths": int(report.m_paths),
        "slope": None,
        "r_squared": None,
        "errors": None,
        "step_exponents": None,
        "p": None,
        "t_final": None,
        "reference_exponent": None,
        "dt": float(report.dt),
        "horizon": float(report.horizon),
        "bound": None if report.ext_bound is None else float(report.ext_bound),
        "h": float(report.h_value),
        "h_form": report.h_form.value,
        "delta_star": None if report.delta_star is None else float(report.delta_star),
        "mean_exponent": float(report.mean_exponent),
        "median_exponent": float(report.median_exponent),
        "fraction_below": float(report.fraction_below),
        "extinction_threshold": float(report.extinction_threshold),
        "cap_multiplier": float(report.cap_multiplier),
    }
    validate_summary(summary)
    return summary


def write_summary_json(summary: dict, path: str) -> None:
    """Serialize a validated summary with stable key order and byte layout."""
    validate_summary(summary)
    with open(path, "w", newline="\n") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# study scales
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StudyScale:
    """Bundled study sizes: a quick desk preset and the full-size one."""

    name: str
    m_paths: int
    t_final: float
    step_exponents: tuple[int, ...]
    reference_exponent: int
    p: float
    extinct_m_paths: int
    extinct_horizon: float
    extinct_dt: float
    extinct_stride: int


DESK_SCALE = StudyScale(
    name="desk",
    m_paths=200,
    t_final=1.0,
    step_exponents=tuple(range(6, 13)),
    reference_exponent=15,
    p=5.0,
    extinct_m_paths=100,
    extinct_horizon=50.0,
    extinct_dt=1e-2,
    extinct_stride=100,
)

PAPER_SCALE = StudyScale(
    name="paper",
    m_paths=1000,
    t_final=2.0,
    step_exponents=tuple(range(9, 17)),
    reference_exponent=19,
    p=5.0,
    extinct_m_paths=1000,
    extinct_horizon=50.0,
    extinct_dt=1e-2,
    extinct_stride=100,
)

SCALES = {scale.name: scale for scale in (DESK_SCALE, PAPER_SCALE)}
