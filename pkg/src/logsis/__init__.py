"""Positivity-preserving integrators for the stochastic SIS epidemic model.

The model keeps the infected count I(t) inside (0, N).  Working in
log-odds coordinates y = log(I / (N - I)) makes that invariant automatic
and, after capping the iterates, gives an explicit scheme with strong
order one and faithful long-run extinction behaviour.  This package
bundles the transform, the schemes, reproducible Brownian grids keyed
per path, and Monte Carlo studies for convergence order and extinction
diagnostics, plus a command line front end writing fixed-schema CSV and
JSON outputs.
"""
from .model import (
    DerivedQuantities,
    InvalidParamsError,
    Regime,
    SisParams,
    argmax_log_growth,
    derive,
    log_growth_rate,
    moment_constant_kp,
)
from .transform import DomainError, drift_f, forward, inverse, log_infected
from .paths import (
    BrownianGrid,
    CapacityError,
    ExponentError,
    coarsen,
    dump_grid,
    generate,
    generate_at,
    load_grid,
    stream_increments,
)
from .schemes import (
    ConfigError,
    SchemeConfig,
    SchemeKind,
    TrajectoryRecord,
    default_cap_multiplier,
    run_trajectory,
    step_classical_em,
    step_log_em,
    step_log_tem,
    truncation_cap,
)
from .harness import (
    BoundKind,
    ConvergenceReport,
    DegenerateFitError,
    DeltaThreshold,
    DESK_SCALE,
    ExtinctionReport,
    HForm,
    PAPER_SCALE,
    RegimeError,
    SCALES,
    StudyScale,
    delta_threshold,
    extinction_study,
    fit_slope,
    h_of_delta,
    strong_error_study,
)

__version__ = "0.1.0"

__all__ = [
    "BoundKind",
    "BrownianGrid",
    "CapacityError",
    "ConfigError",
    "ConvergenceReport",
    "DegenerateFitError",
    "DeltaThreshold",
    "DerivedQuantities",
    "DESK_SCALE",
    "DomainError",
    "ExponentError",
    "ExtinctionReport",
    "HForm",
    "InvalidParamsError",
    "PAPER_SCALE",
    "Regime",
    "RegimeError",
    "SCALES",
    "SchemeConfig",
    "SchemeKind",
    "SisParams",
    "StudyScale",
    "TrajectoryRecord",
    "argmax_log_growth",
    "coarsen",
    "default_cap_multiplier",
    "delta_threshold",
    "derive",
    "drift_f",
    "dump_grid",
    "extinction_study",
    "fit_slope",
    "forward",
    "generate",
    "generate_at",
    "h_of_delta",
    "inverse",
    "load_grid",
    "log_growth_rate",
    "log_infected",
    "moment_constant_kp",
    "run_trajectory",
    "step_classical_em",
    "step_log_em",
    "step_log_tem",
    "stream_increments",
    "truncation_cap",
    "__version__",
]
