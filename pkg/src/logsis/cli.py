"""Command line front end: params, simulate, converge, extinct.

Configuration comes from defaults, then a flat JSON config file, then
individual flags, each layer overriding the previous one.  Every run
writes its science outputs (CSV rows, a JSON summary) with fixed schemas
and 17-significant-digit floats so identical seeds give byte-identical
files; wall-clock telemetry goes to a separate run_meta.txt.

Exit codes: 0 success, 2 invalid parameters or configuration, 3 I/O
failure, 4 numerical degeneracy (for instance an order fit without two
distinct finite points).
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
import time
from dataclasses import dataclass
from typing import Optional

from . import paths as paths_mod
from .harness import (
    BoundKind,
    DegenerateFitError,
    HForm,
    RegimeError,
    SCALES,
    convergence_summary,
    delta_threshold,
    extinction_study,
    extinction_summary,
    strong_error_study,
    write_convergence_csv,
    write_extinction_csv,
    write_summary_json,
    write_trajectory_csv,
)
from .model import InvalidParamsError, SisParams, derive
from .paths import CapacityError, ExponentError
from .schemes import (
    ConfigError,
    SchemeConfig,
    SchemeKind,
    default_cap_multiplier,
    run_trajectory,
)
from .transform import DomainError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_NUMERIC = 4


@dataclass
class RunConfig:
    """Flat run configuration; JSON config files use exactly these keys."""

    beta: float = 0.5
    mu: float = 20.0
    gamma: float = 25.0
    sigma: float = 0.035
    cap_n: float = 100.0
    i0: float = 1.0
    seed: int = 12345
    paths: Optional[int] = None
    scale: str = "desk"
    scheme: str = "logtem"
    h_form: str = "derived"
    out: str = "."
    threads: int = 1
    step_exponent: Optional[int] = None
    dt: Optional[float] = None
    horizon: Optional[float] = None
    cap_multiplier: Optional[float] = None
    record_stride: Optional[int] = None
    extinction_threshold: float = 1e-3
    allow_unclassified: bool = False

    def sis_params(self) -> SisParams:
        return SisParams(
            beta=self.beta,
            mu=self.mu,
            gamma=self.gamma,
            sigma=self.sigma,
            cap_n=self.cap_n,
            i0=self.i0,
        )

    def scheme_kind(self) -> SchemeKind:
        try:
            return SchemeKind(self.scheme)
        except ValueError:
            raise ConfigError(
                f"scheme must be one of {[k.value for k in SchemeKind]}, got {self.scheme!r}"
            ) from None

    def h_form_kind(self) -> HForm:
        try:
            return HForm(self.h_form)
        except ValueError:
            raise ConfigError(
                f"h_form must be one of {[f.value for f in HForm]}, got {self.h_form!r}"
            ) from None

    def study_scale(self):
        if self.scale not in SCALES:
            raise ConfigError(f"scale must be one of {sorted(SCALES)}, got {self.scale!r}")
        return SCALES[self.scale]


_CONFIG_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}


def load_config(config_path: Optional[str], overrides: dict) -> RunConfig:
    """Layer defaults, then the JSON config file, then explicit flag values.

    Raises:
        ConfigError: unknown keys or malformed JSON content.
        OSError: unreadable config file.
    """
    values: dict = {}
    if config_path is not None:
        with open(config_path) as fh:
            text = fh.read()
        try:
            loaded = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {config_path} is not valid JSON: {exc}") from None
        if not isinstance(loaded, dict):
            raise ConfigError(f"config file {config_path} must hold a flat JSON object")
        for key in loaded:
            if key not in _CONFIG_FIELDS:
                raise ConfigError(f"unknown config key {key!r}")
        values.update(loaded)
    for key, value in overrides.items():
        if value is not None:
            values[key] = value
    try:
        return RunConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def _collect_overrides(args: argparse.Namespace) -> dict:
    return {
        name: getattr(args, name)
        for name in _CONFIG_FIELDS
        if hasattr(args, name) and getattr(args, name) is not None
    }


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


def _ensure_out_dir(path: str) -> None:
    os.makedirs(path, exist_ok=True)


def _write_run_meta(out_dir: str, command: str, runtime_seconds: float, threads: int) -> None:
    """Wall-clock telemetry, kept out of the deterministic JSON summary."""
    with open(os.path.join(out_dir, "run_meta.txt"), "w", newline="\n") as fh:
        fh.write(f"command: {command}\n")
        fh.write(f"threads: {threads}\n")
        fh.write(f"runtime_seconds: {runtime_seconds:.3f}\n")


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_params(config: RunConfig) -> int:
    params = config.sis_params()
    quantities = derive(params)
    form = config.h_form_kind()
    cap_mult = config.cap_multiplier
    if cap_mult is None:
        cap_mult = default_cap_multiplier(params)

    def show(name: str, value) -> None:
        if value is None:
            print(f"{name} = undefined")
        else:
            print(f"{name} = {_fmt(value)}")

    show("eta", quantities.eta)
    show("r0_det", quantities.r0_det)
    show("r0_stoch", quantities.r0_stoch)
    show("ext_bound_small_noise", quantities.ext_bound_a)
    show("ext_bound_large_noise", quantities.ext_bound_b)
    print(f"regime = {quantities.regime.value}")
    show("cap_multiplier", cap_mult)
    if quantities.ext_bound_a < 0:
        result = delta_threshold(params, cap_mult, BoundKind.SMALL_NOISE, form)
        if result.root is not None:
            show("delta_star_small_noise", result.root)
        elif result.all_admissible:
            print("delta_star_small_noise = every dt in (0, 1) admissible")
    if quantities.ext_bound_b is not None and quantities.ext_bound_b < 0:
        result = delta_threshold(params, cap_mult, BoundKind.LARGE_NOISE, form)
        if result.root is not None:
            show("delta_star_large_noise", result.root)
        elif result.all_admissible:
            print("delta_star_large_noise = every dt in (0, 1) admissible")
    return EXIT_OK


def _simulate_config(config: RunConfig) -> SchemeConfig:
    step_exponent = config.step_exponent
    explicit_dt = config.dt
    if step_exponent is None and explicit_dt is None:
        step_exponent = 6
    horizon = config.horizon if config.horizon is not None else 50.0
    return SchemeConfig(
        scheme=config.scheme_kind(),
        horizon=horizon,
        step_exponent=step_exponent,
        explicit_dt=explicit_dt,
        cap_multiplier=config.cap_multiplier,
        record_stride=config.record_stride if config.record_stride is not None else 1,
    )


def cmd_simulate(config: RunConfig) -> int:
    params = config.sis_params()
    scheme_config = _simulate_config(config)
    n_paths = config.paths if config.paths is not None else 1
    if n_paths < 1:
        raise ConfigError(f"paths must be >= 1, got {n_paths}")
    _ensure_out_dir(config.out)
    start = time.perf_counter()
    for j in range(n_paths):
        if scheme_config.step_exponent is not None:
            grid = paths_mod.generate(
                config.seed, j, scheme_config.step_exponent, scheme_config.horizon
            )
        else:
            grid = paths_mod.generate_at(
                config.seed, j, scheme_config.dt, scheme_config.horizon
            )
        record = run_trajectory(params, scheme_config, grid)
        write_trajectory_csv(record, os.path.join(config.out, f"path_{j:04d}.csv"))
    _write_run_meta(config.out, "simulate", time.perf_counter() - start, 1)
    print(f"wrote {n_paths} trajectory file(s) to {config.out}")
    return EXIT_OK


def cmd_converge(config: RunConfig) -> int:
    params = config.sis_params()
    scale = config.study_scale()
    m_paths = config.paths if config.paths is not None else scale.m_paths
    _ensure_out_dir(config.out)
    start = time.perf_counter()
    report = strong_error_study(
        params=params,
        scheme=config.scheme_kind(),
        step_exponents=scale.step_exponents,
        reference_exponent=scale.reference_exponent,
        p=scale.p,
        m_paths=m_paths,
        t_final=scale.t_final,
        seed=config.seed,
        threads=config.threads,
        cap_multiplier=config.cap_multiplier,
    )
    runtime = time.perf_counter() - start
    if math.isnan(report.slope):
        raise DegenerateFitError("fitted slope is NaN")
    write_convergence_csv(report, os.path.join(config.out, "convergence.csv"))
    write_summary_json(convergence_summary(report), os.path.join(config.out, "summary.json"))
    _write_run_meta(config.out, "converge", runtime, config.threads)
    print(f"slope = {_fmt(report.slope)}")
    print(f"r_squared = {_fmt(report.r_squared)}")
    for l, err in zip(report.step_exponents, report.errors):
        print(f"error[2^-{l}] = {_fmt(err)}")
    return EXIT_OK


def cmd_extinct(config: RunConfig) -> int:
    params = config.sis_params()
    scale = config.study_scale()
    m_paths = config.paths if config.paths is not None else scale.extinct_m_paths
    dt = config.dt if config.dt is not None else scale.extinct_dt
    horizon = config.horizon if config.horizon is not None else scale.extinct_horizon
    stride = config.record_stride if config.record_stride is not None else scale.extinct_stride
    scheme_kind = config.scheme_kind()
    if scheme_kind is SchemeKind.CLASSICAL_EM:
        raise ConfigError("extinction diagnostics need a log-odds scheme (logem or logtem)")
    scheme_config = SchemeConfig(
        scheme=scheme_kind,
        horizon=horizon,
        explicit_dt=dt,
        cap_multiplier=config.cap_multiplier,
        record_stride=stride,
    )
    _ensure_out_dir(config.out)
    start = time.perf_counter()
    report = extinction_study(
        params=params,
        config=scheme_config,
        m_paths=m_paths,
        seed=config.seed,
        extinction_threshold=config.extinction_threshold,
        h_form=config.h_form_kind(),
        threads=config.threads,
        allow_unclassified=config.allow_unclassified,
    )
    runtime = time.perf_counter() - start
    write_extinction_csv(report, os.path.join(config.out, "extinction.csv"))
    write_summary_json(extinction_summary(report), os.path.join(config.out, "summary.json"))
    _write_run_meta(config.out, "extinct", runtime, config.threads)
    print(f"regime = {report.regime.value}")
    print(f"mean_exponent = {_fmt(report.mean_exponent)}")
    print(f"fraction_below = {_fmt(report.fraction_below)}")
    if report.ext_bound is not None:
        print(f"bound = {_fmt(report.ext_bound)}")
        print(f"bound_plus_penalty = {_fmt(report.theoretical_bound)}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="flat JSON config file; flags override its keys")
    parser.add_argument("--beta", type=float, help="transmission coefficient")
    parser.add_argument("--mu", type=float, help="per-capita death rate")
    parser.add_argument("--gamma", type=float, help="recovery rate")
    parser.add_argument("--sigma", type=float, help="noise intensity")
    parser.add_argument("--cap-n", dest="cap_n", type=float, help="total population size N")
    parser.add_argument("--i0", type=float, help="initial infected count in (0, N)")
    parser.add_argument("--seed", type=int, help="study seed")
    parser.add_argument("--paths", type=int, help="number of Monte Carlo paths")
    parser.add_argument("--scale", choices=sorted(SCALES), help="study size preset")
    parser.add_argument(
        "--scheme", choices=[k.value for k in SchemeKind], help="integration scheme"
    )
    parser.add_argument(
        "--h-form",
        dest="h_form",
        choices=[f.value for f in HForm],
        help="step-size penalty variant",
    )
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--threads", type=int, help="worker threads (never affects results)")
    parser.add_argument("--cap-multiplier", dest="cap_multiplier", type=float,
                        help="truncation constant K, default 2*(1+exp(Y0))")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="logsis",
        description="Positivity-preserving integrators and Monte Carlo diagnostics "
        "for the stochastic SIS epidemic model",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_params = sub.add_parser("params", help="print derived quantities and the regime")
    _add_common_flags(p_params)

    p_sim = sub.add_parser("simulate", help="integrate sample paths and write CSVs")
    _add_common_flags(p_sim)
    p_sim.add_argument("--step-exponent", dest="step_exponent", type=int,
                       help="dyadic exponent l, dt = 2**-l")
    p_sim.add_argument("--dt", type=float, help="explicit step size")
    p_sim.add_argument("--horizon", type=float, help="time horizon")
    p_sim.add_argument("--record-stride", dest="record_stride", type=int,
                       help="keep every s-th state")

    p_conv = sub.add_parser("converge", help="strong-order study across step sizes")
    _add_common_flags(p_conv)

    p_ext = sub.add_parser("extinct", help="long-horizon extinction diagnostics")
    _add_common_flags(p_ext)
    p_ext.add_argument("--dt", type=float, help="explicit step size")
    p_ext.add_argument("--horizon", type=float, help="time horizon")
    p_ext.add_argument("--threshold", dest="extinction_threshold", type=float,
                       help="prevalence counting as extinct")
    p_ext.add_argument("--record-stride", dest="record_stride", type=int,
                       help="keep every s-th state")
    p_ext.add_argument("--allow-unclassified", dest="allow_unclassified",
                       action="store_const", const=True,
                       help="run even when no extinction condition holds")

    return parser


_COMMANDS = {
    "params": cmd_params,
    "simulate": cmd_simulate,
    "converge": cmd_converge,
    "extinct": cmd_extinct,
}


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = load_config(args.config, _collect_overrides(args))
        return _COMMANDS[args.command](config)
    except (DegenerateFitError, OverflowError) as exc:
        print(f"error: numerical degeneracy: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"error: I/O failure: {exc}", file=sys.stderr)
        return EXIT_IO
    except (
        InvalidParamsError,
        ConfigError,
        DomainError,
        ExponentError,
        CapacityError,
        RegimeError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
