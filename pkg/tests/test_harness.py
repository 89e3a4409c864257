"""Order fitting, step-size penalty and thresholds, Monte Carlo studies,
and the CSV/JSON serialization layer."""
import json
import math
from fractions import Fraction

import numpy as np
import pytest

from logsis.harness import (
    BoundKind,
    ConfigError,
    DegenerateFitError,
    DESK_SCALE,
    HForm,
    PAPER_SCALE,
    RegimeError,
    SCALES,
    convergence_summary,
    delta_threshold,
    extinction_study,
    extinction_summary,
    fit_slope,
    h_of_delta,
    strong_error_study,
    validate_summary,
    write_convergence_csv,
    write_extinction_csv,
    write_summary_json,
    write_trajectory_csv,
)
from logsis.model import Regime, SisParams, derive
from logsis.paths import generate
from logsis.schemes import (
    SchemeConfig,
    SchemeKind,
    default_cap_multiplier,
    run_trajectory,
)


# ----------------------------------------------------------------- fit_slope


def test_fit_slope_hand_example():
    x = [-6.0, -8.0, -10.0]
    y = [-5.9, -7.95, -10.1]
    # exact least squares on the binary rationals behind the floats
    fx = [Fraction(v) for v in x]
    fy = [Fraction(v) for v in y]
    xm = sum(fx) / 3
    ym = sum(fy) / 3
    sxx = sum((v - xm) ** 2 for v in fx)
    sxy = sum((a - xm) * (b - ym) for a, b in zip(fx, fy))
    syy = sum((v - ym) ** 2 for v in fy)
    slope, intercept, r2 = fit_slope(x, y)
    assert slope == pytest.approx(float(sxy / sxx), rel=1e-12)
    assert intercept == pytest.approx(float(ym - (sxy / sxx) * xm), rel=1e-12)
    assert r2 == pytest.approx(float(sxy * sxy / (sxx * syy)), rel=1e-12)
    assert slope == pytest.approx(1.05, rel=1e-12)


def test_fit_slope_perfect_line():
    slope, intercept, r2 = fit_slope([-6.0, -8.0, -10.0], [-3.0, -5.0, -7.0])
    assert slope == 1.0
    assert intercept == 3.0
    assert r2 == 1.0


def test_fit_slope_constant_ordinates():
    slope, _, r2 = fit_slope([-6.0, -8.0, -10.0], [2.0, 2.0, 2.0])
    assert slope == 0.0
    assert r2 == 1.0  # zero residual around a zero-variance target


@pytest.mark.parametrize(
    "x,y",
    [
        ([-6.0], [1.0]),
        ([-6.0, -6.0], [1.0, 2.0]),
        ([-6.0, -8.0], [1.0, -math.inf]),
        ([-6.0, -8.0], [1.0, math.nan]),
        ([-6.0, -8.0, -10.0], [1.0, 2.0]),
    ],
)
def test_fit_slope_degenerate_inputs(x, y):
    with pytest.raises(DegenerateFitError):
        fit_slope(x, y)


# ----------------------------------------------------------------- h(dt)


def test_h_reduces_to_first_term():
    p = SisParams(beta=0.1, mu=0.0, gamma=0.0, sigma=0.0, cap_n=10.0, i0=1.0)
    # eta = 1, no removal, no noise: h = 6 * dt^2 under both variants
    for form in HForm:
        assert h_of_delta(p, 2.0, 0.25, form) == 6.0 * 0.25 * 0.25


def test_h_variants_differ_by_middle_factor(canonical):
    dt, k = 0.25, 2.0
    middle = 6.0 * k**3 * canonical.mu_gamma**3
    printed = h_of_delta(canonical, k, dt, HForm.AS_PRINTED)
    derived = h_of_delta(canonical, k, dt, HForm.AS_DERIVED)
    assert printed - derived == pytest.approx(middle * (1.0 - math.sqrt(dt)), rel=1e-12)


def test_h_small_dt_limits(canonical):
    k = default_cap_multiplier(canonical)
    middle = 6.0 * k**3 * canonical.mu_gamma**3
    # the printed variant keeps its step-independent floor; the derived
    # variant vanishes with dt
    assert h_of_delta(canonical, k, 1e-300, HForm.AS_PRINTED) == pytest.approx(middle, rel=1e-12)
    assert h_of_delta(canonical, k, 1e-300, HForm.AS_DERIVED) < 1e-100


def test_h_value_against_oracle(canonical):
    mp = pytest.importorskip("mpmath").mp
    k = default_cap_multiplier(canonical)
    with mp.workdps(60):
        dt = mp.mpf(1e-2)
        s_n = mp.mpf(0.035) * 100
        oracle = (
            6 * abs(mp.mpf(5) + s_n**2 / 2) ** 3 * dt**2
            + 6 * mp.mpf(k) ** 3 * 45**3 * mp.sqrt(dt)
            + 4 * s_n**3 * mp.sqrt(dt)
        )
    got = h_of_delta(canonical, k, 1e-2, HForm.AS_DERIVED)
    assert got == pytest.approx(float(oracle), rel=1e-12)


def test_h_monotone_in_dt(canonical):
    k = default_cap_multiplier(canonical)
    grid = np.geomspace(1e-12, 0.99, 200)
    for form in HForm:
        values = [h_of_delta(canonical, k, float(dt), form) for dt in grid]
        assert all(a < b for a, b in zip(values, values[1:]))


def test_h_rejects_nonpositive_dt(canonical):
    with pytest.raises(ConfigError):
        h_of_delta(canonical, 2.0, 0.0)


# -------------------------------------------------------------- thresholds


def test_delta_threshold_small_noise(canonical):
    k = default_cap_multiplier(canonical)
    res = delta_threshold(canonical, k, BoundKind.SMALL_NOISE)
    assert res.root is not None and not res.all_admissible
    assert 0.0 < res.root < 1.0
    assert res.rhs == -derive(canonical).ext_bound_a
    # the root solves h = rhs to the bisection tolerance
    assert h_of_delta(canonical, k, res.root) == pytest.approx(res.rhs, rel=1e-8)
    # frozen regression value for this parameter set
    assert res.root == pytest.approx(6.227670275489999e-14, rel=1e-6)


def test_delta_threshold_large_noise(large_noise):
    k = default_cap_multiplier(large_noise)
    res = delta_threshold(large_noise, k, BoundKind.LARGE_NOISE)
    assert res.root is not None
    assert h_of_delta(large_noise, k, res.root) == pytest.approx(res.rhs, rel=1e-8)
    assert res.root == pytest.approx(3.1891456042979154e-11, rel=1e-6)


def test_delta_threshold_absent_under_printed_form(canonical):
    # the printed variant's step-independent middle term already exceeds
    # the small-noise bound, so no step size qualifies
    k = default_cap_multiplier(canonical)
    res = delta_threshold(canonical, k, BoundKind.SMALL_NOISE, HForm.AS_PRINTED)
    assert res.root is None and not res.all_admissible


def test_delta_threshold_all_admissible():
    p = SisParams(beta=0.0, mu=0.005, gamma=0.005, sigma=0.01, cap_n=1.0, i0=0.5)
    k = default_cap_multiplier(p)
    res = delta_threshold(p, k, BoundKind.SMALL_NOISE)
    assert res.all_admissible and res.root is None


def test_delta_threshold_regime_error():
    p = SisParams(beta=0.3, mu=20.0, gamma=25.0, sigma=0.0, cap_n=100.0, i0=1.0)
    with pytest.raises(RegimeError):
        delta_threshold(p, 2.0, BoundKind.LARGE_NOISE)


# -------------------------------------------------------- convergence study


def test_strong_error_study_matches_manual_composition(canonical):
    report = strong_error_study(
        canonical,
        SchemeKind.LOG_TEM,
        step_exponents=[2, 3],
        reference_exponent=5,
        p=2.0,
        m_paths=2,
        t_final=0.5,
        seed=77,
    )
    for j in range(2):
        grid = generate(77, j, 5, 0.5)
        ref = run_trajectory(
            canonical, SchemeConfig(scheme=SchemeKind.LOG_TEM, horizon=0.5, step_exponent=5), grid
        )
        for idx, l in enumerate((2, 3)):
            coarse = run_trajectory(
                canonical,
                SchemeConfig(scheme=SchemeKind.LOG_TEM, horizon=0.5, step_exponent=l),
                grid,
            )
            stride = 1 << (5 - l)
            want = np.abs(ref.i_states[::stride] - coarse.i_states).max()
            assert report.per_path_sups[j, idx] == want
    errors = np.mean(report.per_path_sups**2.0, axis=0) ** 0.5
    assert np.array_equal(report.errors, errors)
    slope, intercept, r2 = fit_slope(np.log2(report.deltas), np.log2(errors))
    assert (report.slope, report.intercept, report.r_squared) == (slope, intercept, r2)


def test_same_resolution_runs_have_zero_distance(canonical):
    grid = generate(5, 0, 8, 1.0)
    cfg = SchemeConfig(scheme=SchemeKind.LOG_TEM, horizon=1.0, step_exponent=8)
    a = run_trajectory(canonical, cfg, grid)
    b = run_trajectory(canonical, cfg, grid)
    assert np.abs(a.i_states - b.i_states).max() == 0.0


def test_refinement_shrinks_error(canonical):
    report = strong_error_study(
        canonical,
        SchemeKind.LOG_TEM,
        step_exponents=[5, 6, 7, 8],
        reference_exponent=11,
        p=2.0,
        m_paths=40,
        t_final=0.5,
        seed=51,
    )
    assert np.all(np.diff(report.errors) < 0.0)
    # three halvings of dt should shrink the error well past a factor 2
    assert report.errors[0] / report.errors[-1] > 2.0
    assert report.slope > 0.5


def test_study_independent_of_thread_count(canonical):
    kwargs = dict(
        step_exponents=[4, 5, 6],
        reference_exponent=9,
        p=5.0,
        m_paths=16,
        t_final=0.5,
        seed=99,
    )
    a = strong_error_study(canonical, SchemeKind.LOG_TEM, threads=1, **kwargs)
    b = strong_error_study(canonical, SchemeKind.LOG_TEM, threads=3, **kwargs)
    assert np.array_equal(a.per_path_sups, b.per_path_sups)
    assert np.array_equal(a.errors, b.errors)
    assert (a.slope, a.intercept, a.r_squared) == (b.slope, b.intercept, b.r_squared)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(step_exponents=[4, 5], reference_exponent=5),  # not strictly finer
        dict(step_exponents=[], reference_exponent=8),
        dict(step_exponents=[4], reference_exponent=8, p=0.0),
        dict(step_exponents=[4], reference_exponent=8, m_paths=0),
    ],
)
def test_strong_error_study_validation(canonical, kwargs):
    base = dict(p=2.0, m_paths=2, t_final=0.5, seed=1)
    base.update(kwargs)
    with pytest.raises(ConfigError):
        strong_error_study(canonical, SchemeKind.LOG_TEM, **base)


# --------------------------------------------------------- extinction study


def test_extinction_deterministic_decay():
    # beta = sigma = 0 reduces the model to dI = -(mu+gamma) I dt, whose
    # exact decay exponent is -(mu+gamma); the scheme should land within
    # its O(dt) bias of that
    p = SisParams(beta=0.0, mu=0.25, gamma=0.25, sigma=0.0, cap_n=100.0, i0=0.01)
    cfg = SchemeConfig(scheme=SchemeKind.LOG_EM, horizon=10.0, explicit_dt=1e-3, record_stride=100)
    report = extinction_study(p, cfg, m_paths=3, seed=8)
    assert report.regime is Regime.EXTINCT_SMALL_NOISE
    assert np.all(np.abs(report.exponents + 0.5) < 0.005)
    assert report.mean_exponent == pytest.approx(-0.5, abs=0.005)
    # noise-free paths are identical
    assert np.all(report.exponents == report.exponents[0])


def test_extinction_small_noise_statistics(canonical):
    cfg = SchemeConfig(
        scheme=SchemeKind.LOG_TEM, horizon=50.0, explicit_dt=1e-2, record_stride=100
    )
    report = extinction_study(canonical, cfg, m_paths=50, seed=42)
    assert report.regime is Regime.EXTINCT_SMALL_NOISE
    assert report.mean_exponent <= -0.5
    assert report.fraction_below >= 0.9
    # reported statistics agree with the per-path arrays
    assert report.mean_exponent == float(np.mean(report.exponents))
    assert report.median_exponent == float(np.median(report.exponents))
    below = report.final_log_infected < math.log(report.extinction_threshold)
    assert report.fraction_below == float(np.count_nonzero(below)) / 50
    log_i0 = math.log(canonical.i0)
    recomputed = (report.final_log_infected - log_i0) / 50.0
    assert np.allclose(report.exponents, recomputed, rtol=1e-12)
    # bound wiring: shifted bound = regime bound + h(dt), threshold root present
    assert report.ext_bound == derive(canonical).ext_bound_a
    assert report.theoretical_bound == report.ext_bound + report.h_value
    assert report.delta_star is not None


def test_extinction_unclassified_handling(borderline):
    cfg = SchemeConfig(scheme=SchemeKind.LOG_TEM, horizon=5.0, explicit_dt=1e-2)
    with pytest.raises(RegimeError):
        extinction_study(borderline, cfg, m_paths=2, seed=1)
    report = extinction_study(borderline, cfg, m_paths=2, seed=1, allow_unclassified=True)
    assert report.regime is Regime.UNCLASSIFIED
    assert report.ext_bound is None
    assert report.theoretical_bound is None
    assert report.delta_star is None
    assert report.h_value > 0.0


def test_extinction_study_validation(canonical):
    good = SchemeConfig(scheme=SchemeKind.LOG_TEM, horizon=5.0, explicit_dt=1e-2)
    with pytest.raises(ConfigError):
        extinction_study(
            canonical,
            SchemeConfig(scheme=SchemeKind.CLASSICAL_EM, horizon=5.0, explicit_dt=1e-2),
            m_paths=2,
            seed=1,
        )
    with pytest.raises(ConfigError):
        extinction_study(canonical, good, m_paths=2, seed=1, extinction_threshold=0.0)
    with pytest.raises(ConfigError):
        extinction_study(canonical, good, m_paths=2, seed=1, extinction_threshold=150.0)
    with pytest.raises(ConfigError):
        extinction_study(canonical, good, m_paths=0, seed=1)


# ------------------------------------------------------------- serialization


@pytest.fixture
def small_report(canonical):
    return strong_error_study(
        canonical,
        SchemeKind.LOG_TEM,
        step_exponents=[3, 4, 5],
        reference_exponent=8,
        p=2.0,
        m_paths=4,
        t_final=0.5,
        seed=3,
    )


def test_convergence_csv_round_trip(small_report, tmp_path):
    file = tmp_path / "convergence.csv"
    write_convergence_csv(small_report, str(file))
    lines = file.read_text().splitlines()
    assert lines[0] == "step_exponent,delta,error"
    assert len(lines) == 1 + 3
    for idx, line in enumerate(lines[1:]):
        l_txt, dt_txt, err_txt = line.split(",")
        assert int(l_txt) == small_report.step_exponents[idx]
        # 17 significant digits reproduce the doubles exactly
        assert float(dt_txt) == small_report.deltas[idx]
        assert float(err_txt) == small_report.errors[idx]


def test_extinction_csv_layout(canonical, tmp_path):
    cfg = SchemeConfig(scheme=SchemeKind.LOG_TEM, horizon=5.0, explicit_dt=1e-2)
    report = extinction_study(canonical, cfg, m_paths=6, seed=9)
    file = tmp_path / "extinction.csv"
    write_extinction_csv(report, str(file))
    lines = file.read_text().splitlines()
    assert lines[0] == "path_index,exponent,final_log_infected,below_threshold"
    assert len(lines) == 1 + 6
    flags = []
    for j, line in enumerate(lines[1:]):
        idx_txt, exp_txt, flog_txt, below_txt = line.split(",")
        assert int(idx_txt) == j
        assert float(exp_txt) == report.exponents[j]
        assert float(flog_txt) == report.final_log_infected[j]
        flags.append(int(below_txt))
    assert all(f in (0, 1) for f in flags)
    assert sum(flags) / 6 == report.fraction_below


def test_trajectory_csv_layout(canonical, tmp_path):
    grid = generate(5, 0, 5, 1.0)
    log_rec = run_trajectory(
        canonical, SchemeConfig(scheme=SchemeKind.LOG_TEM, horizon=1.0, step_exponent=5), grid
    )
    file = tmp_path / "path.csv"
    write_trajectory_csv(log_rec, str(file))
    lines = file.read_text().splitlines()
    assert lines[0] == "t,y,I,truncated"
    assert len(lines) == 1 + log_rec.times.size
    t_txt, y_txt, i_txt, flag_txt = lines[1].split(",")
    assert float(t_txt) == 0.0
    assert float(y_txt) == log_rec.y_states[0]
    assert float(i_txt) == log_rec.i_states[0]
    assert flag_txt in ("0", "1")

    classical = run_trajectory(
        canonical,
        SchemeConfig(scheme=SchemeKind.CLASSICAL_EM, horizon=1.0, step_exponent=5),
        grid,
    )
    write_trajectory_csv(classical, str(file))
    lines = file.read_text().splitlines()
    assert lines[1].split(",")[1] == ""  # no log-odds column for the linear scheme


def test_summary_schemas(small_report, canonical):
    conv = convergence_summary(small_report)
    validate_summary(conv)
    assert conv["kind"] == "convergence"
    assert conv["dt"] is None and conv["mean_exponent"] is None
    assert conv["slope"] == small_report.slope

    cfg = SchemeConfig(scheme=SchemeKind.LOG_TEM, horizon=5.0, explicit_dt=1e-2)
    ext = extinction_summary(extinction_study(canonical, cfg, m_paths=3, seed=2))
    validate_summary(ext)
    assert ext["kind"] == "extinction"
    assert ext["slope"] is None and ext["errors"] is None
    assert ext["h_form"] == "derived"

    # both kinds expose the same key set, so downstream readers see one schema
    assert set(conv) == set(ext)


def test_summary_validation_rejects(small_report):
    good = convergence_summary(small_report)
    missing = dict(good)
    missing.pop("slope")
    with pytest.raises(ValueError):
        validate_summary(missing)
    extra = dict(good, surprise=1)
    with pytest.raises(ValueError):
        validate_summary(extra)
    badtype = dict(good, seed="not-an-int")
    with pytest.raises(ValueError):
        validate_summary(badtype)
    badkind = dict(good, kind="mystery")
    with pytest.raises(ValueError):
        validate_summary(badkind)


def test_summary_json_bytes_are_stable(small_report, tmp_path):
    summary = convergence_summary(small_report)
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    write_summary_json(summary, str(a))
    write_summary_json(summary, str(b))
    assert a.read_bytes() == b.read_bytes()
    text = a.read_text()
    assert text.endswith("\n")
    assert json.loads(text) == json.loads(json.dumps(summary))
    # keys are sorted so the byte layout is canonical
    loaded = json.loads(text)
    assert list(loaded) == sorted(loaded)


def test_study_scales():
    assert set(SCALES) == {"desk", "paper"}
    assert DESK_SCALE.m_paths == 200
    assert DESK_SCALE.step_exponents == tuple(range(6, 13))
    assert DESK_SCALE.reference_exponent == 15
    assert PAPER_SCALE.m_paths == 1000
    assert PAPER_SCALE.reference_exponent > max(PAPER_SCALE.step_exponents)
