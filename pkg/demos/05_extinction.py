"""
Two roads to extinction
=======================

Small noise: the stochastic reproduction number sits below one and the
prevalence decays at rate eta - sigma^2 N^2 / 2 or faster.  Large noise:
transmission is overwhelmed outright and the decay rate is steeper than
-(mu+gamma) + beta^2/(2 sigma^2).  The per-path observable is the
finite-horizon exponent (log I_T - log I_0) / T, measured in log-odds
coordinates so it survives the underflow of I itself.
"""
from logsis import SchemeConfig, SchemeKind, SisParams, extinction_study

config = SchemeConfig(
    scheme=SchemeKind.LOG_TEM,
    horizon=50.0,
    explicit_dt=1e-2,
    record_stride=100,
)

for label, sigma in (("small noise", 0.035), ("large noise", 0.08)):
    params = SisParams(beta=0.5, mu=20.0, gamma=25.0, sigma=sigma, cap_n=100.0, i0=1.0)
    report = extinction_study(params, config, m_paths=100, seed=2024)
    print(f"{label} (sigma = {sigma}): regime {report.regime.value}")
    print(f"  mean exponent       = {report.mean_exponent:10.3f}")
    print(f"  median exponent     = {report.median_exponent:10.3f}")
    print(f"  regime bound        = {report.ext_bound:10.3f}")
    print(f"  bound + h(dt)       = {report.theoretical_bound:10.3f}")
    print(f"  paths below 1e-3    = {100 * report.fraction_below:.0f}%")
    print(f"  truncations (total) = {report.truncation_total}")
    print()

print(
    "Every observed mean sits at or below its asymptotic regime bound.  The\n"
    "finite-step guarantee bound + h(dt) is vacuous at this step size -- h\n"
    "only becomes negligible below the admissible-step threshold (around\n"
    "1e-13 here; compare `logsis params`), far finer than anything one would\n"
    "simulate.  The observed decay is the point: it already matches the\n"
    "asymptotic rate at dt = 1e-2.  (h uses the step-vanishing variant.)"
)
