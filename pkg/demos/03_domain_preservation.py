"""
Why step in log-odds coordinates at all?
========================================

The classical Euler-Maruyama scheme discretizes the infected count
directly and nothing stops an iterate from crossing 0 or N, after which
the dynamics are meaningless.  The truncated log-odds scheme cannot leave
the domain by construction.  Same Brownian paths, same horizon.
"""
from logsis import SchemeConfig, SchemeKind, SisParams, generate, run_trajectory

params = SisParams(beta=0.5, mu=20.0, gamma=25.0, sigma=0.035, cap_n=100.0, i0=1.0)
horizon = 50.0
n_paths = 100
seed = 2024

print(f"{n_paths} paths, T = {horizon}, same seeds for both schemes\n")

for label, scheme, exponent in (
    ("classical EM, dt = 2^-2", SchemeKind.CLASSICAL_EM, 2),
    ("classical EM, dt = 2^-6", SchemeKind.CLASSICAL_EM, 6),
    ("truncated log-odds, dt = 2^-2", SchemeKind.LOG_TEM, 2),
    ("truncated log-odds, dt = 2^-6", SchemeKind.LOG_TEM, 6),
):
    config = SchemeConfig(scheme=scheme, horizon=horizon, step_exponent=exponent)
    exited = 0
    truncated = 0
    for j in range(n_paths):
        grid = generate(seed, j, exponent, horizon)
        record = run_trajectory(params, config, grid)
        if record.domain_exits > 0:
            exited += 1
        if record.truncation_count > 0:
            truncated += 1
    print(f"{label:32s} paths leaving (0, N): {exited:3d}/{n_paths}"
          f"   paths ever truncated: {truncated:3d}/{n_paths}")

print(
    "\nThe coarse classical runs exit almost surely; the log-odds runs never"
    "\ncan, and for these subcritical parameters the cap only rarely engages"
    "\n(and only at the coarse step)."
)
