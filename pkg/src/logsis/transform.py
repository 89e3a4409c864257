"""Log-odds change of variables that maps (0, N) onto the whole real line.

The substitution y = log(I) - log(N - I) turns the state-dependent SIS
diffusion into a process with constant diffusion coefficient sigma*N:

    dy = F(y) dt + sigma*N dB,
    F(y) = eta - (mu+gamma)*e^y + sigma^2*N^2/2 - sigma^2*N^2/(1 + e^y).

Positivity of I and the upper bound I < N become automatic because the
inverse map N*e^y/(1+e^y) always lands in [0, N], touching the endpoints
only through floating-point saturation.
"""
from __future__ import annotations

import math

from .model import SisParams


class DomainError(ValueError):
    """Raised when an infected count lies outside the open interval (0, N)."""


def forward(i: float, params: SisParams) -> float:
    """Map an infected count to log-odds coordinates, y = log(i / (N - i)).

    Args:
        i: infected count, strictly inside (0, N).

    Raises:
        DomainError: if ``i`` is outside the open interval.
    """
    if not (0.0 < i < params.cap_n):
        raise DomainError(f"infected count must lie in (0, {params.cap_n}), got {i}")
    return math.log(i) - math.log(params.cap_n - i)


def inverse(y: float, params: SisParams) -> float:
    """Map log-odds coordinates back to an infected count in [0, N].

    Uses the branch of the logistic function that never exponentiates a
    positive argument, so no overflow occurs for any finite y.  Very
    large |y| saturates to the endpoints 0 or N exactly; that is the only
    way the result leaves the open interval.
    """
    if y >= 0.0:
        return params.cap_n / (1.0 + math.exp(-y))
    ey = math.exp(y)
    return params.cap_n * ey / (1.0 + ey)


def log_infected(y: float, params: SisParams) -> float:
    """Natural log of the infected count, computed stably from log-odds y.

    Evaluates log(N) + y - softplus(y), which stays accurate when the
    infected count has underflowed to zero in linear coordinates (y very
    negative), the situation extinction diagnostics care about.
    """
    if y > 0.0:
        softplus = y + math.log1p(math.exp(-y))
    else:
        softplus = math.log1p(math.exp(y))
    return math.log(params.cap_n) + y - softplus


def drift_f(y: float, params: SisParams) -> float:
    """Drift F(y) of the log-odds process.

    F(y) = eta - (mu+gamma)*e^y + sigma^2*N^2/2 - sigma^2*N^2/(1 + e^y).

    The (mu+gamma)*e^y term grows without bound as y -> +inf, which is
    why the truncated scheme caps y; reaching the overflow threshold of
    e^y (~710) means a caller bypassed that cap.

    Raises:
        OverflowError: when (mu+gamma)*e^y exceeds the double range.
    """
    try:
        ey = math.exp(y)
    except OverflowError:
        raise OverflowError(
            f"removal term (mu+gamma)*e^y overflows at y={y}; log-odds state left the capped range"
        ) from None
    removal = params.mu_gamma * ey
    if math.isinf(removal):
        raise OverflowError(
            f"removal term (mu+gamma)*e^y overflows at y={y}; log-odds state left the capped range"
        )
    s2n2 = params.sigma_n * params.sigma_n
    if y >= 0.0:
        emy = math.exp(-y)
        logistic = emy / (1.0 + emy)
    else:
        logistic = 1.0 / (1.0 + ey)
    # the two sigma^2*N^2 terms are grouped so they cancel exactly at y = 0
    return params.eta - removal + s2n2 * (0.5 - logistic)
