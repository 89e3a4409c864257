"""Parameters and threshold quantities for the stochastic SIS epidemic model.

The infected count I(t) evolves on the open interval (0, N) according to

    dI = [eta*I - beta*I^2] dt + sigma*I*(N - I) dB,    eta = beta*N - mu - gamma,

where beta is the disease transmission coefficient, mu the per-capita
death rate, gamma the recovery rate, sigma the noise intensity and N the
total population size.  This module validates raw parameters, computes
the deterministic and stochastic reproduction numbers, the long-run
log-growth bounds that govern almost-sure extinction, and the p-th
moment constant used in strong-convergence error bounds.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional


class InvalidParamsError(ValueError):
    """Raised when model parameters violate an admissibility constraint."""


class Regime(enum.Enum):
    """Extinction classification of a parameter set.

    EXTINCT_SMALL_NOISE: stochastic reproduction number below one with
        noise small enough (sigma^2 <= beta/N) that extinction holds
        almost surely with log-growth bounded by ``ext_bound_a``.
    EXTINCT_LARGE_NOISE: noise dominant (sigma^2 > beta/N and
        sigma^2 > beta^2 / (2(mu+gamma))), extinction almost sure with
        log-growth bounded by ``ext_bound_b``.
    UNCLASSIFIED: neither sufficient condition applies.
    """

    EXTINCT_SMALL_NOISE = "ExtinctSmallNoise"
    EXTINCT_LARGE_NOISE = "ExtinctLargeNoise"
    UNCLASSIFIED = "Unclassified"


@dataclass(frozen=True)
class SisParams:
    """Admissible coefficient set for the SIS model.

    Args:
        beta: transmission coefficient, >= 0.
        mu: per-capita death rate, >= 0.
        gamma: recovery rate, >= 0.
        sigma: noise intensity, any finite real.
        cap_n: total population size N, > 0.
        i0: initial infected count, strictly inside (0, N).
    """

    beta: float
    mu: float
    gamma: float
    sigma: float
    cap_n: float
    i0: float

    def __post_init__(self) -> None:
        for name in ("beta", "mu", "gamma", "sigma", "cap_n", "i0"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not math.isfinite(value):
                raise InvalidParamsError(f"{name} must be a finite real number, got {value!r}")
        if self.beta < 0:
            raise InvalidParamsError(f"beta must be >= 0, got {self.beta}")
        if self.mu < 0:
            raise InvalidParamsError(f"mu must be >= 0, got {self.mu}")
        if self.gamma < 0:
            raise InvalidParamsError(f"gamma must be >= 0, got {self.gamma}")
        if self.cap_n <= 0:
            raise InvalidParamsError(f"cap_n must be > 0, got {self.cap_n}")
        if not (0.0 < self.i0 < self.cap_n):
            raise InvalidParamsError(
                f"i0 must lie strictly inside (0, cap_n), got i0={self.i0}, cap_n={self.cap_n}"
            )

    @property
    def eta(self) -> float:
        """Net per-capita growth rate at zero prevalence: beta*N - mu - gamma."""
        return self.beta * self.cap_n - self.mu - self.gamma

    @property
    def mu_gamma(self) -> float:
        """Combined removal rate mu + gamma."""
        return self.mu + self.gamma

    @property
    def sigma_n(self) -> float:
        """Diffusion constant sigma*N of the log-odds transformed process."""
        return self.sigma * self.cap_n


@dataclass(frozen=True)
class DerivedQuantities:
    """Reproduction numbers, extinction bounds and regime for a parameter set.

    ``r0_det`` and ``r0_stoch`` are None when mu + gamma == 0 (no removal,
    reproduction numbers undefined).  ``ext_bound_b`` is None when
    sigma == 0 (the large-noise bound divides by sigma^2).
    """

    eta: float
    r0_det: Optional[float]
    r0_stoch: Optional[float]
    ext_bound_a: float
    ext_bound_b: Optional[float]
    regime: Regime


def derive(params: SisParams) -> DerivedQuantities:
    """Compute reproduction numbers, log-growth bounds and the extinction regime.

    The deterministic reproduction number is R0 = beta*N / (mu+gamma); its
    stochastic counterpart subtracts the noise correction
    sigma^2*N^2 / (2(mu+gamma)).  ``ext_bound_a = beta*N - mu - gamma -
    sigma^2*N^2/2`` bounds the almost-sure exponential growth rate of I(t)
    in the small-noise regime, ``ext_bound_b = -mu - gamma +
    beta^2/(2*sigma^2)`` in the large-noise regime.

    Regime checks are ordered: small-noise first (r0_stoch < 1 and
    sigma^2 <= beta/N), then large-noise (sigma^2 > beta/N and
    sigma^2 > beta^2/(2(mu+gamma))), else UNCLASSIFIED.
    """
    s2n2 = params.sigma_n * params.sigma_n
    sigma_sq = params.sigma * params.sigma
    mg = params.mu_gamma

    r0_det: Optional[float] = None
    r0_stoch: Optional[float] = None
    if mg > 0:
        r0_det = params.beta * params.cap_n / mg
        r0_stoch = r0_det - s2n2 / (2.0 * mg)

    ext_bound_a = params.eta - 0.5 * s2n2
    ext_bound_b: Optional[float] = None
    if params.sigma != 0.0:
        ext_bound_b = -mg + params.beta * params.beta / (2.0 * sigma_sq)

    regime = Regime.UNCLASSIFIED
    if r0_stoch is not None and r0_stoch < 1.0 and sigma_sq <= params.beta / params.cap_n:
        regime = Regime.EXTINCT_SMALL_NOISE
        # r0_stoch < 1 is algebraically equivalent to ext_bound_a < 0
        assert ext_bound_a < 0.0
    elif mg > 0 and sigma_sq > max(params.beta / params.cap_n, params.beta * params.beta / (2.0 * mg)):
        regime = Regime.EXTINCT_LARGE_NOISE
        assert ext_bound_b is not None and ext_bound_b < 0.0

    return DerivedQuantities(
        eta=params.eta,
        r0_det=r0_det,
        r0_stoch=r0_stoch,
        ext_bound_a=ext_bound_a,
        ext_bound_b=ext_bound_b,
        regime=regime,
    )


def log_growth_rate(x: float, params: SisParams) -> float:
    """Per-capita log-growth rate g(x) = beta*N - mu - gamma - beta*x - sigma^2*(N-x)^2/2.

    This is the drift of log I(t) expressed as a function of the current
    prevalence x in [0, N].  Its sign structure determines extinction:
    g(0) equals ``ext_bound_a`` and, when the noise is large, the maximum
    over (0, N) equals ``ext_bound_b``.
    """
    n_minus_x = params.cap_n - x
    return params.eta - params.beta * x - 0.5 * params.sigma * params.sigma * n_minus_x * n_minus_x


def argmax_log_growth(params: SisParams) -> float:
    """Prevalence (sigma^2*N - beta) / sigma^2 maximizing the log-growth rate.

    Only meaningful when the unconstrained maximizer falls inside (0, N),
    which requires sigma^2 > beta/N.  Raises InvalidParamsError when
    sigma == 0.
    """
    if params.sigma == 0.0:
        raise InvalidParamsError("argmax_log_growth requires sigma != 0")
    sigma_sq = params.sigma * params.sigma
    return (sigma_sq * params.cap_n - params.beta) / sigma_sq


def moment_constant_kp(params: SisParams, p: float, t_final: float) -> float:
    """Uniform p-th moment bound for 1/I and 1/(N-I) on [0, t_final].

    Evaluates

        K_p = max(i0^-p, (N-i0)^-p)
              * exp(p*T*(|beta*N - mu - gamma| + 2*beta*N) + p*(p+1)*sigma^2*N^2*T/2)

    accumulating in log space so the result only overflows when the final
    value itself exceeds the double range, in which case the saturated
    value ``math.inf`` is returned rather than raising.

    Args:
        params: model coefficients.
        p: moment order, >= 0.
        t_final: time horizon T, > 0.
    """
    if p < 0:
        raise InvalidParamsError(f"moment order p must be >= 0, got {p}")
    if not (t_final > 0) or not math.isfinite(t_final):
        raise InvalidParamsError(f"t_final must be a finite positive time, got {t_final}")

    s2n2 = params.sigma_n * params.sigma_n
    log_prefactor = -p * math.log(min(params.i0, params.cap_n - params.i0))
    exponent = p * t_final * (abs(params.eta) + 2.0 * params.beta * params.cap_n)
    exponent += 0.5 * p * (p + 1.0) * s2n2 * t_final
    try:
        return math.exp(log_prefactor + exponent)
    except OverflowError:
        return math.inf
