"""
Closed-form statistics of the per-layer step ln z and the optimal gain

The linear expressions are leading order in 1/N; the ReLU expressions are
fits to the doubly-stochastic step (binomial row survival, then chi-square).
Every gain satisfies g = exp(-½ ⟨ln z⟩) against its mean.
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

from deep_net import Nonlinearity
from numeric_core import ArgumentError

RELU_MIN_WIDTH = 6


class StatsSource(str, Enum):
    CLOSED_FORM = "closed-form"
    MONTE_CARLO = "monte-carlo"


class GainMethod(str, Enum):
    CLOSED_FORM = "closed-form"
    EMPIRICAL_SEARCH = "empirical-search"


@dataclass(frozen=True)
class LnZStats:
    """Mean and variance of ln z at width n"""

    mean: float
    variance: float
    n: int
    nonlinearity: Nonlinearity
    source: StatsSource
    sample_count: Optional[int] = None
    standard_error: Optional[float] = None
    variance_standard_error: Optional[float] = None

    def __post_init__(self):
        if self.variance < 0:
            raise ArgumentError(f"Variance must be >= 0, got {self.variance}")
        if self.source is StatsSource.MONTE_CARLO:
            if not self.sample_count or self.sample_count <= 0:
                raise ArgumentError("Monte-Carlo statistics need a positive sample count")
            if not self.standard_error or self.standard_error <= 0:
                raise ArgumentError("Monte-Carlo statistics need a positive standard error")


@dataclass(frozen=True)
class GainRecommendation:
    """Recommended gain g for width n"""

    g: float
    n: int
    nonlinearity: Nonlinearity
    method: GainMethod
    depth: Optional[int] = None
    trials: Optional[int] = None
    discarded_trials: int = 0
    evaluations: int = 0
    bracketed: bool = True

    def __post_init__(self):
        if not self.g > 0:
            raise ArgumentError(f"Gain must be positive, got {self.g}")


def _check_width(n: int) -> None:
    if n < 1:
        raise ArgumentError(f"Layer width must be >= 1, got {n}")


def ln_z_mean_linear(n: int) -> float:
    _check_width(n)
    return -1.0 / n


def ln_z_var_linear(n: int) -> float:
    """Leading-order per-step variance 1/(2n)

    This is the variance of ½·ln z, the log of the norm ratio. The variance of
    ln z itself is ψ'(n/2) ≈ 2/n; see ``exact_ln_z_moments_linear``.
    """
    _check_width(n)
    return 1.0 / (2.0 * n)


def ln_z_mean_relu(n: int) -> float:
    _check_width(n)
    return -math.log(2.0) - 2.4 / (max(n, RELU_MIN_WIDTH) - 2.4)


def ln_z_var_relu(n: int) -> float:
    _check_width(n)
    return 5.0 / (max(n, RELU_MIN_WIDTH) - 4.0)


def g_linear(n: int) -> GainRecommendation:
    _check_width(n)
    return GainRecommendation(
        g=math.exp(1.0 / (2.0 * n)),
        n=n,
        nonlinearity=Nonlinearity.LINEAR,
        method=GainMethod.CLOSED_FORM,
    )


def g_relu(n: int) -> GainRecommendation:
    _check_width(n)
    return GainRecommendation(
        g=math.sqrt(2.0) * math.exp(1.2 / (max(n, RELU_MIN_WIDTH) - 2.4)),
        n=n,
        nonlinearity=Nonlinearity.RELU,
        method=GainMethod.CLOSED_FORM,
    )


def gain_from_mean(mean_ln_z: float) -> float:
    """Critical gain that makes the walk of ln Z unbiased"""
    return math.exp(-0.5 * mean_ln_z)


def optimal_gain(nonlinearity: Nonlinearity, n: int) -> GainRecommendation:
    nonlinearity = Nonlinearity(nonlinearity)
    if nonlinearity is Nonlinearity.LINEAR:
        return g_linear(n)
    if nonlinearity is Nonlinearity.RELU:
        return g_relu(n)
    raise ArgumentError("tanh has no closed-form gain; use estimate_optimal_g")


def ln_z_stats(nonlinearity: Nonlinearity, n: int) -> LnZStats:
    nonlinearity = Nonlinearity(nonlinearity)
    if nonlinearity is Nonlinearity.LINEAR:
        mean, variance = ln_z_mean_linear(n), ln_z_var_linear(n)
    elif nonlinearity is Nonlinearity.RELU:
        mean, variance = ln_z_mean_relu(n), ln_z_var_relu(n)
    else:
        raise ArgumentError("tanh has no closed-form ln z statistics")
    return LnZStats(
        mean=mean, variance=variance, n=n, nonlinearity=nonlinearity, source=StatsSource.CLOSED_FORM
    )


def _digamma(x: float) -> float:
    result = 0.0
    while x < 6.0:
        result -= 1.0 / x
        x += 1.0
    inv2 = 1.0 / (x * x)
    return result + math.log(x) - 0.5 / x - inv2 * (1.0 / 12 - inv2 * (1.0 / 120 - inv2 / 252))


def _trigamma(x: float) -> float:
    result = 0.0
    while x < 6.0:
        result += 1.0 / (x * x)
        x += 1.0
    inv = 1.0 / x
    inv2 = inv * inv
    return result + inv + 0.5 * inv2 + inv * inv2 * (1.0 / 6 - inv2 * (1.0 / 30 - inv2 / 42))


def exact_ln_z_moments_linear(n: int) -> LnZStats:
    """Exact mean ψ(n/2) + ln(2/n) and variance ψ'(n/2) of ln(χ²_n / n)"""
    _check_width(n)
    return LnZStats(
        mean=_digamma(n / 2.0) + math.log(2.0 / n),
        variance=_trigamma(n / 2.0),
        n=n,
        nonlinearity=Nonlinearity.LINEAR,
        source=StatsSource.CLOSED_FORM,
    )
