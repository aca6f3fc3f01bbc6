"""
Depth-dependent exponential learning-rate schedule

For a reference depth ``d_max`` the rates γ_1..γ_{d_max} grow geometrically
from λ_in at the input to λ_out at the output::

    τ = (d_max - 1) / (ln λ_out - ln λ_in)
    α = exp(ln λ_in + d_max / τ)
    γ_k = α · exp(-(d_max - k + 1) / τ)

A network of depth d ≤ d_max takes the top d of them, λ_{d-j} = γ_{d_max-j},
so its output layer always learns at λ_out and a shallow network's first
layer is not held back at λ_in.
"""

import math
from dataclasses import dataclass
from typing import Tuple

from numeric_core import ArgumentError


@dataclass(frozen=True)
class LrSchedule:
    depth: int
    d_max: int
    lambda_in: float
    lambda_out: float
    tau: float
    alpha: float
    rates: Tuple[float, ...]

    def rate(self, layer: int) -> float:
        """λ for layer 1..depth"""
        if not 1 <= layer <= self.depth:
            raise ArgumentError(f"Layer must lie in [1, {self.depth}], got {layer}")
        return self.rates[layer - 1]

    def scaled(self, factor: float) -> Tuple[float, ...]:
        return tuple(rate * factor for rate in self.rates)

    @property
    def is_constant(self) -> bool:
        return math.isinf(self.tau)


def build_schedule(d: int, d_max: int, lambda_in: float, lambda_out: float) -> LrSchedule:
    if d < 1 or d > d_max:
        raise ArgumentError(f"Need 1 <= d <= d_max, got d={d}, d_max={d_max}")
    if not (lambda_in > 0 and lambda_out > 0):
        raise ArgumentError(f"Rates must be positive, got {lambda_in}, {lambda_out}")

    if lambda_in == lambda_out or d_max == 1:
        # constant schedule; τ is unbounded
        return LrSchedule(
            depth=d,
            d_max=d_max,
            lambda_in=lambda_in,
            lambda_out=lambda_out,
            tau=math.inf,
            alpha=lambda_out,
            rates=(float(lambda_out),) * d,
        )

    log_in, log_out = math.log(lambda_in), math.log(lambda_out)
    tau = (d_max - 1) / (log_out - log_in)
    alpha = math.exp(log_in + d_max / tau)
    offset = d_max - d
    rates = [alpha * math.exp(-(d_max - (offset + k) + 1) / tau) for k in range(1, d + 1)]
    return LrSchedule(
        depth=d,
        d_max=d_max,
        lambda_in=lambda_in,
        lambda_out=lambda_out,
        tau=tau,
        alpha=alpha,
        rates=tuple(rates),
    )
