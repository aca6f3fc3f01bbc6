"""
Monte-Carlo estimators of the ln z step and the empirical optimal-gain search
"""

import math
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import structlog
from joblib import Parallel, delayed

from deep_net import (
    Nonlinearity,
    backprop_step,
    forward,
    init_network,
    log_gradient_profile,
)
from numeric_core import (
    ArgumentError,
    Rng,
    chi_square_draws,
    gaussian_matrix,
    matvec,
    sample_binomial,
    sample_chi_square,
)

from .closed_form import GainMethod, GainRecommendation, LnZStats, StatsSource

logger = structlog.get_logger(__name__)

DEFAULT_G_GRID: Tuple[float, ...] = tuple(round(1.0 + 0.05 * i, 2) for i in range(21))
DEFAULT_TOLERANCE = 1e-3


class EstimationError(RuntimeError):
    """Raised when no usable trial survives an estimate"""


def _check(n: int) -> None:
    if n < 1:
        raise ArgumentError(f"Layer width must be >= 1, got {n}")


def _surviving_rows(n: int, rng: Rng) -> int:
    # condition on M > 0: a layer with no active unit is not a step
    while True:
        m = sample_binomial(n, 0.5, rng)
        if m > 0:
            return m


def _tanh_ln_z(n: int, rng: Rng, g: float) -> float:
    previous = rng.standard_normal(n)
    incoming = gaussian_matrix(n, n, 1.0 / n, rng)
    fprime = Nonlinearity.TANH.derivative(g * matvec(incoming, previous))
    outgoing = gaussian_matrix(n, n, 1.0 / n, rng)
    delta = rng.standard_normal(n)
    _, z = backprop_step(outgoing, 1.0, delta / np.linalg.norm(delta), fprime)
    return math.log(z)


def sample_ln_z(nonlinearity: Nonlinearity, n: int, rng: Rng, g: float = 1.0) -> float:
    """One draw of the back-propagation step ln z at width n

    linear: ln(χ²_n / n). relu: M ~ Binomial(n, ½) conditioned on M > 0,
    then ln(χ²_M / n). tanh: one explicit step through a Gaussian layer whose
    f' row factors come from a forward-propagated unit-variance activation at
    gain g, so unlike the other two the tanh statistic depends on g.
    """
    _check(n)
    nonlinearity = Nonlinearity(nonlinearity)
    if nonlinearity is Nonlinearity.LINEAR:
        return math.log(sample_chi_square(n, rng) / n)
    if nonlinearity is Nonlinearity.RELU:
        return math.log(sample_chi_square(_surviving_rows(n, rng), rng) / n)
    return _tanh_ln_z(n, rng, g)


def ln_z_draws(
    nonlinearity: Nonlinearity, n: int, size: int, rng: Rng, g: float = 1.0
) -> np.ndarray:
    """``size`` independent ln z draws; vectorized for linear and relu"""
    _check(n)
    nonlinearity = Nonlinearity(nonlinearity)
    if nonlinearity is Nonlinearity.LINEAR:
        return np.log(chi_square_draws(n, size, rng) / n)
    if nonlinearity is Nonlinearity.RELU:
        rows = rng.binomial(n, 0.5, size)
        dead = rows == 0
        while np.any(dead):
            rows[dead] = rng.binomial(n, 0.5, int(np.count_nonzero(dead)))
            dead = rows == 0
        return np.log(chi_square_draws(rows, size, rng) / n)
    return np.array([_tanh_ln_z(n, rng, g) for _ in range(size)])


def estimate_ln_z_stats(
    nonlinearity: Nonlinearity, n: int, samples: int, rng: Rng, g: float = 1.0
) -> LnZStats:
    """Sample mean and variance of ln z with their standard errors"""
    if samples < 2:
        raise ArgumentError(f"Need at least 2 samples, got {samples}")
    draws = ln_z_draws(nonlinearity, n, samples, rng, g)
    mean = float(np.mean(draws))
    centered = draws - mean
    variance = float(np.var(draws, ddof=1))
    fourth = float(np.mean(centered ** 4))
    return LnZStats(
        mean=mean,
        variance=variance,
        n=n,
        nonlinearity=Nonlinearity(nonlinearity),
        source=StatsSource.MONTE_CARLO,
        sample_count=samples,
        standard_error=math.sqrt(variance / samples),
        variance_standard_error=math.sqrt(max(fourth - variance ** 2, 0.0) / samples),
    )


def trial_log_ratio(
    nonlinearity: Nonlinearity, n: int, d: int, g: float, seed: int, path: Tuple[int, ...]
) -> float:
    """ln(|δ_0| / |δ_D|) for one random network with random h_0 and δ_D

    Weights, input and output delta are drawn from child streams of the
    trial, so re-evaluating the same trial at another g reuses them. Returns
    NaN when a layer dies.
    """
    trial = Rng(seed, path)
    params = init_network([n] * (d + 1), g, nonlinearity, seed=trial.split("weights"))
    h0 = trial.split("input").standard_normal(n)
    delta_out = trial.split("delta").standard_normal(n)
    steps = log_gradient_profile(params, forward(params, h0), delta_out)
    if not np.all(np.isfinite(steps)):
        return float("nan")
    return 0.5 * float(np.sum(steps))


def mean_log_ratio(
    nonlinearity: Nonlinearity,
    n: int,
    d: int,
    g: float,
    trials: int,
    rng: Rng,
    workers: int = 1,
) -> Tuple[float, float, int]:
    """Mean and standard error of ln(|δ_0|/|δ_D|) over trials, plus the discarded count"""
    values = Parallel(n_jobs=workers)(
        delayed(trial_log_ratio)(nonlinearity, n, d, g, rng.seed, rng.child(i).path)
        for i in range(trials)
    )
    kept = [v for v in values if math.isfinite(v)]
    discarded = trials - len(kept)
    if not kept:
        raise EstimationError(f"All {trials} trials had a dead layer (n={n}, d={d}, g={g})")
    mean = math.fsum(kept) / len(kept)
    if len(kept) > 1:
        variance = math.fsum((v - mean) ** 2 for v in kept) / (len(kept) - 1)
        std_error = math.sqrt(variance / len(kept))
    else:
        std_error = float("nan")
    return mean, std_error, discarded


def estimate_optimal_g(
    nonlinearity: Nonlinearity,
    n: int,
    d: int,
    trials: int,
    rng: Rng,
    g_grid: Optional[Sequence[float]] = None,
    tolerance: float = DEFAULT_TOLERANCE,
    workers: int = 1,
) -> GainRecommendation:
    """Gain whose mean ln(|δ_0|/|δ_D|) over random networks is zero

    The ascending grid is scanned until the mean log-ratio changes sign, then
    the bracket is bisected down to ``tolerance`` and the root is read off by
    linear interpolation. All evaluations share the same trial networks.
    """
    _check(n)
    if trials < 1 or d < 1:
        raise ArgumentError(f"Need trials >= 1 and d >= 1, got trials={trials}, d={d}")
    nonlinearity = Nonlinearity(nonlinearity)
    grid = sorted(float(g) for g in (g_grid or DEFAULT_G_GRID))
    cache: Dict[float, float] = {}
    discarded = 0

    def evaluate(g: float) -> float:
        nonlocal discarded
        if g not in cache:
            mean, _, dropped = mean_log_ratio(nonlinearity, n, d, g, trials, rng, workers)
            cache[g] = mean
            discarded = max(discarded, dropped)
        return cache[g]

    def recommendation(g: float, bracketed: bool) -> GainRecommendation:
        if discarded:
            logger.warning("dead_layer_trials_discarded", n=n, d=d, discarded=discarded)
        return GainRecommendation(
            g=g,
            n=n,
            nonlinearity=nonlinearity,
            method=GainMethod.EMPIRICAL_SEARCH,
            depth=d,
            trials=trials,
            discarded_trials=discarded,
            evaluations=len(cache),
            bracketed=bracketed,
        )

    low: Optional[float] = None
    high: Optional[float] = None
    for g in grid:
        value = evaluate(g)
        if value == 0.0:
            return recommendation(g, True)
        if value > 0.0:
            high = g
            break
        low = g
    if low is None or high is None:
        edge = grid[0] if low is None else grid[-1]
        logger.warning("optimal_g_not_bracketed", nonlinearity=nonlinearity.value, n=n, edge=edge)
        return recommendation(edge, False)

    while high - low > tolerance:
        middle = 0.5 * (low + high)
        if evaluate(middle) > 0.0:
            high = middle
        else:
            low = middle

    f_low, f_high = cache[low], cache[high]
    root = low + (high - low) * (-f_low) / (f_high - f_low)
    logger.info(
        "optimal_g_estimated",
        nonlinearity=nonlinearity.value,
        n=n,
        d=d,
        g=root,
        evaluations=len(cache),
    )
    return recommendation(root, True)


def optimal_g_table(
    nonlinearity: Nonlinearity,
    widths: Sequence[int],
    d: int,
    trials: int,
    rng: Rng,
    workers: int = 1,
) -> List[GainRecommendation]:
    """Empirical optimal g for each width, each width on its own stream"""
    return [
        estimate_optimal_g(nonlinearity, n, d, trials, rng.split(f"width-{n}"), workers=workers)
        for n in widths
    ]
