"""
Random walks of ln Z = ln(|δ_0|² / |δ_D|²) across the layers of deep networks

Column j of a trace holds ln Z after j back-propagation steps counted from
the output layer, so column 0 is identically zero. Two modes are offered:

* ``abstract`` adds ``ln(g²) + ln z`` with ln z drawn from its closed-form
  distribution (linear and relu only)
* ``network`` builds a fresh random network for every trajectory, feeds it a
  Gaussian input, back-propagates a Gaussian output delta and records the
  realized per-layer steps (any nonlinearity)
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np
import structlog
from joblib import Parallel, delayed

from deep_net import Nonlinearity, forward, init_network, log_gradient_profile
from init_theory import EstimationError, ln_z_draws
from numeric_core import ArgumentError, Rng

from .moments import RunningMoments

logger = structlog.get_logger(__name__)

DEFAULT_SAMPLES = 500
DEFAULT_MEMORY_BUDGET_BYTES = 256 * 1024 * 1024
CHUNK_SAMPLES = 250
MAX_RESAMPLE_ATTEMPTS = 1000


class WalkMode(str, Enum):
    ABSTRACT = "abstract"
    NETWORK = "network"


@dataclass(frozen=True)
class WalkConfig:
    n: int
    d: int
    g: float
    nonlinearity: Nonlinearity
    samples: int = DEFAULT_SAMPLES
    seed: int = 0
    mode: WalkMode = WalkMode.ABSTRACT
    memory_budget_bytes: int = DEFAULT_MEMORY_BUDGET_BYTES
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "nonlinearity", Nonlinearity(self.nonlinearity))
        object.__setattr__(self, "mode", WalkMode(self.mode))
        if self.n < 1 or self.d < 1 or self.samples < 1:
            raise ArgumentError(
                f"Need n, d, samples >= 1; got n={self.n}, d={self.d}, samples={self.samples}"
            )
        if not self.g > 0:
            raise ArgumentError(f"Gain must be positive, got {self.g}")
        if self.seed < 0:
            raise ArgumentError(f"Seed must be non-negative, got {self.seed}")
        if self.mode is WalkMode.ABSTRACT and self.nonlinearity is Nonlinearity.TANH:
            raise ArgumentError("Abstract walks exist only for linear and relu; use network mode")

    @property
    def trace_bytes(self) -> int:
        return self.samples * (self.d + 1) * 8

    @property
    def materialize(self) -> bool:
        return self.trace_bytes <= self.memory_budget_bytes


@dataclass(frozen=True, eq=False)
class WalkTrace:
    """Per-layer statistics of ln Z, plus the full matrix when it fits the budget"""

    config: WalkConfig
    mean: np.ndarray
    variance: np.ndarray
    samples: int
    ln_z: Optional[np.ndarray] = None
    discarded: int = 0

    def __post_init__(self):
        if self.ln_z is not None:
            if self.ln_z.shape != (self.samples, self.config.d + 1):
                raise ArgumentError(f"Trace matrix has shape {self.ln_z.shape}")
            if np.any(self.ln_z[:, 0] != 0.0):
                raise ArgumentError("Column 0 of a trace must be zero")

    @property
    def depth(self) -> int:
        return len(self.mean) - 1

    @property
    def layers(self) -> np.ndarray:
        return np.arange(self.depth + 1)

    @property
    def standard_error(self) -> np.ndarray:
        return np.sqrt(self.variance / self.samples)


@dataclass(frozen=True)
class VarianceFit:
    slope: float
    intercept: float
    r_squared: float


@dataclass(frozen=True)
class FinalLayerSummary:
    mean: float
    standard_error: float
    variance: float
    samples: int


@dataclass(frozen=True)
class GainCurvePoint:
    """Mean and standard error of ln(|δ_0| / |δ_D|) at one gain"""

    g: float
    mean: float
    standard_error: float
    discarded: int = 0


def _abstract_rows(cfg: WalkConfig, chunk: int, count: int) -> Tuple[np.ndarray, int]:
    rng = Rng(cfg.seed).split("abstract").child(chunk)
    steps = ln_z_draws(cfg.nonlinearity, cfg.n, count * cfg.d, rng).reshape(count, cfg.d)
    steps += math.log(cfg.g ** 2)
    rows = np.zeros((count, cfg.d + 1))
    rows[:, 1:] = np.cumsum(steps, axis=1)
    return rows, 0


def network_steps(cfg: WalkConfig, sample_rng: Rng) -> Tuple[np.ndarray, int]:
    """Per-layer ln(g² z) for one fresh network, resampling dead networks"""
    widths = [cfg.n] * (cfg.d + 1)
    for attempt in range(MAX_RESAMPLE_ATTEMPTS):
        rng = sample_rng.child(attempt)
        params = init_network(widths, cfg.g, cfg.nonlinearity, seed=rng.split("weights"))
        h0 = rng.split("input").standard_normal(cfg.n)
        delta_out = rng.split("delta").standard_normal(cfg.n)
        steps = log_gradient_profile(params, forward(params, h0), delta_out)
        if np.all(np.isfinite(steps)):
            return steps, attempt
    raise EstimationError(
        f"No live network in {MAX_RESAMPLE_ATTEMPTS} attempts (n={cfg.n}, d={cfg.d})"
    )


def _network_rows(cfg: WalkConfig, start: int, stop: int) -> Tuple[np.ndarray, int]:
    root = Rng(cfg.seed).split("network")
    rows = np.zeros((stop - start, cfg.d + 1))
    discarded = 0
    for k, i in enumerate(range(start, stop)):
        steps, dropped = network_steps(cfg, root.child(i))
        rows[k, 1:] = np.cumsum(steps)
        discarded += dropped
    return rows, discarded


def _walk_chunk(
    cfg: WalkConfig, chunk: int
) -> Tuple[RunningMoments, Optional[np.ndarray], int]:
    start = chunk * CHUNK_SAMPLES
    stop = min(start + CHUNK_SAMPLES, cfg.samples)
    if cfg.mode is WalkMode.ABSTRACT:
        rows, discarded = _abstract_rows(cfg, chunk, stop - start)
    else:
        rows, discarded = _network_rows(cfg, start, stop)
    moments = RunningMoments(cfg.d + 1)
    moments.update_batch(rows)
    return moments, (rows if cfg.materialize else None), discarded


def simulate_walk(cfg: WalkConfig) -> WalkTrace:
    """Sample ``cfg.samples`` trajectories of ln Z over ``cfg.d`` layers

    Samples are processed in fixed-size chunks, optionally in parallel; the
    result depends only on the configuration, never on the worker count.
    When the full matrix exceeds the memory budget only streamed per-layer
    moments are kept.
    """
    chunks = range(math.ceil(cfg.samples / CHUNK_SAMPLES))
    results = Parallel(n_jobs=cfg.workers)(delayed(_walk_chunk)(cfg, c) for c in chunks)

    total = RunningMoments(cfg.d + 1)
    discarded = 0
    blocks: List[np.ndarray] = []
    for moments, rows, dropped in results:
        total.merge(moments)
        discarded += dropped
        if rows is not None:
            blocks.append(rows)

    if cfg.materialize:
        ln_z = np.vstack(blocks)
        mean = np.mean(ln_z, axis=0)
        variance = (
            np.var(ln_z, axis=0, ddof=1) if cfg.samples > 1 else np.full(cfg.d + 1, np.nan)
        )
    else:
        ln_z = None
        mean, variance = total.mean, total.variance
        logger.info("walk_trace_streamed", trace_bytes=cfg.trace_bytes, budget=cfg.memory_budget_bytes)

    if discarded:
        logger.warning("dead_networks_resampled", n=cfg.n, d=cfg.d, discarded=discarded)
    logger.info(
        "walk_simulated",
        mode=cfg.mode.value,
        nonlinearity=cfg.nonlinearity.value,
        n=cfg.n,
        d=cfg.d,
        g=cfg.g,
        samples=cfg.samples,
        final_mean=float(mean[-1]),
    )
    return WalkTrace(
        config=cfg,
        mean=mean,
        variance=variance,
        samples=cfg.samples,
        ln_z=ln_z,
        discarded=discarded,
    )


def variance_fit(trace: WalkTrace) -> VarianceFit:
    """Least-squares line through per-layer variance against layer index"""
    if trace.depth < 2:
        raise ArgumentError(f"Need at least 2 layers for a variance fit, got {trace.depth}")
    if trace.samples < 2:
        raise ArgumentError("Variance is undefined for a single trajectory")
    layers = trace.layers.astype(np.float64)
    slope, intercept = np.polyfit(layers, trace.variance, 1)
    residual = trace.variance - (slope * layers + intercept)
    ss_res = float(np.sum(residual ** 2))
    ss_tot = float(np.sum((trace.variance - np.mean(trace.variance)) ** 2))
    if ss_tot > 0:
        r_squared = 1.0 - ss_res / ss_tot
    else:
        r_squared = 1.0 if ss_res == 0 else float("nan")
    return VarianceFit(slope=float(slope), intercept=float(intercept), r_squared=r_squared)


def variance_slope(trace: WalkTrace) -> float:
    return variance_fit(trace).slope


def final_layer_summary(trace: WalkTrace) -> FinalLayerSummary:
    return FinalLayerSummary(
        mean=float(trace.mean[-1]),
        standard_error=float(trace.standard_error[-1]),
        variance=float(trace.variance[-1]),
        samples=trace.samples,
    )


def mean_log_ratio_vs_g(
    n: int,
    d: int,
    g_grid: Sequence[float],
    nonlinearity: Nonlinearity,
    samples: int,
    seed: int,
    workers: int = 1,
) -> List[GainCurvePoint]:
    """Network-mode mean of ln(|δ_0|/|δ_D|) = ½ ln Z for every g in the grid

    Every g reuses the same seed, so the curve is smooth in g.
    """
    grid = [float(g) for g in g_grid]
    if not grid:
        raise ArgumentError("g grid must not be empty")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ArgumentError("g grid must be strictly increasing")
    points = []
    for g in grid:
        trace = simulate_walk(
            WalkConfig(
                n=n,
                d=d,
                g=g,
                nonlinearity=nonlinearity,
                samples=samples,
                seed=seed,
                mode=WalkMode.NETWORK,
                workers=workers,
            )
        )
        summary = final_layer_summary(trace)
        points.append(
            GainCurvePoint(
                g=g,
                mean=0.5 * summary.mean,
                standard_error=0.5 * summary.standard_error,
                discarded=trace.discarded,
            )
        )
    return points
