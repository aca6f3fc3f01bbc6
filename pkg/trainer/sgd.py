"""
Minibatch SGD with per-layer learning rates, epoch decay and global-norm clipping
"""

import math
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
import structlog

from data_io import Dataset
from deep_net import (
    NetworkParams,
    ObjectiveKind,
    backward,
    check_pairing,
    forward,
    log_gradient_profile,
    objective_value,
    output_delta,
)
from numeric_core import ArgumentError, Rng, write_csv

from .schedule import LrSchedule

logger = structlog.get_logger(__name__)

DEFAULT_MINIBATCH = 100
DEFAULT_EPOCH_DECAY = 0.995
DEFAULT_CLIP_THRESHOLD = 100.0


class TrainingDivergedError(RuntimeError):
    """Non-finite objective or gradient during training"""

    def __init__(self, epoch: int, batch: Optional[int], loss: float):
        where = f"epoch {epoch}" + ("" if batch is None else f", batch {batch}")
        super().__init__(f"Training diverged at {where}: objective {loss}")
        self.epoch = epoch
        self.batch = batch
        self.loss = loss


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 100
    minibatch: int = DEFAULT_MINIBATCH
    epoch_decay: float = DEFAULT_EPOCH_DECAY
    clip_threshold: Optional[float] = DEFAULT_CLIP_THRESHOLD
    objective: ObjectiveKind = ObjectiveKind.CROSS_ENTROPY
    seed: int = 0
    bias_rate_multiplier: float = 1.0
    probe_size: int = 100

    def __post_init__(self):
        object.__setattr__(self, "objective", ObjectiveKind(self.objective))
        if self.epochs < 0 or self.minibatch < 1:
            raise ArgumentError("Need epochs >= 0 and minibatch >= 1")
        if not 0.0 < self.epoch_decay <= 1.0:
            raise ArgumentError(f"Epoch decay must lie in (0, 1], got {self.epoch_decay}")
        if self.clip_threshold is not None and not self.clip_threshold > 0:
            raise ArgumentError(f"Clip threshold must be positive, got {self.clip_threshold}")
        if self.bias_rate_multiplier < 0 or self.probe_size < 1:
            raise ArgumentError("Need bias_rate_multiplier >= 0 and probe_size >= 1")


@dataclass(frozen=True, eq=False)
class ParameterGradients:
    weights: Tuple[np.ndarray, ...]
    biases: Tuple[np.ndarray, ...]

    @property
    def global_norm(self) -> float:
        total = math.fsum(float(np.sum(g * g)) for g in self.weights + self.biases)
        return math.sqrt(total)

    def scaled(self, factor: float) -> "ParameterGradients":
        return ParameterGradients(
            weights=tuple(g * factor for g in self.weights),
            biases=tuple(g * factor for g in self.biases),
        )


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    objective: float
    training_errors: Optional[int]
    gradient_ratio: float
    rate_scale: float
    clipped_updates: int = 0


@dataclass(frozen=True, eq=False)
class TrainingResult:
    params: NetworkParams
    history: Tuple[EpochRecord, ...]
    schedule: LrSchedule
    config: TrainConfig
    examples: int = 0

    @property
    def final_objective(self) -> float:
        return self.history[-1].objective

    @property
    def initial_gradient_ratio(self) -> float:
        return self.history[0].gradient_ratio

    @property
    def min_training_errors(self) -> Optional[int]:
        counts = [r.training_errors for r in self.history if r.training_errors is not None]
        return min(counts) if counts else None

    @property
    def min_error_rate(self) -> Optional[float]:
        errors = self.min_training_errors
        return None if errors is None else errors / self.examples

    def epochs_to_error_rate(self, threshold: float) -> Optional[int]:
        """First epoch whose training error rate is at or below ``threshold``"""
        for record in self.history:
            if record.training_errors is not None and record.training_errors / self.examples <= threshold:
                return record.epoch
        return None


def clip_gradient(grads: ParameterGradients, threshold: float) -> ParameterGradients:
    """Rescale to global L2 norm ``threshold`` when the norm exceeds it"""
    if not threshold > 0:
        raise ArgumentError(f"Clip threshold must be positive, got {threshold}")
    norm = grads.global_norm
    if norm > threshold:
        return grads.scaled(threshold / norm)
    return grads


def sgd_step(
    params: NetworkParams,
    grads: ParameterGradients,
    rates: Sequence[float],
    bias_rate_multiplier: float = 1.0,
) -> NetworkParams:
    """θ_d ← θ_d - λ_d ∂E/∂θ_d for every layer d"""
    if len(rates) != params.depth:
        raise ArgumentError(f"Need {params.depth} rates, got {len(rates)}")
    weights = [w.values - rate * g for w, g, rate in zip(params.weights, grads.weights, rates)]
    biases = [
        b - rate * bias_rate_multiplier * g for b, g, rate in zip(params.biases, grads.biases, rates)
    ]
    return params.with_parameters(weights, biases)


def evaluate(params: NetworkParams, dataset: Dataset, objective: ObjectiveKind) -> Tuple[float, Optional[int]]:
    """Mean objective over the dataset and, for classification, the error count"""
    trace = forward(params, dataset.inputs)
    value = objective_value(
        objective, params.output_activation, trace.pre_activations[-1], trace.output, dataset.targets
    )
    if not dataset.is_classification:
        return value, None
    predicted = np.argmax(trace.output, axis=1)
    actual = np.argmax(dataset.targets, axis=1)
    return value, int(np.count_nonzero(predicted != actual))


def gradient_ratio(
    params: NetworkParams, inputs: np.ndarray, targets: np.ndarray, objective: ObjectiveKind
) -> float:
    """Mean |δ_0| / |δ_D| over a probe batch, on the log scale so deep nets cannot overflow"""
    trace = forward(params, inputs)
    delta = output_delta(
        objective, params.output_activation, trace.pre_activations[-1], trace.output, targets
    )
    steps = log_gradient_profile(params, trace, delta)
    with np.errstate(over="ignore"):
        ratios = np.exp(0.5 * np.sum(np.atleast_2d(steps), axis=1))
    finite = ratios[~np.isnan(ratios)]
    return float(np.mean(finite)) if finite.size else float("nan")


def train(
    params: NetworkParams, dataset: Dataset, schedule: LrSchedule, cfg: TrainConfig
) -> TrainingResult:
    """Train with minibatch SGD; rates shrink by ``epoch_decay`` after every epoch

    Epoch 0 of the history describes the untrained network.
    """
    if schedule.depth != params.depth:
        raise ArgumentError(f"Schedule depth {schedule.depth} != network depth {params.depth}")
    if dataset.input_dim != params.layer_widths[0] or dataset.output_dim != params.layer_widths[-1]:
        raise ArgumentError("Dataset dimensions do not match the network")
    if dataset.objective is not cfg.objective:
        raise ArgumentError(
            f"Dataset objective {dataset.objective.value} != configured {cfg.objective.value}"
        )
    check_pairing(cfg.objective, params.output_activation)

    rng = Rng(cfg.seed)
    probe = np.sort(rng.split("probe").permutation(dataset.size)[: cfg.probe_size])
    probe_inputs, probe_targets = dataset.inputs[probe], dataset.targets[probe]

    def record(epoch: int, scale: float, clipped: int) -> EpochRecord:
        value, errors = evaluate(params, dataset, cfg.objective)
        if not math.isfinite(value):
            raise TrainingDivergedError(epoch, None, value)
        return EpochRecord(
            epoch=epoch,
            objective=value,
            training_errors=errors,
            gradient_ratio=gradient_ratio(params, probe_inputs, probe_targets, cfg.objective),
            rate_scale=scale,
            clipped_updates=clipped,
        )

    scale = 1.0
    history: List[EpochRecord] = [record(0, scale, 0)]
    for epoch in range(1, cfg.epochs + 1):
        order = rng.split("shuffle").child(epoch).permutation(dataset.size)
        rates = schedule.scaled(scale)
        clipped = 0
        for batch, start in enumerate(range(0, dataset.size, cfg.minibatch)):
            rows = order[start:start + cfg.minibatch]
            x, t = dataset.inputs[rows], dataset.targets[rows]
            trace = forward(params, x)
            loss = objective_value(
                cfg.objective, params.output_activation, trace.pre_activations[-1], trace.output, t
            )
            delta = output_delta(
                cfg.objective, params.output_activation, trace.pre_activations[-1], trace.output, t
            )
            back = backward(params, trace, delta)
            grads = ParameterGradients(back.weight_gradients, back.bias_gradients)
            norm = grads.global_norm
            if not (math.isfinite(loss) and math.isfinite(norm)):
                raise TrainingDivergedError(epoch, batch, loss)
            if cfg.clip_threshold is not None and norm > cfg.clip_threshold:
                grads = clip_gradient(grads, cfg.clip_threshold)
                clipped += 1
            params = sgd_step(params, grads, rates, cfg.bias_rate_multiplier)
        scale *= cfg.epoch_decay
        history.append(record(epoch, scale, clipped))
        if clipped:
            logger.warning("gradients_clipped", epoch=epoch, updates=clipped)
        logger.debug(
            "epoch_finished",
            epoch=epoch,
            objective=history[-1].objective,
            training_errors=history[-1].training_errors,
        )

    logger.info(
        "training_finished",
        depth=params.depth,
        epochs=cfg.epochs,
        final_objective=history[-1].objective,
        min_training_errors=min(
            (r.training_errors for r in history if r.training_errors is not None), default=None
        ),
    )
    return TrainingResult(
        params=params, history=tuple(history), schedule=schedule, config=cfg, examples=dataset.size
    )


def history_frame(result: TrainingResult) -> pd.DataFrame:
    return pd.DataFrame(
        {
            "epoch": [r.epoch for r in result.history],
            "objective": [r.objective for r in result.history],
            "training_error_count": pd.array(
                [r.training_errors for r in result.history], dtype="Int64"
            ),
            "mean_grad_ratio": [r.gradient_ratio for r in result.history],
            "rate_scale": [r.rate_scale for r in result.history],
            "clipped_updates": [r.clipped_updates for r in result.history],
        }
    )


def export_history_csv(result: TrainingResult, path: Union[str, Path]) -> Path:
    return write_csv(history_frame(result), path)
