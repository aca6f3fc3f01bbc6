"""
Training objectives and their fused output-layer deltas
"""

from enum import Enum

import numpy as np

from numeric_core import ArgumentError

from .nonlinearity import OutputActivation


class ObjectiveKind(str, Enum):
    CROSS_ENTROPY = "cross-entropy"
    MSE = "mse"


def check_pairing(objective: ObjectiveKind, output: OutputActivation) -> None:
    if (objective is ObjectiveKind.CROSS_ENTROPY) != (output is OutputActivation.SOFTMAX):
        raise ArgumentError(
            f"Objective {objective.value} cannot be paired with a {output.value} output layer"
        )


def _log_softmax(a: np.ndarray) -> np.ndarray:
    shifted = a - np.max(a, axis=-1, keepdims=True)
    return shifted - np.log(np.sum(np.exp(shifted), axis=-1, keepdims=True))


def objective_value(
    objective: ObjectiveKind,
    output: OutputActivation,
    pre_activation: np.ndarray,
    activation: np.ndarray,
    targets: np.ndarray,
) -> float:
    """Objective averaged over the rows of a batch (a single vector is one row)"""
    check_pairing(objective, output)
    a = np.atleast_2d(pre_activation)
    t = np.atleast_2d(targets)
    if objective is ObjectiveKind.CROSS_ENTROPY:
        per_example = -np.sum(t * _log_softmax(a), axis=1)
    else:
        diff = np.atleast_2d(activation) - t
        per_example = 0.5 * np.sum(diff * diff, axis=1)
    return float(np.mean(per_example))


def output_delta(
    objective: ObjectiveKind,
    output: OutputActivation,
    pre_activation: np.ndarray,
    activation: np.ndarray,
    targets: np.ndarray,
) -> np.ndarray:
    """dE/da_D per example (not divided by batch size)"""
    check_pairing(objective, output)
    if objective is ObjectiveKind.CROSS_ENTROPY:
        # softmax + cross-entropy fused
        return activation - targets
    return (activation - targets) * output.elementwise.derivative(pre_activation)
