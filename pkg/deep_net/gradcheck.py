"""
Finite-difference validation of the analytic gradients
"""

from typing import List

import numpy as np
import structlog

from .network import NetworkParams, backward, forward, propagate
from .nonlinearity import Nonlinearity
from .objectives import ObjectiveKind, objective_value, output_delta

logger = structlog.get_logger(__name__)

DEFAULT_STEP = 1e-5
# gradients smaller than this are compared on an absolute scale
RELATIVE_FLOOR = 1e-3


def _relative_error(analytic: float, numeric: float) -> float:
    return abs(analytic - numeric) / max(abs(analytic), abs(numeric), RELATIVE_FLOOR)


def gradient_check(
    params: NetworkParams,
    inputs,
    targets,
    objective: ObjectiveKind,
    step: float = DEFAULT_STEP,
) -> float:
    """Maximum relative discrepancy between analytic and central-difference gradients

    For ReLU networks, parameters whose ±step perturbation changes any unit's
    active/inactive pattern straddle a kink and are skipped.
    """
    objective = ObjectiveKind(objective)
    x = np.atleast_2d(np.asarray(inputs, dtype=np.float64))
    t = np.atleast_2d(np.asarray(targets, dtype=np.float64))
    gains = params.gains
    nonlinearity = params.nonlinearity
    output = params.output_activation

    trace = forward(params, x)
    delta = output_delta(objective, output, trace.pre_activations[-1], trace.output, t)
    analytic = backward(params, trace, delta)

    weights: List[np.ndarray] = [w.values.copy() for w in params.weights]
    biases: List[np.ndarray] = [b.copy() for b in params.biases]

    def evaluate():
        pre, acts = propagate(weights, biases, gains, nonlinearity, output, x, params.linear_layers)
        loss = objective_value(objective, output, pre[-1], acts[-1], t)
        pattern = [a > 0 for a in pre[1:]] if nonlinearity is Nonlinearity.RELU else None
        return loss, pattern

    def same_pattern(first, second) -> bool:
        return first is None or all(np.array_equal(p, q) for p, q in zip(first, second))

    worst = 0.0
    skipped = 0
    checked = 0
    groups = [(weights, analytic.weight_gradients), (biases, analytic.bias_gradients)]
    for arrays, gradients in groups:
        for array, gradient in zip(arrays, gradients):
            flat = array.reshape(-1)
            flat_gradient = np.asarray(gradient).reshape(-1)
            for i in range(flat.size):
                original = flat[i]
                flat[i] = original + step
                loss_plus, pattern_plus = evaluate()
                flat[i] = original - step
                loss_minus, pattern_minus = evaluate()
                flat[i] = original
                if not same_pattern(pattern_plus, pattern_minus):
                    skipped += 1
                    continue
                numeric = (loss_plus - loss_minus) / (2.0 * step)
                worst = max(worst, _relative_error(float(flat_gradient[i]), numeric))
                checked += 1

    if skipped:
        logger.warning("gradient_check_kinks_skipped", skipped=skipped, checked=checked)
    logger.debug("gradient_check_done", checked=checked, max_relative_error=worst)
    return worst
