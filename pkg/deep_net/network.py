"""
Feedforward network with exact forward pass, back-propagation and
gradient-norm instrumentation

Layer d (1..D) computes ``a_d = g_d W_d h_{d-1} + b_d`` and ``h_d = f(a_d)``;
the final layer uses the output activation, and hidden layers listed in
``linear_layers`` (the code layer of an autoencoder) stay linear.
Back-propagation runs on ``δ_d = dE/da_d`` with the step

    δ_{d-1} = g_d · f'(a_{d-1}) ⊙ (W_dᵀ δ_d),    f'(a_0) ≡ 1,

where f' ≡ 1 on linear layers as well.

so that ``z_d = |f'(a_{d-1}) ⊙ W_dᵀ δ_d|² / |δ_d|²`` and
``|δ_0|² / |δ_D|² = Π_d g_d² z_d`` holds for every realized run.

All operations accept a single vector or a batch whose rows are examples.
Parameter gradients are averaged over the rows of the batch.
"""

from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import structlog

from numeric_core import (
    ArgumentError,
    Matrix,
    Rng,
    as_rng,
    gaussian_matrix,
    matvec_transposed,
)

from .nonlinearity import Nonlinearity, OutputActivation

logger = structlog.get_logger(__name__)


@dataclass(frozen=True, eq=False)
class NetworkParams:
    """Weights, biases and gains of a D-layer network

    ``layer_widths`` lists the widths of h_0 .. h_D. ``g`` is the shared gain;
    ``input_gain`` and ``output_gain`` optionally override g_1 and g_D.
    ``linear_layers`` holds hidden layer indices d (1..D-1) with h_d = a_d.
    """

    layer_widths: Tuple[int, ...]
    weights: Tuple[Matrix, ...]
    biases: Tuple[np.ndarray, ...]
    g: float
    nonlinearity: Nonlinearity
    output_activation: OutputActivation
    input_gain: Optional[float] = None
    output_gain: Optional[float] = None
    seed: Optional[int] = None
    linear_layers: Tuple[int, ...] = ()

    def __post_init__(self):
        widths = tuple(int(w) for w in self.layer_widths)
        if len(widths) < 2 or min(widths) < 1:
            raise ArgumentError(f"Invalid layer widths {widths}")
        if len(self.weights) != len(widths) - 1 or len(self.biases) != len(widths) - 1:
            raise ArgumentError("Need exactly one weight matrix and bias vector per layer")
        biases = []
        for d, (weight, bias) in enumerate(zip(self.weights, self.biases), start=1):
            if weight.shape != (widths[d], widths[d - 1]):
                raise ArgumentError(
                    f"Layer {d} weight has shape {weight.shape}, expected "
                    f"{(widths[d], widths[d - 1])}"
                )
            bias = np.array(bias, dtype=np.float64, copy=True)
            if bias.shape != (widths[d],):
                raise ArgumentError(f"Layer {d} bias has shape {bias.shape}")
            bias.setflags(write=False)
            biases.append(bias)
        for gain in (self.g, self.input_gain, self.output_gain):
            if gain is not None and not gain > 0:
                raise ArgumentError(f"Gains must be positive, got {gain}")
        object.__setattr__(self, "layer_widths", widths)
        object.__setattr__(self, "weights", tuple(self.weights))
        object.__setattr__(self, "biases", tuple(biases))
        object.__setattr__(self, "nonlinearity", Nonlinearity(self.nonlinearity))
        object.__setattr__(self, "output_activation", OutputActivation(self.output_activation))
        linear = tuple(sorted({int(d) for d in self.linear_layers}))
        if linear and not 1 <= linear[0] <= linear[-1] < len(widths) - 1:
            raise ArgumentError(f"Linear layers {linear} must be hidden layers 1..{len(widths) - 2}")
        object.__setattr__(self, "linear_layers", linear)

    @property
    def depth(self) -> int:
        return len(self.weights)

    @property
    def gains(self) -> Tuple[float, ...]:
        """Per-layer gains (g_1, g, ..., g, g_D)"""
        gains = [float(self.g)] * self.depth
        if self.output_gain is not None:
            gains[-1] = float(self.output_gain)
        if self.input_gain is not None:
            gains[0] = float(self.input_gain)
        return tuple(gains)

    def hidden_derivative(self, d: int, a: np.ndarray) -> np.ndarray:
        """f'(a_d) for hidden layer d; ones on a linear layer"""
        if d in self.linear_layers:
            return np.ones_like(a)
        return self.nonlinearity.derivative(a)

    @property
    def parameter_count(self) -> int:
        return sum(w.rows * w.cols + w.rows for w in self.weights)

    def with_gain(self, g: float) -> "NetworkParams":
        return replace(self, g=float(g))

    def with_parameters(
        self, weights: Sequence[np.ndarray], biases: Sequence[np.ndarray]
    ) -> "NetworkParams":
        return replace(
            self,
            weights=tuple(Matrix(w) for w in weights),
            biases=tuple(np.asarray(b) for b in biases),
        )


@dataclass(frozen=True, eq=False)
class ForwardTrace:
    """a_d and h_d for d = 0..D; a_0 and h_0 are the input itself"""

    pre_activations: Tuple[np.ndarray, ...]
    activations: Tuple[np.ndarray, ...]

    @property
    def output(self) -> np.ndarray:
        return self.activations[-1]


@dataclass(frozen=True, eq=False)
class BackwardTrace:
    """Deltas δ_0..δ_D, per-layer z_1..z_D and batch-mean parameter gradients

    ``z[..., d-1]`` belongs to layer d; it is NaN once the delta has vanished.
    """

    deltas: Tuple[np.ndarray, ...]
    z: np.ndarray
    gains: Tuple[float, ...]
    weight_gradients: Tuple[np.ndarray, ...]
    bias_gradients: Tuple[np.ndarray, ...]

    @property
    def squared_norm_ratio(self):
        """Z = |δ_0|² / |δ_D|² per example"""
        top = np.sum(np.atleast_2d(self.deltas[-1]) ** 2, axis=1)
        bottom = np.sum(np.atleast_2d(self.deltas[0]) ** 2, axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = bottom / top
        return ratio if np.ndim(self.deltas[0]) > 1 else float(ratio[0])

    @property
    def gain_weighted_product(self):
        """Π_d g_d² z_d per example"""
        factors = np.atleast_2d(self.z) * np.square(self.gains)
        product = np.prod(factors, axis=1)
        return product if np.ndim(self.z) > 1 else float(product[0])


def _normalize_output(output_nonlinearity, nonlinearity: Nonlinearity) -> OutputActivation:
    if output_nonlinearity is None:
        return OutputActivation.from_nonlinearity(nonlinearity)
    if isinstance(output_nonlinearity, Nonlinearity):
        return OutputActivation.from_nonlinearity(output_nonlinearity)
    return OutputActivation(output_nonlinearity)


def init_network(
    layer_widths: Sequence[int],
    g: float,
    nonlinearity: Union[Nonlinearity, str],
    output_nonlinearity: Union[Nonlinearity, OutputActivation, str, None] = None,
    seed: Union[int, Rng] = 0,
    *,
    input_gain: Optional[float] = None,
    output_gain: Optional[float] = None,
    linear_layers: Sequence[int] = (),
) -> NetworkParams:
    """Fresh network: W_d entries ~ N(0, 1/fan-in), zero biases, shared gain g"""
    widths = [int(w) for w in layer_widths]
    if len(widths) < 2 or min(widths) < 1:
        raise ArgumentError(f"Need at least two layer widths, all >= 1; got {widths}")
    if not g > 0:
        raise ArgumentError(f"Gain must be positive, got {g}")
    nonlinearity = Nonlinearity(nonlinearity)
    rng = as_rng(seed)
    weights = tuple(
        gaussian_matrix(fan_out, fan_in, 1.0 / fan_in, rng)
        for fan_in, fan_out in zip(widths[:-1], widths[1:])
    )
    biases = tuple(np.zeros(width) for width in widths[1:])
    return NetworkParams(
        layer_widths=tuple(widths),
        weights=weights,
        biases=biases,
        g=float(g),
        nonlinearity=nonlinearity,
        output_activation=_normalize_output(output_nonlinearity, nonlinearity),
        input_gain=input_gain,
        output_gain=output_gain,
        seed=rng.seed,
        linear_layers=tuple(linear_layers),
    )


def propagate(
    weights: Sequence[np.ndarray],
    biases: Sequence[np.ndarray],
    gains: Sequence[float],
    nonlinearity: Nonlinearity,
    output_activation: OutputActivation,
    inputs: np.ndarray,
    linear_layers: Sequence[int] = (),
) -> Tuple[List[np.ndarray], List[np.ndarray]]:
    """Forward pass on raw arrays; rows of ``inputs`` are examples"""
    linear = set(linear_layers)
    pre = [inputs]
    acts = [inputs]
    h = inputs
    depth = len(weights)
    for d, (weight, bias, gain) in enumerate(zip(weights, biases, gains), start=1):
        a = gain * (h @ weight.T) + bias
        if d == depth:
            h = output_activation.activate(a)
        elif d in linear:
            h = a
        else:
            h = nonlinearity.activate(a)
        pre.append(a)
        acts.append(h)
    return pre, acts


def _as_batch(values, width: int, what: str) -> Tuple[np.ndarray, bool]:
    array = np.asarray(values, dtype=np.float64)
    if array.ndim not in (1, 2) or array.shape[-1] != width:
        raise ArgumentError(f"{what} has shape {array.shape}, expected last dimension {width}")
    return np.atleast_2d(array), array.ndim == 1


def forward(params: NetworkParams, inputs) -> ForwardTrace:
    """Forward pass for one input vector or a batch of rows"""
    batch, single = _as_batch(inputs, params.layer_widths[0], "Input")
    pre, acts = propagate(
        [w.values for w in params.weights],
        params.biases,
        params.gains,
        params.nonlinearity,
        params.output_activation,
        batch,
        params.linear_layers,
    )
    if single:
        pre = [a[0] for a in pre]
        acts = [h[0] for h in acts]
    return ForwardTrace(pre_activations=tuple(pre), activations=tuple(acts))


def backprop_step(
    weight: Matrix, gain: float, delta: np.ndarray, fprime: Optional[np.ndarray] = None
) -> Tuple[np.ndarray, float]:
    """One step δ_{d-1} = g f'(a_{d-1}) ⊙ W_dᵀ δ_d for a single vector; returns (δ_{d-1}, z_d)"""
    back = matvec_transposed(weight, delta)
    if fprime is not None:
        back = back * fprime
    norm_sq = float(np.dot(delta, delta))
    z = float(np.dot(back, back)) / norm_sq if norm_sq > 0 else float("nan")
    return gain * back, z


def backward(params: NetworkParams, trace: ForwardTrace, delta_out) -> BackwardTrace:
    """Back-propagate ``delta_out`` (dE/da_D) through the network of ``trace``"""
    delta, single = _as_batch(delta_out, params.layer_widths[-1], "Output delta")
    pre = [np.atleast_2d(a) for a in trace.pre_activations]
    acts = [np.atleast_2d(h) for h in trace.activations]
    if len(pre) != params.depth + 1 or pre[-1].shape[0] != delta.shape[0]:
        raise ArgumentError("Forward trace does not match the network or the delta batch")

    depth = params.depth
    batch_size = delta.shape[0]
    gains = params.gains
    deltas: List[np.ndarray] = [None] * (depth + 1)
    weight_grads: List[np.ndarray] = [None] * depth
    bias_grads: List[np.ndarray] = [None] * depth
    z = np.empty((batch_size, depth))
    deltas[depth] = delta

    for d in range(depth, 0, -1):
        gain = gains[d - 1]
        weight_grads[d - 1] = gain * (delta.T @ acts[d - 1]) / batch_size
        bias_grads[d - 1] = np.mean(delta, axis=0)
        back = delta @ params.weights[d - 1].values
        if d > 1:
            back = back * params.hidden_derivative(d - 1, pre[d - 1])
        norm_in = np.sum(delta * delta, axis=1)
        norm_out = np.sum(back * back, axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            z[:, d - 1] = np.where(norm_in > 0, norm_out / norm_in, np.nan)
        delta = gain * back
        deltas[d - 1] = delta

    if single:
        deltas = [row[0] for row in deltas]
        z = z[0]
    return BackwardTrace(
        deltas=tuple(deltas),
        z=z,
        gains=gains,
        weight_gradients=tuple(weight_grads),
        bias_gradients=tuple(bias_grads),
    )


def log_gradient_profile(params: NetworkParams, trace: ForwardTrace, delta_out) -> np.ndarray:
    """Per-step ln(g_d² z_d) from layer D down to layer 1

    Deltas are renormalized after every step, so arbitrarily deep or
    explosive networks never overflow. A step that annihilates the delta
    yields -inf and every later step is NaN.
    """
    delta, single = _as_batch(delta_out, params.layer_widths[-1], "Output delta")
    pre = [np.atleast_2d(a) for a in trace.pre_activations]
    depth = params.depth
    gains = params.gains

    norms = np.sqrt(np.sum(delta * delta, axis=1))
    alive = norms > 0
    delta = np.where(alive[:, None], delta / np.where(alive, norms, 1.0)[:, None], 0.0)
    steps = np.full((delta.shape[0], depth), np.nan)

    for k, d in enumerate(range(depth, 0, -1)):
        back = delta @ params.weights[d - 1].values
        if d > 1:
            back = back * params.hidden_derivative(d - 1, pre[d - 1])
        norm_sq = np.sum(back * back, axis=1)
        with np.errstate(divide="ignore"):
            step = np.log(gains[d - 1] ** 2) + np.log(norm_sq)
        steps[:, k] = np.where(alive, step, np.nan)
        survived = norm_sq > 0
        scale = np.where(survived, np.sqrt(np.where(survived, norm_sq, 1.0)), 1.0)
        delta = np.where(survived[:, None], back / scale[:, None], 0.0)
        alive = alive & survived

    return steps[0] if single else steps
