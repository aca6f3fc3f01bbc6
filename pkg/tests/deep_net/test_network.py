"""
Unit tests for the feedforward network, back-propagation and instrumentation
"""

import math

import numpy as np
import pytest

from deep_net import (
    Nonlinearity,
    OutputActivation,
    backprop_step,
    backward,
    forward,
    init_network,
    log_gradient_profile,
)
from numeric_core import ArgumentError, Matrix, Rng


class TestInitNetwork:
    """Test cases for network initialization"""

    def test_deep_narrow_network_invariants(self):
        """Test shapes, zero biases and fan-in variance on a 512-layer network"""
        widths = [784] + [88] * 511 + [10]
        params = init_network(widths, math.exp(1 / 176), "linear", seed=3)
        assert params.depth == 512
        for d, (weight, bias) in enumerate(zip(params.weights, params.biases), start=1):
            assert weight.shape == (widths[d], widths[d - 1])
            assert not np.any(bias)
        first = params.weights[0].entries
        assert abs(np.var(first) * 784 - 1) < 0.03
        hidden = np.concatenate([w.entries for w in params.weights[1:-1]])
        assert abs(np.var(hidden) * 88 - 1) < 0.01

    def test_minimal_network_is_affine(self):
        """Test a one-layer linear network computes g·W·x + b"""
        params = init_network([4, 4], 1.0, "linear", seed=1)
        x = np.arange(4.0)
        assert params.depth == 1
        assert np.allclose(forward(params, x).output, params.weights[0].values @ x)

    def test_same_seed_identical(self):
        """Test determinism of initialization"""
        first = init_network([6, 5, 4], 1.2, "tanh", seed=9)
        second = init_network([6, 5, 4], 1.2, "tanh", seed=9)
        assert all(a == b for a, b in zip(first.weights, second.weights))

    @pytest.mark.parametrize("widths,g", [([5], 1.0), ([5, 0, 3], 1.0), ([5, 3], 0.0)])
    def test_invalid_arguments(self, widths, g):
        """Test bad widths and gains raise argument errors"""
        with pytest.raises(ArgumentError):
            init_network(widths, g, "relu")

    def test_gain_overrides(self):
        """Test g_1 and g_D overrides around the shared gain"""
        params = init_network([3, 3, 3, 3], 1.1, "tanh", seed=0, input_gain=2.0, output_gain=0.5)
        assert params.gains == (2.0, 1.1, 0.5)

    def test_parameter_count(self):
        """Test weights plus biases are counted"""
        params = init_network([784, 100, 10], 1.0, "relu", seed=0)
        assert params.parameter_count == 785 * 100 + 101 * 10


class TestForward:
    """Test cases for the forward pass"""

    @pytest.mark.parametrize("kind", list(Nonlinearity))
    def test_zero_input_stays_zero(self, kind):
        """Test f(0) = 0 keeps every activation at zero"""
        params = init_network([5, 6, 6, 4], 1.3, kind, seed=2)
        trace = forward(params, np.zeros(5))
        assert all(not np.any(a) for a in trace.pre_activations)
        assert all(not np.any(h) for h in trace.activations)

    def test_identity_composition(self):
        """Test identity weights reproduce the input"""
        params = init_network([3, 3, 3], 1.0, "linear", seed=0)
        params = params.with_parameters([np.eye(3), np.eye(3)], [np.zeros(3), np.zeros(3)])
        x = np.array([0.3, -1.0, 2.0])
        assert np.allclose(forward(params, x).output, x)

    def test_tanh_range(self):
        """Test tanh activations stay inside (-1, 1)"""
        params = init_network([10, 20, 20, 5], 1.5, "tanh", seed=4)
        trace = forward(params, Rng(1).standard_normal((8, 10)) * 5)
        assert all(np.all(np.abs(h) < 1) for h in trace.activations[1:])

    def test_softmax_output_rows_sum_to_one(self):
        """Test the softmax output layer"""
        params = init_network([4, 6, 3], 1.0, "relu", OutputActivation.SOFTMAX, seed=5)
        output = forward(params, Rng(2).standard_normal((7, 4))).output
        assert np.allclose(output.sum(axis=1), 1.0)

    def test_input_dimension_mismatch(self):
        """Test a wrong input width raises"""
        params = init_network([4, 3], 1.0, "linear", seed=0)
        with pytest.raises(ArgumentError):
            forward(params, np.ones(5))


class TestBackward:
    """Test cases for back-propagation"""

    def test_single_linear_layer(self):
        """Test δ_0 = Wᵀ δ_1 for D = 1, g = 1"""
        params = init_network([4, 3], 1.0, "linear", seed=6)
        delta = np.array([1.0, -2.0, 0.5])
        back = backward(params, forward(params, np.ones(4)), delta)
        assert np.allclose(back.deltas[0], params.weights[0].values.T @ delta)

    def test_exact_telescoping(self):
        """Test |δ_0|²/|δ_D|² = Π g_d² z_d on 100 random networks"""
        rng = Rng(77)
        kinds = list(Nonlinearity)
        checked = 0
        for i in range(100):
            widths = [int(w) for w in rng.integers(8, 30, size=int(rng.integers(2, 7)))]
            kind = kinds[i % 3]
            g = float(0.8 + rng.integers(0, 10) / 10)
            params = init_network(widths, g, kind, seed=rng.split(i))
            back = backward(params, forward(params, rng.standard_normal(widths[0])), rng.standard_normal(widths[-1]))
            if not np.any(back.deltas[0]):
                continue
            ratio = back.squared_norm_ratio
            assert abs(ratio - back.gain_weighted_product) <= 1e-8 * ratio
            checked += 1
        assert checked > 90

    def test_uniform_gain_product(self):
        """Test the product equals g^{2D} Π z_d for uniform gains"""
        params = init_network([10] * 6, 1.3, "tanh", seed=8)
        back = backward(params, forward(params, Rng(0).standard_normal(10)), Rng(1).standard_normal(10))
        expected = 1.3 ** (2 * 5) * np.prod(back.z)
        assert back.squared_norm_ratio == pytest.approx(expected, rel=1e-10)

    def test_dead_relu_layer_annihilates_delta(self):
        """Test δ vanishes below a layer whose pre-activations are all negative"""
        params = init_network([5, 6, 6, 4], 1.0, "relu", seed=3)
        biases = [b.copy() for b in params.biases]
        biases[0] = np.full(6, -100.0)
        params = params.with_parameters([w.values for w in params.weights], biases)
        back = backward(params, forward(params, np.ones(5)), np.ones(4))
        assert not np.any(back.deltas[0])
        assert not np.any(back.deltas[1])
        assert np.any(back.deltas[3])

    def test_zero_output_delta(self):
        """Test a zero delta gives zero deltas and gradients"""
        params = init_network([4, 5, 3], 1.2, "tanh", seed=2)
        back = backward(params, forward(params, np.ones(4)), np.zeros(3))
        assert all(not np.any(d) for d in back.deltas)
        assert all(not np.any(g) for g in back.weight_gradients + back.bias_gradients)

    def test_delta_dimension_mismatch(self):
        """Test a wrong delta width raises"""
        params = init_network([4, 3], 1.0, "linear", seed=0)
        with pytest.raises(ArgumentError):
            backward(params, forward(params, np.ones(4)), np.ones(4))

    def test_backprop_step_matches_backward(self):
        """Test one explicit step agrees with the full pass"""
        params = init_network([6, 6, 6], 1.4, "tanh", seed=11)
        trace = forward(params, Rng(3).standard_normal(6))
        delta = Rng(4).standard_normal(6)
        back = backward(params, trace, delta)
        fprime = Nonlinearity.TANH.derivative(trace.pre_activations[1])
        step, z = backprop_step(params.weights[1], 1.4, delta, fprime)
        assert np.allclose(step, back.deltas[1])
        assert z == pytest.approx(back.z[1])

    def test_linear_steps_are_chi_square(self):
        """Test N·z matches chi-square(N) moments for linear steps"""
        rng = Rng(31)
        n = 50
        samples = []
        for i in range(2000):
            weight = Matrix(rng.standard_normal((n, n)) / np.sqrt(n))
            delta = rng.standard_normal(n)
            _, z = backprop_step(weight, 1.0, delta / np.linalg.norm(delta))
            samples.append(n * z)
        samples = np.array(samples)
        assert abs(samples.mean() - n) < 1.0
        assert abs(samples.var() / (2 * n) - 1) < 0.15


class TestLogGradientProfile:
    """Test cases for the renormalized log-ratio profile"""

    def test_sum_matches_norm_ratio(self):
        """Test Σ steps = ln(|δ_0|²/|δ_D|²)"""
        params = init_network([12] * 8, 1.2, "tanh", seed=5)
        trace = forward(params, Rng(6).standard_normal(12))
        delta = Rng(7).standard_normal(12)
        steps = log_gradient_profile(params, trace, delta)
        back = backward(params, trace, delta)
        assert steps.shape == (7,)
        assert np.sum(steps) == pytest.approx(math.log(back.squared_norm_ratio), rel=1e-9)

    def test_no_overflow_when_exploding(self):
        """Test explosive gains stay finite on the log scale"""
        params = init_network([20] * 1001, 3.0, "linear", seed=1)
        trace = forward(params, np.zeros(20))
        steps = log_gradient_profile(params, trace, Rng(2).standard_normal(20))
        assert np.all(np.isfinite(steps))
        assert np.sum(steps) > 1000

    def test_dead_layer_marks_rest_nan(self):
        """Test -inf at the annihilating step and NaN afterwards"""
        params = init_network([5, 6, 6, 4], 1.0, "relu", seed=3)
        biases = [b.copy() for b in params.biases]
        biases[0] = np.full(6, -100.0)
        params = params.with_parameters([w.values for w in params.weights], biases)
        steps = log_gradient_profile(params, forward(params, np.ones(5)), np.ones(4))
        # layer 3 sees relu'(a_2) = 0 everywhere since h_1 is dead
        assert steps[0] == -np.inf
        assert np.all(np.isnan(steps[1:]))

    def test_optimal_linear_gain_is_unbiased(self):
        """Test mean ln Z over fresh networks is near zero at g = exp(1/(2N))"""
        n, depth, samples = 100, 200, 100
        g = math.exp(1 / (2 * n))
        totals = []
        for i in range(samples):
            rng = Rng(404).child(i)
            params = init_network([n] * (depth + 1), g, "linear", seed=rng.split("weights"))
            trace = forward(params, rng.split("input").standard_normal(n))
            totals.append(np.sum(log_gradient_profile(params, trace, rng.split("delta").standard_normal(n))))
        totals = np.array(totals)
        standard_error = totals.std(ddof=1) / math.sqrt(samples)
        assert abs(totals.mean()) < 3 * standard_error


class TestLinearLayers:
    """Test cases for hidden layers that stay linear"""

    @pytest.fixture
    def bottleneck_net(self):
        return init_network(
            [8, 6, 3, 6, 8], 3.0, "tanh", OutputActivation.LINEAR, seed=4, linear_layers=[2]
        )

    def test_code_layer_activations_equal_preactivations(self, bottleneck_net):
        """Test the linear layer passes a_d through while tanh layers saturate"""
        trace = forward(bottleneck_net, 3.0 * Rng(1).standard_normal((5, 8)))
        assert np.array_equal(trace.activations[2], trace.pre_activations[2])
        assert np.max(np.abs(trace.pre_activations[2])) > 1.0
        assert np.max(np.abs(trace.activations[1])) <= 1.0
        assert np.max(np.abs(trace.activations[3])) <= 1.0

    def test_backward_skips_derivative_on_linear_layer(self, bottleneck_net):
        """Test δ_2 = g W_3ᵀ δ_3 and the norm ratio still telescopes"""
        trace = forward(bottleneck_net, Rng(2).standard_normal((4, 8)))
        back = backward(bottleneck_net, trace, Rng(3).standard_normal((4, 8)))
        expected = 3.0 * back.deltas[3] @ bottleneck_net.weights[2].values
        assert np.allclose(back.deltas[2], expected, rtol=1e-12, atol=0)
        assert np.allclose(back.squared_norm_ratio, back.gain_weighted_product, rtol=1e-9, atol=0)

    def test_profile_agrees_with_backward(self, bottleneck_net):
        """Test the renormalized profile sees the linear layer too"""
        trace = forward(bottleneck_net, Rng(5).standard_normal(8))
        delta = Rng(6).standard_normal(8)
        steps = log_gradient_profile(bottleneck_net, trace, delta)
        back = backward(bottleneck_net, trace, delta)
        assert np.sum(steps) == pytest.approx(math.log(back.squared_norm_ratio), rel=1e-9)

    @pytest.mark.parametrize("layers", [(0,), (4,), (1, 5)])
    def test_only_hidden_layers_can_be_linear(self, layers):
        """Test the input and output layers are rejected"""
        with pytest.raises(ArgumentError):
            init_network([8, 6, 3, 6, 8], 1.0, "tanh", seed=0, linear_layers=layers)
