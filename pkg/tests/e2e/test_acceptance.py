"""
End-to-end reproductions of the headline results at desk scale

These runs take minutes; deselect them with ``-m "not slow"``.
"""

import math
import os

import numpy as np
import pytest

from data_io import (
    encode_idx,
    load_idx_file,
    load_mnist,
    mnist_available,
    normalize,
    parse_idx,
    synthetic_classification,
)
from deep_net import OutputActivation, init_network
from experiments import MANIFEST_NAME, ExperimentConfig, RuntimeSettings, load_config, run_experiment
from init_theory import (
    estimate_ln_z_stats,
    estimate_optimal_g,
    g_linear,
    g_relu,
    ln_z_var_linear,
)
from numeric_core import Rng
from trainer import TrainConfig, build_schedule, train
from walk_sim import WalkConfig, final_layer_summary, simulate_walk, variance_fit

pytestmark = [pytest.mark.slow, pytest.mark.e2e]


class TestWalkReproduction:
    """Linear walks at N = 100 over 500 layers"""

    def test_optimal_gain_and_unit_gain(self):
        """Test ln Z stays centred at exp(1/200) and drifts to about -5 at g = 1"""
        tuned = final_layer_summary(simulate_walk(WalkConfig(n=100, d=500, g=g_linear(100).g, nonlinearity="linear", seed=21)))
        assert abs(tuned.mean) < 3 * tuned.standard_error
        plain = final_layer_summary(simulate_walk(WalkConfig(n=100, d=500, g=1.0, nonlinearity="linear", seed=22)))
        assert abs(plain.mean + 5.0) < 3 * plain.standard_error + 0.02

    def test_variance_growth(self):
        """Test linear variance growth, its 1/N scaling and both reference slopes"""
        fits = {}
        for n in (100, 200):
            trace = simulate_walk(WalkConfig(n=n, d=500, g=1.0, nonlinearity="linear", samples=2000, seed=n))
            fits[n] = variance_fit(trace)
            assert fits[n].r_squared > 0.99
        measured_step = estimate_ln_z_stats("linear", 100, 200_000, Rng(5)).variance
        assert fits[100].slope == pytest.approx(measured_step, rel=0.1)
        # the 1/(2N) figure is the per-step variance of ½ ln z
        assert fits[100].slope / 4 == pytest.approx(ln_z_var_linear(100), rel=0.1)
        assert fits[100].slope / fits[200].slope == pytest.approx(2.0, rel=0.2)


class TestOptimalGainSearch:
    """Empirical optimal g at N = 100, D = 200"""

    def test_linear(self):
        """Test agreement with exp(1/(2N))"""
        result = estimate_optimal_g("linear", 100, 200, 100, Rng(31))
        assert result.g == pytest.approx(g_linear(100).g, abs=0.01)

    def test_relu(self):
        """Test agreement with the ReLU gain fit"""
        result = estimate_optimal_g("relu", 100, 200, 100, Rng(32))
        assert result.g == pytest.approx(g_relu(100).g, abs=0.03)

    def test_tanh(self):
        """Test the tanh gain lands between 1.1 and 1.3"""
        result = estimate_optimal_g("tanh", 100, 200, 100, Rng(33))
        assert result.bracketed
        assert 1.1 <= result.g <= 1.3


class TestGradientCheckRun:
    """Finite-difference checks through the experiment runner"""

    def test_twenty_seeds_pass(self, tmp_path):
        """Test every nonlinearity and objective over 20 seeds"""
        config = ExperimentConfig.model_validate({"kind": "gradient-check"})
        outcome = run_experiment(config, RuntimeSettings(), tmp_path)
        assert outcome.ok


class TestDeskScaleTraining:
    """Deep tanh training with and without the tuned gain"""

    @pytest.fixture
    def dataset(self):
        directory = os.environ.get("RWI_MNIST_DIR")
        if mnist_available(directory):
            data = load_mnist(directory, limit=1000)
        else:
            data = synthetic_classification(1000, 784, 10, seed=1)
        return normalize(data)

    def _train(self, dataset, g, epochs):
        depth, width = 32, 90
        params = init_network([784] + [width] * (depth - 1) + [10], g, "tanh", OutputActivation.SOFTMAX, seed=4)
        cfg = TrainConfig(epochs=epochs, minibatch=20, seed=6)
        return train(params, dataset, build_schedule(depth, depth, 0.02, 0.02), cfg)

    def test_tuned_gain_trains_and_unit_gain_lags(self, dataset):
        """Test g = 1.2 reaches 5% training error while g = 1 starts with weaker gradients"""
        tuned = self._train(dataset, 1.2, 100)
        assert tuned.min_error_rate < 0.05

        plain = self._train(dataset, 1.0, 3)
        # g = 1 tanh sits near 5.5 exp(D/2N) below g = 1.2 at depth 32, width 90
        factor = math.exp(32 / 180)
        assert 3 * factor < tuned.initial_gradient_ratio / plain.initial_gradient_ratio < 12 * factor
        assert plain.history[3].objective > tuned.history[3].objective


class TestFilesAndReplay:
    """IDX fidelity and manifest replay"""

    def test_random_tensor_round_trip(self):
        """Test random tensors of every element type survive encode and parse bit for bit"""
        rng = Rng(41)
        for dtype in ("u1", "i1", "i2", "i4", "f4", "f8"):
            for _ in range(5):
                shape = tuple(int(s) for s in rng.integers(1, 6, size=int(rng.integers(1, 4))))
                raw = rng.generator.integers(0, 256, size=int(np.prod(shape)) * np.dtype(dtype).itemsize, dtype=np.uint8)
                array = raw.view(np.dtype(dtype)).reshape(shape)
                decoded = parse_idx(encode_idx(array))
                assert decoded.tobytes() == np.ascontiguousarray(array).tobytes()

    def test_mnist_headers(self, mnist_dir):
        """Test image and label headers decode to their documented shapes"""
        assert load_idx_file(mnist_dir / "train-images-idx3-ubyte.gz").shape == (40, 28, 28)
        assert load_idx_file(mnist_dir / "train-labels-idx1-ubyte.gz").shape == (40,)

    def test_sweep_replays_byte_identically(self, tmp_path):
        """Test a sweep rerun from its manifest reproduces every CSV"""
        config = ExperimentConfig.model_validate(
            {
                "kind": "g-sweep",
                "seed": 8,
                "network": {"depth": 3, "width": 12},
                "training": {"epochs": 4, "minibatch": 25},
                "sweep": {"g_values": [1.0, 1.2], "depths": [2, 3], "lambda_in_grid": [0.01, 0.05], "lambda_out_grid": [0.05]},
                "data": {"source": "synthetic", "limit": 100, "dims": 10, "classes": 4},
            }
        )
        settings = RuntimeSettings(workers=2)
        first = run_experiment(config, settings, tmp_path / "first")
        second = run_experiment(load_config(tmp_path / "first" / MANIFEST_NAME), RuntimeSettings(), tmp_path / "second")
        csv_files = [name for name in first.files if name.endswith(".csv")]
        assert csv_files and sorted(csv_files) == sorted(n for n in second.files if n.endswith(".csv"))
        for name in csv_files:
            assert (tmp_path / "first" / name).read_bytes() == (tmp_path / "second" / name).read_bytes()
        for history in sorted((tmp_path / "first" / "cells").glob("history_*.csv")):
            assert history.read_bytes() == (tmp_path / "second" / "cells" / history.name).read_bytes()
