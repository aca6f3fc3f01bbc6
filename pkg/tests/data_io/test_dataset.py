"""
Unit tests for datasets and normalization
"""

import numpy as np
import pytest

from data_io import Dataset, apply_normalization, as_autoencoder, normalize, one_hot
from deep_net import ObjectiveKind
from numeric_core import ArgumentError, Rng


def _regression(inputs):
    inputs = np.asarray(inputs, dtype=np.float64)
    return Dataset(inputs=inputs, targets=np.zeros((inputs.shape[0], 1)), objective="mse")


class TestDataset:
    """Test cases for Dataset construction"""

    def test_one_hot_required_for_classification(self):
        """Test cross-entropy datasets need one-hot targets"""
        with pytest.raises(ArgumentError):
            Dataset(inputs=np.zeros((2, 3)), targets=np.array([[0.5, 0.5], [1.0, 0.0]]), objective="cross-entropy")

    def test_shapes_checked(self):
        """Test inputs and targets must agree on the example count"""
        with pytest.raises(ArgumentError):
            Dataset(inputs=np.zeros((3, 2)), targets=np.zeros((2, 1)), objective="mse")
        with pytest.raises(ArgumentError):
            Dataset(inputs=np.zeros(3), targets=np.zeros((3, 1)), objective="mse")

    def test_read_only(self):
        """Test arrays cannot be modified in place"""
        dataset = _regression(np.ones((2, 2)))
        with pytest.raises(ValueError):
            dataset.inputs[0, 0] = 5.0

    def test_take(self):
        """Test the first examples are kept"""
        dataset = Dataset(inputs=np.arange(8.0).reshape(4, 2), targets=one_hot([0, 1, 0, 1], 2),
                          objective=ObjectiveKind.CROSS_ENTROPY, labels=np.array([0, 1, 0, 1]))
        taken = dataset.take(3)
        assert taken.size == 3
        assert list(taken.labels) == [0, 1, 0]

    def test_one_hot_range(self):
        """Test labels outside the class range raise"""
        assert one_hot([2, 0], 3).tolist() == [[0, 0, 1], [1, 0, 0]]
        with pytest.raises(ArgumentError):
            one_hot([3], 3)


class TestNormalize:
    """Test cases for per-dimension standardization"""

    def test_two_points(self):
        """Test [[0], [2]] becomes [[-1], [1]]"""
        assert normalize(_regression([[0.0], [2.0]])).inputs.tolist() == [[-1.0], [1.0]]

    def test_constant_dimension_maps_to_zero(self):
        """Test a constant dimension becomes zero instead of NaN"""
        normalized = normalize(_regression([[5.0, 1.0], [5.0, 3.0], [5.0, 2.0]]))
        assert np.all(normalized.inputs[:, 0] == 0.0)
        assert np.all(np.isfinite(normalized.inputs))

    def test_moments(self):
        """Test zero mean and unit variance per dimension"""
        inputs = Rng(1).standard_normal((500, 6)) * np.arange(1, 7) + 4
        normalized = normalize(_regression(inputs))
        assert np.allclose(normalized.inputs.mean(axis=0), 0.0, atol=1e-12)
        assert np.allclose(normalized.inputs.var(axis=0), 1.0)

    def test_idempotent(self):
        """Test normalizing twice changes nothing"""
        once = normalize(_regression(Rng(2).standard_normal((50, 3)) * 3))
        twice = normalize(once)
        assert np.allclose(once.inputs, twice.inputs)

    def test_targets_untouched(self):
        """Test targets are not rescaled"""
        dataset = Dataset(inputs=[[0.0], [4.0]], targets=[[10.0], [20.0]], objective="mse")
        assert normalize(dataset).targets.tolist() == [[10.0], [20.0]]

    def test_apply_to_another_split(self):
        """Test stored statistics map a second split"""
        train = normalize(_regression([[0.0], [2.0]]))
        mapped = apply_normalization(_regression([[4.0]]), train.normalization)
        assert mapped.inputs.tolist() == [[3.0]]

    def test_single_example_refused(self):
        """Test normalization needs two examples"""
        with pytest.raises(ArgumentError):
            normalize(_regression([[1.0]]))


class TestAutoencoder:
    """Test cases for reconstruction datasets"""

    def test_targets_are_inputs(self):
        """Test targets copy the inputs under MSE"""
        dataset = Dataset(inputs=[[1.0, 2.0], [3.0, 4.0]], targets=one_hot([0, 1], 2), objective="cross-entropy")
        auto = as_autoencoder(dataset)
        assert auto.objective is ObjectiveKind.MSE
        assert np.array_equal(auto.targets, auto.inputs)
        assert auto.output_dim == 2
