"""
Datasets and per-dimension standardization
"""

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from sklearn.preprocessing import StandardScaler

from deep_net import ObjectiveKind
from numeric_core import ArgumentError


@dataclass(frozen=True, eq=False)
class Normalization:
    """Per-dimension mean and scale; constant dimensions carry scale 1"""

    mean: np.ndarray
    scale: np.ndarray

    def apply(self, inputs: np.ndarray) -> np.ndarray:
        inputs = np.asarray(inputs, dtype=np.float64)
        if inputs.shape[-1] != self.mean.shape[0]:
            raise ArgumentError(
                f"Inputs have {inputs.shape[-1]} dimensions, normalization has {self.mean.shape[0]}"
            )
        return (inputs - self.mean) / self.scale


@dataclass(frozen=True, eq=False)
class Dataset:
    """Examples are rows; classification targets are one-hot rows"""

    inputs: np.ndarray
    targets: np.ndarray
    objective: ObjectiveKind
    normalization: Optional[Normalization] = None
    labels: Optional[np.ndarray] = None

    def __post_init__(self):
        inputs = np.array(self.inputs, dtype=np.float64)
        targets = np.array(self.targets, dtype=np.float64)
        if inputs.ndim != 2 or targets.ndim != 2:
            raise ArgumentError("Inputs and targets must be 2-D (examples x dims)")
        if inputs.shape[0] != targets.shape[0]:
            raise ArgumentError(
                f"{inputs.shape[0]} inputs but {targets.shape[0]} targets"
            )
        objective = ObjectiveKind(self.objective)
        if objective is ObjectiveKind.CROSS_ENTROPY:
            if not np.all((targets == 0.0) | (targets == 1.0)) or not np.all(
                targets.sum(axis=1) == 1.0
            ):
                raise ArgumentError("Classification targets must be one-hot rows")
        inputs.setflags(write=False)
        targets.setflags(write=False)
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "targets", targets)
        object.__setattr__(self, "objective", objective)

    @property
    def size(self) -> int:
        return self.inputs.shape[0]

    @property
    def input_dim(self) -> int:
        return self.inputs.shape[1]

    @property
    def output_dim(self) -> int:
        return self.targets.shape[1]

    @property
    def is_classification(self) -> bool:
        return self.objective is ObjectiveKind.CROSS_ENTROPY

    def take(self, limit: int) -> "Dataset":
        """First ``limit`` examples"""
        if limit < 1:
            raise ArgumentError(f"Limit must be >= 1, got {limit}")
        labels = None if self.labels is None else self.labels[:limit]
        return replace(self, inputs=self.inputs[:limit], targets=self.targets[:limit], labels=labels)


def one_hot(labels, classes: int) -> np.ndarray:
    labels = np.asarray(labels, dtype=np.int64)
    if labels.size and (labels.min() < 0 or labels.max() >= classes):
        raise ArgumentError(f"Labels must lie in [0, {classes})")
    encoded = np.zeros((labels.shape[0], classes))
    encoded[np.arange(labels.shape[0]), labels] = 1.0
    return encoded


def normalize(dataset: Dataset) -> Dataset:
    """Standardize every input dimension to zero mean and unit variance

    Targets are left untouched; the fitted statistics are stored so that
    other splits can be mapped with ``apply_normalization``.
    """
    if dataset.size < 2:
        raise ArgumentError("Normalization needs at least 2 examples")
    scaler = StandardScaler().fit(dataset.inputs)
    normalization = Normalization(mean=scaler.mean_.copy(), scale=scaler.scale_.copy())
    return replace(
        dataset, inputs=scaler.transform(dataset.inputs), normalization=normalization
    )


def apply_normalization(dataset: Dataset, normalization: Normalization) -> Dataset:
    return replace(
        dataset, inputs=normalization.apply(dataset.inputs), normalization=normalization
    )


def as_autoencoder(dataset: Dataset) -> Dataset:
    """Reconstruction dataset: targets are the inputs themselves, MSE objective"""
    return Dataset(
        inputs=dataset.inputs,
        targets=dataset.inputs.copy(),
        objective=ObjectiveKind.MSE,
        normalization=dataset.normalization,
    )
