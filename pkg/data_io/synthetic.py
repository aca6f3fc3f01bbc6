"""
Synthetic datasets for desk-scale experiments
"""

import numpy as np
from sklearn.datasets import make_blobs, make_regression

from deep_net import ObjectiveKind
from numeric_core import ArgumentError, Rng

from .dataset import Dataset, one_hot

DEFAULT_SEPARATION = 3.0
_SKLEARN_SEED_MODULUS = 2 ** 32


def synthetic_classification(
    n_examples: int,
    dims: int,
    classes: int,
    seed: int,
    separation: float = DEFAULT_SEPARATION,
) -> Dataset:
    """Balanced Gaussian clusters with unit spread

    Class centers are drawn as ``separation`` times a standard normal vector,
    so separation 0 puts every class on top of the others.
    """
    if classes < 2:
        raise ArgumentError(f"Need at least 2 classes, got {classes}")
    if n_examples < classes or dims < 1:
        raise ArgumentError("Need n_examples >= classes and dims >= 1")
    if separation < 0:
        raise ArgumentError(f"Separation must be >= 0, got {separation}")
    rng = Rng(seed)
    centers = separation * rng.split("centers").standard_normal((classes, dims))
    base, extra = divmod(n_examples, classes)
    counts = [base + (1 if c < extra else 0) for c in range(classes)]
    inputs, labels = make_blobs(
        n_samples=counts,
        n_features=dims,
        centers=centers,
        cluster_std=1.0,
        shuffle=True,
        random_state=rng.derive_seed("blobs") % _SKLEARN_SEED_MODULUS,
    )
    return Dataset(
        inputs=inputs,
        targets=one_hot(labels, classes),
        objective=ObjectiveKind.CROSS_ENTROPY,
        labels=labels.astype(np.int64),
    )


def synthetic_regression(
    n_examples: int, input_dim: int, output_dim: int, seed: int, noise: float = 0.0
) -> Dataset:
    """Linear targets y = X·W (noise-free by default), rescaled to unit spread"""
    if n_examples < 1 or input_dim < 1 or output_dim < 1:
        raise ArgumentError("Sizes must be >= 1")
    inputs, targets = make_regression(
        n_samples=n_examples,
        n_features=input_dim,
        n_targets=output_dim,
        noise=noise,
        bias=0.0,
        random_state=Rng(seed).derive_seed("regression") % _SKLEARN_SEED_MODULUS,
    )
    targets = np.reshape(targets, (n_examples, output_dim))
    spread = np.std(targets)
    if spread > 0:
        targets = targets / spread
    return Dataset(inputs=inputs, targets=targets, objective=ObjectiveKind.MSE)
