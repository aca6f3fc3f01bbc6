"""
Dataset ingestion, normalization and synthetic generators
"""

from .dataset import (
    Dataset,
    Normalization,
    apply_normalization,
    as_autoencoder,
    normalize,
    one_hot,
)
from .idx import IdxParseError, encode_idx, load_idx_file, parse_idx
from .mnist import MNIST_CLASSES, load_mnist, mnist_available
from .synthetic import synthetic_classification, synthetic_regression

__all__ = [
    "Dataset", "Normalization", "apply_normalization", "as_autoencoder", "normalize", "one_hot",
    "IdxParseError", "encode_idx", "load_idx_file", "parse_idx",
    "MNIST_CLASSES", "load_mnist", "mnist_available",
    "synthetic_classification", "synthetic_regression",
]
