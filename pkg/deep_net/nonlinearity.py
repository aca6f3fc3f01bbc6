"""
Element-wise nonlinearities normalized so that f'(0) = 1
"""

from enum import Enum

import numpy as np


class Nonlinearity(str, Enum):
    """Hidden-layer activation f together with its derivative f'"""

    LINEAR = "linear"
    RELU = "relu"
    TANH = "tanh"

    def activate(self, a: np.ndarray) -> np.ndarray:
        if self is Nonlinearity.LINEAR:
            return np.array(a, dtype=np.float64, copy=True)
        if self is Nonlinearity.RELU:
            return np.maximum(a, 0.0)
        return np.tanh(a)

    def derivative(self, a: np.ndarray) -> np.ndarray:
        # relu'(0) is taken as 0
        if self is Nonlinearity.LINEAR:
            return np.ones_like(a, dtype=np.float64)
        if self is Nonlinearity.RELU:
            return (np.asarray(a) > 0.0).astype(np.float64)
        t = np.tanh(a)
        return 1.0 - t * t


class OutputActivation(str, Enum):
    """Activation of the final layer; softmax only pairs with cross-entropy"""

    LINEAR = "linear"
    RELU = "relu"
    TANH = "tanh"
    SOFTMAX = "softmax"

    @classmethod
    def from_nonlinearity(cls, nonlinearity: Nonlinearity) -> "OutputActivation":
        return cls(nonlinearity.value)

    @property
    def elementwise(self) -> Nonlinearity:
        return Nonlinearity(self.value)

    def activate(self, a: np.ndarray) -> np.ndarray:
        if self is OutputActivation.SOFTMAX:
            return softmax(a)
        return self.elementwise.activate(a)


def softmax(a: np.ndarray) -> np.ndarray:
    """Row-wise softmax, shifted by the row maximum"""
    shifted = a - np.max(a, axis=-1, keepdims=True)
    exp = np.exp(shifted)
    return exp / np.sum(exp, axis=-1, keepdims=True)
