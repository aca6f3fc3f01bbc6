"""
Immutable dense matrices and the products the toolkit needs
"""

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .exceptions import ArgumentError
from .rng import Rng


@dataclass(frozen=True)
class Matrix:
    """Row-major float64 matrix with finite entries; read-only once built"""

    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64, copy=True)
        if values.ndim != 2:
            raise ArgumentError(f"Matrix needs 2 dimensions, got shape {values.shape}")
        if values.shape[0] < 1 or values.shape[1] < 1:
            raise ArgumentError(f"Matrix dimensions must be >= 1, got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ArgumentError("Matrix entries must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def cols(self) -> int:
        return self.values.shape[1]

    @property
    def shape(self):
        return self.values.shape

    @property
    def entries(self) -> np.ndarray:
        """Flat row-major view of the entries"""
        return self.values.reshape(-1)

    def transpose(self) -> "Matrix":
        return Matrix(self.values.T)

    @classmethod
    def identity(cls, n: int) -> "Matrix":
        return cls(np.eye(n))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "Matrix":
        return cls(np.zeros((rows, cols)))

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[float]]) -> "Matrix":
        return cls(np.asarray(rows, dtype=np.float64))

    def __eq__(self, other):
        if not isinstance(other, Matrix):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self.values, other.values))

    def __hash__(self):
        return hash((self.shape, self.values.tobytes()))


def gaussian_matrix(rows: int, cols: int, variance: float, rng: Rng) -> Matrix:
    """Matrix of i.i.d. zero-mean Gaussian entries with the given variance"""
    if rows < 1 or cols < 1:
        raise ArgumentError(f"Invalid matrix dimensions {rows}x{cols}")
    if not variance > 0:
        raise ArgumentError(f"Variance must be positive, got {variance}")
    return Matrix(rng.normal((rows, cols), std=float(np.sqrt(variance))))


def _as_vector(v, expected: int) -> np.ndarray:
    vector = np.asarray(v, dtype=np.float64)
    if vector.ndim != 1:
        raise ArgumentError(f"Expected a vector, got shape {vector.shape}")
    if vector.shape[0] != expected:
        raise ArgumentError(
            f"Dimension mismatch: vector has length {vector.shape[0]}, expected {expected}"
        )
    return vector


def matvec(m: Matrix, v) -> np.ndarray:
    """Standard product ``m @ v``"""
    return m.values @ _as_vector(v, m.cols)


def matvec_transposed(m: Matrix, v) -> np.ndarray:
    """Product ``mᵀ @ v`` without materializing the transpose"""
    return m.values.T @ _as_vector(v, m.rows)
