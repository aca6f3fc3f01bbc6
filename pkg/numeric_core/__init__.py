"""
Numeric core: seeded random streams, immutable matrices, samplers and
result tables
"""

from .exceptions import ArgumentError
from .matrix import Matrix, gaussian_matrix, matvec, matvec_transposed
from .rng import Rng, as_rng
from .sampling import (
    DIRECT_SUM_MAX_DOF,
    chi_square_draws,
    sample_binomial,
    sample_chi_square,
)
from .tables import FLOAT_FORMAT, UNDEFINED, write_csv

__all__ = [
    "ArgumentError",
    "Matrix", "gaussian_matrix", "matvec", "matvec_transposed",
    "Rng", "as_rng",
    "DIRECT_SUM_MAX_DOF", "chi_square_draws", "sample_binomial", "sample_chi_square",
    "FLOAT_FORMAT", "UNDEFINED", "write_csv",
]
