"""
Chi-square and binomial draws

Chi-square variates with few degrees of freedom are formed literally as sums
of squared standard normals; above ``DIRECT_SUM_MAX_DOF`` the gamma-based
``Generator.chisquare`` is used. Both give the same distribution.
"""

import numpy as np

from .exceptions import ArgumentError
from .rng import Rng

DIRECT_SUM_MAX_DOF = 32


def sample_chi_square(dof: int, rng: Rng) -> float:
    """One draw from chi-square with ``dof`` degrees of freedom"""
    if dof < 1:
        raise ArgumentError(f"Degrees of freedom must be >= 1, got {dof}")
    if dof <= DIRECT_SUM_MAX_DOF:
        draws = rng.standard_normal(int(dof))
        return float(np.dot(draws, draws))
    return float(rng.chisquare(int(dof)))


def chi_square_draws(dof, size: int, rng: Rng) -> np.ndarray:
    """Vectorized chi-square draws; ``dof`` may be a scalar or an array of length ``size``"""
    dof_array = np.asarray(dof)
    if np.any(dof_array < 1):
        raise ArgumentError("Degrees of freedom must be >= 1")
    if dof_array.ndim == 0:
        return rng.chisquare(int(dof_array), size)
    if dof_array.shape != (size,):
        raise ArgumentError(f"dof array has shape {dof_array.shape}, expected ({size},)")
    return rng.chisquare(dof_array)


def sample_binomial(n: int, p: float, rng: Rng) -> int:
    """One draw in ``[0, n]`` from Binomial(n, p)"""
    if n < 1:
        raise ArgumentError(f"Binomial n must be >= 1, got {n}")
    if not 0.0 <= p <= 1.0:
        raise ArgumentError(f"Binomial p must lie in [0, 1], got {p}")
    return int(rng.binomial(int(n), float(p)))
