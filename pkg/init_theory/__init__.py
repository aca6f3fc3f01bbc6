"""
Closed-form and Monte-Carlo theory of the ln z step and the optimal gain
"""

from .closed_form import (
    GainMethod,
    GainRecommendation,
    LnZStats,
    StatsSource,
    exact_ln_z_moments_linear,
    g_linear,
    g_relu,
    gain_from_mean,
    ln_z_mean_linear,
    ln_z_mean_relu,
    ln_z_stats,
    ln_z_var_linear,
    ln_z_var_relu,
    optimal_gain,
)
from .monte_carlo import (
    DEFAULT_G_GRID,
    EstimationError,
    estimate_ln_z_stats,
    estimate_optimal_g,
    ln_z_draws,
    mean_log_ratio,
    optimal_g_table,
    sample_ln_z,
    trial_log_ratio,
)

__all__ = [
    "GainMethod", "GainRecommendation", "LnZStats", "StatsSource",
    "exact_ln_z_moments_linear", "g_linear", "g_relu", "gain_from_mean",
    "ln_z_mean_linear", "ln_z_mean_relu", "ln_z_stats", "ln_z_var_linear",
    "ln_z_var_relu", "optimal_gain",
    "DEFAULT_G_GRID", "EstimationError", "estimate_ln_z_stats", "estimate_optimal_g",
    "ln_z_draws", "mean_log_ratio", "optimal_g_table", "sample_ln_z", "trial_log_ratio",
]
