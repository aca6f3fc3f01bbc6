"""
Random walks of the log gradient-norm ratio across layers
"""

from .export import gain_curve_frame, trace_frame, write_trace_csv
from .moments import RunningMoments, merge_all
from .walks import (
    DEFAULT_SAMPLES,
    FinalLayerSummary,
    GainCurvePoint,
    VarianceFit,
    WalkConfig,
    WalkMode,
    WalkTrace,
    final_layer_summary,
    mean_log_ratio_vs_g,
    network_steps,
    simulate_walk,
    variance_fit,
    variance_slope,
)

__all__ = [
    "gain_curve_frame", "trace_frame", "write_trace_csv",
    "RunningMoments", "merge_all",
    "DEFAULT_SAMPLES", "FinalLayerSummary", "GainCurvePoint", "VarianceFit",
    "WalkConfig", "WalkMode", "WalkTrace", "final_layer_summary",
    "mean_log_ratio_vs_g", "network_steps", "simulate_walk", "variance_fit",
    "variance_slope",
]
