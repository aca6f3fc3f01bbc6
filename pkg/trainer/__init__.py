"""
SGD training harness: learning-rate schedules, parameter-budget sizing and
the training loop
"""

from .schedule import LrSchedule, build_schedule
from .sgd import (
    EpochRecord,
    ParameterGradients,
    TrainConfig,
    TrainingDivergedError,
    TrainingResult,
    clip_gradient,
    evaluate,
    export_history_csv,
    gradient_ratio,
    history_frame,
    sgd_step,
    train,
)
from .sizing import (
    CODE_LAYER_WIDTH,
    SizingFamily,
    SizingPlan,
    autoencoder_widths,
    constant_widths,
    count_parameters,
    size_layers,
)

__all__ = [
    "LrSchedule", "build_schedule",
    "EpochRecord", "ParameterGradients", "TrainConfig", "TrainingDivergedError",
    "TrainingResult", "clip_gradient", "evaluate", "export_history_csv",
    "gradient_ratio", "history_frame", "sgd_step", "train",
    "CODE_LAYER_WIDTH", "SizingFamily", "SizingPlan", "autoencoder_widths",
    "constant_widths", "count_parameters", "size_layers",
]
