"""
Experiment configuration, runtime settings and runners
"""

from .cells import (
    CellResult,
    CellSpec,
    CellStatus,
    ExperimentIOError,
    cell_seed,
    make_cells,
    run_cells,
    write_json_atomic,
)
from .config import (
    ARTIFACT_VERSION,
    SCHEMA_VERSION,
    DatasetSource,
    DataSettings,
    ExperimentConfig,
    ExperimentKind,
    GradientCheckSettings,
    NetworkSettings,
    SweepSettings,
    TrainingSettings,
    WalkSettings,
    config_from_document,
    default_config,
    load_config,
    save_config,
)
from .log_setup import configure_logging
from .runner import (
    MANIFEST_NAME,
    RunOutcome,
    SweepResult,
    build_dataset,
    run_depth_sweep,
    run_experiment,
    run_g_sweep,
    run_gradient_check,
    run_train_once,
    run_walk_experiment,
)
from .settings import RuntimeSettings, get_settings

__version__ = ARTIFACT_VERSION

__all__ = [
    "CellResult", "CellSpec", "CellStatus", "ExperimentIOError", "cell_seed", "make_cells",
    "run_cells", "write_json_atomic",
    "ARTIFACT_VERSION", "SCHEMA_VERSION", "DatasetSource", "DataSettings", "ExperimentConfig",
    "ExperimentKind", "GradientCheckSettings", "NetworkSettings", "SweepSettings",
    "TrainingSettings", "WalkSettings", "config_from_document", "default_config",
    "load_config", "save_config",
    "configure_logging",
    "MANIFEST_NAME", "RunOutcome", "SweepResult", "build_dataset", "run_depth_sweep",
    "run_experiment", "run_g_sweep", "run_gradient_check", "run_train_once",
    "run_walk_experiment",
    "RuntimeSettings", "get_settings",
]
