"""
Experiment configuration schema

Configurations are indented JSON documents validated by pydantic. A run's
``manifest.json`` embeds the resolved configuration under ``"config"`` and
is accepted by ``load_config`` as well, so any run can be repeated from its
manifest.
"""

import json
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from deep_net import Nonlinearity
from trainer import SizingFamily
from walk_sim import DEFAULT_SAMPLES, WalkMode

SCHEMA_VERSION = 1
ARTIFACT_VERSION = "1.0.0"

DEFAULT_LAMBDA_GRID = [1e-4, 1e-3, 1e-2, 1e-1]


class ExperimentKind(str, Enum):
    WALK = "walk"
    G_SWEEP = "g-sweep"
    DEPTH_SWEEP = "depth-sweep"
    TRAIN_ONCE = "train-once"
    GRADIENT_CHECK = "gradient-check"


class DatasetSource(str, Enum):
    AUTO = "auto"
    MNIST = "mnist"
    SYNTHETIC = "synthetic"


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class WalkSettings(_Section):
    n: int = Field(100, ge=1)
    d: int = Field(500, ge=1)
    # None: closed-form optimal gain for n (linear and relu)
    g: Optional[float] = Field(None, gt=0)
    nonlinearity: Nonlinearity = Nonlinearity.LINEAR
    samples: int = Field(DEFAULT_SAMPLES, ge=1)
    mode: WalkMode = WalkMode.ABSTRACT
    step_samples: int = Field(20000, ge=2)
    g_grid: List[float] = Field(default_factory=list)
    curve_samples: int = Field(200, ge=2)
    optimal_g_widths: List[int] = Field(default_factory=list)
    optimal_g_depth: int = Field(200, ge=1)
    optimal_g_trials: int = Field(200, ge=1)
    memory_budget_mb: Optional[float] = Field(None, gt=0)

    @model_validator(mode="after")
    def _tanh_needs_gain(self):
        if self.g is None and self.nonlinearity is Nonlinearity.TANH:
            raise ValueError("tanh walks need an explicit g")
        if self.mode is WalkMode.ABSTRACT and self.nonlinearity is Nonlinearity.TANH:
            raise ValueError("abstract walks support linear and relu only")
        return self


class NetworkSettings(_Section):
    nonlinearity: Nonlinearity = Nonlinearity.TANH
    depth: int = Field(16, ge=1)
    width: Optional[int] = Field(90, ge=1)
    parameter_budget: Optional[int] = Field(None, ge=1)
    family: SizingFamily = SizingFamily.CONSTANT
    g: Optional[float] = Field(1.2, gt=0)
    input_gain: Optional[float] = Field(None, gt=0)
    output_gain: Optional[float] = Field(None, gt=0)

    @model_validator(mode="after")
    def _width_source(self):
        if self.width is None and self.parameter_budget is None:
            raise ValueError("give either width or parameter_budget")
        if self.g is None and self.nonlinearity is Nonlinearity.TANH:
            raise ValueError("tanh networks need an explicit g")
        return self


class TrainingSettings(_Section):
    epochs: int = Field(100, ge=0)
    minibatch: int = Field(100, ge=1)
    epoch_decay: float = Field(0.995, gt=0, le=1)
    clip_threshold: Optional[float] = Field(100.0, gt=0)
    lambda_in: float = Field(1e-2, gt=0)
    lambda_out: float = Field(1e-2, gt=0)
    d_max: Optional[int] = Field(None, ge=1)
    bias_rate_multiplier: float = Field(1.0, ge=0)
    probe_size: int = Field(100, ge=1)
    error_threshold: float = Field(0.05, ge=0, le=1)


class SweepSettings(_Section):
    g_values: List[float] = Field(default_factory=lambda: [1.0, 1.1, 1.2, 1.3, 1.4, 1.5])
    depths: List[int] = Field(default_factory=lambda: [4, 16])
    lambda_in_grid: List[float] = Field(default_factory=lambda: list(DEFAULT_LAMBDA_GRID))
    lambda_out_grid: List[float] = Field(default_factory=lambda: list(DEFAULT_LAMBDA_GRID))

    @field_validator("g_values", "lambda_in_grid", "lambda_out_grid")
    @classmethod
    def _positive(cls, values: List[float]) -> List[float]:
        if not values or any(v <= 0 for v in values):
            raise ValueError("grids must be non-empty and positive")
        return values

    @field_validator("depths")
    @classmethod
    def _depths(cls, values: List[int]) -> List[int]:
        if not values or any(v < 1 for v in values):
            raise ValueError("depths must be non-empty and >= 1")
        return values


class DataSettings(_Section):
    source: DatasetSource = DatasetSource.AUTO
    mnist_dir: Optional[str] = None
    limit: int = Field(1000, ge=2)
    dims: int = Field(784, ge=1)
    classes: int = Field(10, ge=2)
    separation: float = Field(3.0, ge=0)
    autoencoder: bool = False


class GradientCheckSettings(_Section):
    widths: List[int] = Field(default_factory=lambda: [5, 4, 3])
    seeds: int = Field(20, ge=1)
    examples: int = Field(3, ge=1)
    g: float = Field(1.1, gt=0)
    tolerance: float = Field(1e-6, gt=0)
    nonlinearities: List[Nonlinearity] = Field(default_factory=lambda: list(Nonlinearity))


class ExperimentConfig(_Section):
    schema_version: int = SCHEMA_VERSION
    kind: ExperimentKind = ExperimentKind.WALK
    seed: int = Field(0, ge=0)
    output_dir: Optional[str] = None
    workers: Optional[int] = None
    walk: WalkSettings = Field(default_factory=WalkSettings)
    network: NetworkSettings = Field(default_factory=NetworkSettings)
    training: TrainingSettings = Field(default_factory=TrainingSettings)
    sweep: SweepSettings = Field(default_factory=SweepSettings)
    data: DataSettings = Field(default_factory=DataSettings)
    gradient_check: GradientCheckSettings = Field(default_factory=GradientCheckSettings)

    @field_validator("schema_version")
    @classmethod
    def _known_schema(cls, value: int) -> int:
        if value != SCHEMA_VERSION:
            raise ValueError(f"unsupported schema_version {value}, expected {SCHEMA_VERSION}")
        return value


def default_config(kind: Union[ExperimentKind, str] = ExperimentKind.WALK) -> ExperimentConfig:
    return ExperimentConfig(kind=ExperimentKind(kind))


def config_from_document(document: Dict[str, Any]) -> ExperimentConfig:
    """Accept a bare configuration or a run manifest"""
    if "config" in document and "artifact_version" in document:
        document = document["config"]
    return ExperimentConfig.model_validate(document)


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    return config_from_document(json.loads(Path(path).read_text(encoding="utf-8")))


def save_config(config: ExperimentConfig, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.write_text(config.model_dump_json(indent=2) + "\n", encoding="utf-8")
    return path
