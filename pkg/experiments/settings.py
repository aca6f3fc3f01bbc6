"""
Runtime settings read from the environment (and an optional .env file)
"""

import os
from pathlib import Path
from typing import Mapping, Optional, Union

from dotenv import load_dotenv
from pydantic import BaseModel, Field, field_validator

ENV_VARIABLES = {
    "log_level": "RWI_LOG_LEVEL",
    "json_logs": "RWI_LOG_JSON",
    "workers": "RWI_WORKERS",
    "output_dir": "RWI_OUTPUT_DIR",
    "mnist_dir": "RWI_MNIST_DIR",
    "trace_budget_mb": "RWI_TRACE_BUDGET_MB",
}


class RuntimeSettings(BaseModel):
    """Machine-specific knobs that never change results"""

    log_level: str = "INFO"
    json_logs: bool = False
    workers: int = 1
    output_dir: Path = Path("results")
    mnist_dir: Optional[Path] = None
    trace_budget_mb: float = Field(256.0, gt=0)

    @field_validator("workers")
    @classmethod
    def _workers_nonzero(cls, value: int) -> int:
        # joblib convention: -1 means every core
        if value == 0 or value < -1:
            raise ValueError("workers must be a positive count or -1")
        return value

    @property
    def trace_budget_bytes(self) -> int:
        return int(self.trace_budget_mb * 1024 * 1024)


def get_settings(
    env_file: Union[str, Path, None] = None, environ: Optional[Mapping[str, str]] = None
) -> RuntimeSettings:
    """Resolve settings from ``environ`` (default ``os.environ`` after loading .env)"""
    if environ is None:
        load_dotenv(env_file, override=False)
        environ = os.environ
    values = {
        field: environ[variable]
        for field, variable in ENV_VARIABLES.items()
        if environ.get(variable) not in (None, "")
    }
    return RuntimeSettings(**values)
