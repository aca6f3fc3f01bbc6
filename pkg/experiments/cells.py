"""
Sweep cells: independent units of work with their own seed and result file
"""

import json
import os
from dataclasses import asdict, dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Union

import structlog
from joblib import Parallel, delayed

from init_theory import EstimationError
from numeric_core import ArgumentError, Rng
from trainer import TrainingDivergedError

logger = structlog.get_logger(__name__)

# failures that mark one cell as failed without stopping the sweep
CELL_FAILURES = (TrainingDivergedError, ArgumentError, EstimationError, FloatingPointError)


class ExperimentIOError(OSError):
    """File-system failure with the offending path"""

    def __init__(self, path: Union[str, Path], cause: BaseException):
        super().__init__(f"{path}: {cause}")
        self.path = Path(path)
        self.cause = cause


class CellStatus(str, Enum):
    OK = "ok"
    FAILED = "failed"


@dataclass(frozen=True)
class CellSpec:
    index: int
    params: Dict[str, Any]
    seed: int

    @property
    def label(self) -> str:
        return "|".join(f"{key}={self.params[key]!r}" for key in sorted(self.params))


@dataclass(frozen=True)
class CellResult:
    spec: CellSpec
    status: CellStatus
    metrics: Dict[str, Any] = field(default_factory=dict)
    reason: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.status is CellStatus.OK

    def to_dict(self) -> Dict[str, Any]:
        payload = asdict(self)
        payload["status"] = self.status.value
        return payload


def cell_seed(root_seed: int, params: Dict[str, Any]) -> int:
    """Seed owned by a cell; depends on its parameters, not its position in a grid"""
    label = "|".join(f"{key}={params[key]!r}" for key in sorted(params))
    return Rng(root_seed).derive_seed(label)


def make_cells(root_seed: int, grid: Sequence[Dict[str, Any]]) -> List[CellSpec]:
    return [
        CellSpec(index=i, params=dict(params), seed=cell_seed(root_seed, params))
        for i, params in enumerate(grid)
    ]


def write_json_atomic(path: Union[str, Path], payload: Dict[str, Any]) -> Path:
    path = Path(path)
    temporary = path.with_name(path.name + ".tmp")
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        temporary.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        os.replace(temporary, path)
    except OSError as exc:
        raise ExperimentIOError(path, exc) from exc
    return path


def execute_cell(
    work: Callable[[CellSpec, Path], Dict[str, Any]], spec: CellSpec, cell_dir: Path
) -> CellResult:
    try:
        result = CellResult(spec=spec, status=CellStatus.OK, metrics=work(spec, cell_dir))
    except CELL_FAILURES as exc:
        logger.warning("cell_failed", index=spec.index, params=spec.params, reason=str(exc))
        result = CellResult(
            spec=spec, status=CellStatus.FAILED, reason=f"{type(exc).__name__}: {exc}"
        )
    write_json_atomic(cell_dir / f"cell_{spec.index:04d}.json", result.to_dict())
    return result


def run_cells(
    work: Callable[[CellSpec, Path], Dict[str, Any]],
    specs: Sequence[CellSpec],
    cell_dir: Path,
    workers: int = 1,
) -> List[CellResult]:
    """Run every cell, in parallel up to ``workers``; results keep grid order"""
    results = Parallel(n_jobs=workers)(
        delayed(execute_cell)(work, spec, cell_dir) for spec in specs
    )
    failed = sum(1 for r in results if not r.ok)
    logger.info("cells_finished", cells=len(results), failed=failed)
    return list(results)
