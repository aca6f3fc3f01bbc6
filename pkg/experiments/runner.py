"""
Experiment runners behind the command-line verbs

Every run writes its CSV results plus ``manifest.json`` into one output
directory. Sweeps are decomposed into cells (see ``cells``) that are trained
independently and summarized afterwards; a failed cell is recorded with its
reason and never stops the sweep.
"""

import math
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
import structlog

from data_io import (
    Dataset,
    as_autoencoder,
    load_mnist,
    mnist_available,
    normalize,
    one_hot,
    synthetic_classification,
)
from deep_net import (
    Nonlinearity,
    ObjectiveKind,
    OutputActivation,
    gradient_check,
    init_network,
)
from init_theory import (
    estimate_ln_z_stats,
    exact_ln_z_moments_linear,
    ln_z_stats,
    optimal_g_table,
    optimal_gain,
)
from numeric_core import ArgumentError, Rng, write_csv
from trainer import (
    SizingFamily,
    TrainConfig,
    build_schedule,
    constant_widths,
    export_history_csv,
    size_layers,
    train,
)
from walk_sim import (
    WalkConfig,
    final_layer_summary,
    gain_curve_frame,
    mean_log_ratio_vs_g,
    simulate_walk,
    trace_frame,
    variance_fit,
)

from .cells import CellResult, CellSpec, ExperimentIOError, make_cells, run_cells, write_json_atomic
from .config import (
    ARTIFACT_VERSION,
    SCHEMA_VERSION,
    DatasetSource,
    ExperimentConfig,
    ExperimentKind,
    NetworkSettings,
)
from .settings import RuntimeSettings

logger = structlog.get_logger(__name__)

MANIFEST_NAME = "manifest.json"
CELL_DIR = "cells"
METRIC_COLUMNS = (
    "width",
    "parameter_count",
    "min_training_error",
    "min_training_errors",
    "final_objective",
    "epochs_to_threshold",
    "initial_grad_ratio",
)


@dataclass(frozen=True)
class RunOutcome:
    kind: ExperimentKind
    output_dir: Path
    files: Tuple[str, ...]
    failed_cells: int = 0

    @property
    def ok(self) -> bool:
        return self.failed_cells == 0


@dataclass
class SweepResult:
    """Grid axes and one result per cell, failed cells included"""

    axes: Dict[str, List[Any]]
    cells: List[CellResult] = field(default_factory=list)

    @property
    def failed(self) -> List[CellResult]:
        return [cell for cell in self.cells if not cell.ok]

    def frame(self) -> pd.DataFrame:
        rows = []
        for cell in self.cells:
            row = {"cell": cell.spec.index, "seed": cell.spec.seed}
            row.update(cell.spec.params)
            row["status"] = cell.status.value
            row["reason"] = cell.reason or ""
            row.update({column: cell.metrics.get(column) for column in METRIC_COLUMNS})
            rows.append(row)
        return pd.DataFrame(rows)


def _write(frame: pd.DataFrame, path: Path) -> str:
    try:
        write_csv(frame, path)
    except OSError as exc:
        raise ExperimentIOError(path, exc) from exc
    return path.name


def _nan_to_none(value: Optional[float]) -> Optional[float]:
    if value is None or (isinstance(value, float) and not math.isfinite(value)):
        return None
    return float(value)


# datasets and networks


def resolve_data_source(config: ExperimentConfig, settings: RuntimeSettings) -> ExperimentConfig:
    """Pin ``auto`` to the source actually used so the manifest replays exactly"""
    data = config.data
    directory = data.mnist_dir or (str(settings.mnist_dir) if settings.mnist_dir else None)
    source = data.source
    if source is DatasetSource.AUTO:
        source = DatasetSource.MNIST if mnist_available(directory) else DatasetSource.SYNTHETIC
        if source is DatasetSource.SYNTHETIC:
            logger.warning("mnist_unavailable_using_synthetic", mnist_dir=directory)
    update = {"source": source}
    if source is DatasetSource.MNIST:
        update["mnist_dir"] = directory
    return config.model_copy(update={"data": data.model_copy(update=update)})


def build_dataset(config: ExperimentConfig) -> Dataset:
    data = config.data
    if data.source is DatasetSource.MNIST:
        if not data.mnist_dir:
            raise ArgumentError("MNIST requested but no directory configured")
        dataset = load_mnist(data.mnist_dir, "train", data.limit)
    elif data.source is DatasetSource.SYNTHETIC:
        dataset = synthetic_classification(
            data.limit,
            data.dims,
            data.classes,
            seed=Rng(config.seed).derive_seed("data"),
            separation=data.separation,
        )
    else:
        raise ArgumentError("Resolve the data source before building the dataset")
    dataset = normalize(dataset)
    return as_autoencoder(dataset) if data.autoencoder else dataset


def network_layout(
    net: NetworkSettings, depth: int, input_dim: int, output_dim: int
) -> Tuple[List[int], Tuple[int, ...]]:
    """Layer widths and the hidden layers that stay linear"""
    if net.parameter_budget is not None:
        plan = size_layers(net.parameter_budget, depth, input_dim, output_dim, net.family)
        return list(plan.widths), plan.linear_layers
    if net.family is SizingFamily.AUTOENCODER:
        raise ArgumentError("Autoencoder widths come from a parameter budget")
    return constant_widths(net.width, depth, input_dim, output_dim), ()


def default_gain(net: NetworkSettings, widths: Sequence[int]) -> float:
    if net.g is not None:
        return net.g
    return optimal_gain(net.nonlinearity, widths[1] if len(widths) > 2 else widths[0]).g


class TrainingCell:
    """Trains one (g, depth, λ_in, λ_out) cell; picklable for worker processes"""

    def __init__(self, config: ExperimentConfig, dataset: Dataset, d_max: int):
        self.config = config
        self.dataset = dataset
        self.d_max = d_max

    def __call__(self, spec: CellSpec, cell_dir: Path) -> Dict[str, Any]:
        net, training, dataset = self.config.network, self.config.training, self.dataset
        depth = int(spec.params["depth"])
        widths, linear_layers = network_layout(net, depth, dataset.input_dim, dataset.output_dim)
        output = OutputActivation.SOFTMAX if dataset.is_classification else OutputActivation.LINEAR
        rng = Rng(spec.seed)
        params = init_network(
            widths,
            spec.params["g"],
            net.nonlinearity,
            output,
            seed=rng.split("init"),
            input_gain=net.input_gain,
            output_gain=net.output_gain,
            linear_layers=linear_layers,
        )
        schedule = build_schedule(
            depth, self.d_max, spec.params["lambda_in"], spec.params["lambda_out"]
        )
        cfg = TrainConfig(
            epochs=training.epochs,
            minibatch=training.minibatch,
            epoch_decay=training.epoch_decay,
            clip_threshold=training.clip_threshold,
            objective=dataset.objective,
            seed=rng.derive_seed("train"),
            bias_rate_multiplier=training.bias_rate_multiplier,
            probe_size=training.probe_size,
        )
        result = train(params, dataset, schedule, cfg)
        cell_dir.mkdir(parents=True, exist_ok=True)
        export_history_csv(result, cell_dir / f"history_{spec.index:04d}.csv")
        return {
            "width": widths[1] if depth > 1 else widths[-1],
            "parameter_count": params.parameter_count,
            "min_training_error": _nan_to_none(result.min_error_rate),
            "min_training_errors": result.min_training_errors,
            "final_objective": _nan_to_none(result.final_objective),
            "epochs_to_threshold": result.epochs_to_error_rate(training.error_threshold),
            "initial_grad_ratio": _nan_to_none(result.initial_gradient_ratio),
        }


def _run_training_grid(
    config: ExperimentConfig,
    dataset: Dataset,
    grid: List[Dict[str, Any]],
    d_max: int,
    output_dir: Path,
    workers: int,
) -> SweepResult:
    specs = make_cells(config.seed, grid)
    cells = run_cells(TrainingCell(config, dataset, d_max), specs, output_dir / CELL_DIR, workers)
    axes: Dict[str, List[Any]] = {}
    for params in grid:
        for key, value in params.items():
            if value not in axes.setdefault(key, []):
                axes[key].append(value)
    return SweepResult(axes=axes, cells=cells)


def _score_column(frame: pd.DataFrame) -> str:
    """Training error for classification, final objective for reconstruction"""
    if frame["min_training_error"].notna().any():
        return "min_training_error"
    return "final_objective"


# runners


def run_train_once(config: ExperimentConfig, output_dir: Path, workers: int = 1) -> Tuple[List[str], int]:
    net, training = config.network, config.training
    dataset = build_dataset(config)
    widths, _ = network_layout(net, net.depth, dataset.input_dim, dataset.output_dim)
    grid = [
        {
            "g": float(default_gain(net, widths)),
            "depth": net.depth,
            "lambda_in": training.lambda_in,
            "lambda_out": training.lambda_out,
        }
    ]
    sweep = _run_training_grid(config, dataset, grid, training.d_max or net.depth, output_dir, workers)
    files = [_write(sweep.frame(), output_dir / "train_once.csv")]
    return files, len(sweep.failed)


def run_g_sweep(config: ExperimentConfig, output_dir: Path, workers: int = 1) -> Tuple[List[str], int]:
    """Per-(g, depth) minimum over the λ grid"""
    sweep_settings, training = config.sweep, config.training
    grid = [
        {"g": float(g), "depth": int(d), "lambda_in": float(li), "lambda_out": float(lo)}
        for g, d, li, lo in product(
            sweep_settings.g_values,
            sweep_settings.depths,
            sweep_settings.lambda_in_grid,
            sweep_settings.lambda_out_grid,
        )
    ]
    d_max = training.d_max or max(sweep_settings.depths)
    sweep = _run_training_grid(config, build_dataset(config), grid, d_max, output_dir, workers)
    frame = sweep.frame()
    score = _score_column(frame)
    ok = frame[frame["status"] == "ok"]

    rows = []
    for g, depth in product(sweep_settings.g_values, sweep_settings.depths):
        total = int(((frame["g"] == g) & (frame["depth"] == depth)).sum())
        scored = ok[(ok["g"] == g) & (ok["depth"] == depth)].dropna(subset=[score])
        row = {"g": g, "depth": depth, "cells": total, "failed": total - len(scored)}
        if len(scored):
            best = scored.loc[scored[score].idxmin()]
            row.update(
                {
                    f"best_{score}": best[score],
                    "lambda_in": best["lambda_in"],
                    "lambda_out": best["lambda_out"],
                }
            )
        else:
            row.update({f"best_{score}": np.nan, "lambda_in": np.nan, "lambda_out": np.nan})
        rows.append(row)

    files = [
        _write(frame, output_dir / "cells.csv"),
        _write(pd.DataFrame(rows), output_dir / "g_sweep.csv"),
    ]
    return files, len(sweep.failed)


def run_depth_sweep(config: ExperimentConfig, output_dir: Path, workers: int = 1) -> Tuple[List[str], int]:
    """Per-depth best over the λ grid, with the score averaged over the g list"""
    sweep_settings, training = config.sweep, config.training
    grid = [
        {"depth": int(d), "g": float(g), "lambda_in": float(li), "lambda_out": float(lo)}
        for d, g, li, lo in product(
            sweep_settings.depths,
            sweep_settings.g_values,
            sweep_settings.lambda_in_grid,
            sweep_settings.lambda_out_grid,
        )
    ]
    d_max = training.d_max or max(sweep_settings.depths)
    sweep = _run_training_grid(config, build_dataset(config), grid, d_max, output_dir, workers)
    frame = sweep.frame()
    score = _score_column(frame)
    ok = frame[frame["status"] == "ok"]
    column = f"mean_{score}"

    table = []
    for depth, lambda_in, lambda_out in product(
        sweep_settings.depths, sweep_settings.lambda_in_grid, sweep_settings.lambda_out_grid
    ):
        def select(rows: pd.DataFrame) -> pd.Series:
            return (
                (rows["depth"] == depth)
                & (rows["lambda_in"] == lambda_in)
                & (rows["lambda_out"] == lambda_out)
            )

        total = int(select(frame).sum())
        scores = ok[select(ok)][score].dropna()
        table.append(
            {
                "depth": depth,
                "lambda_in": lambda_in,
                "lambda_out": lambda_out,
                column: float(scores.mean()) if len(scores) else np.nan,
                "cells": total,
                "failed": total - len(scores),
            }
        )
    table_frame = pd.DataFrame(table)

    best_rows = []
    for depth in sweep_settings.depths:
        rows = table_frame[table_frame["depth"] == depth].dropna(subset=[column])
        if len(rows):
            best = rows.loc[rows[column].idxmin()]
            best_rows.append(
                {
                    "depth": depth,
                    f"best_{score}": best[column],
                    "lambda_in": best["lambda_in"],
                    "lambda_out": best["lambda_out"],
                }
            )
        else:
            best_rows.append(
                {"depth": depth, f"best_{score}": np.nan, "lambda_in": np.nan, "lambda_out": np.nan}
            )

    files = [
        _write(frame, output_dir / "cells.csv"),
        _write(table_frame, output_dir / "depth_lambda.csv"),
        _write(pd.DataFrame(best_rows), output_dir / "depth_sweep.csv"),
    ]
    return files, len(sweep.failed)


def run_walk_experiment(config: ExperimentConfig, output_dir: Path, workers: int = 1) -> Tuple[List[str], int]:
    """Trace CSV plus a summary with measured and closed-form values side by side"""
    walk = config.walk
    nonlinearity = walk.nonlinearity
    g = walk.g if walk.g is not None else optimal_gain(nonlinearity, walk.n).g
    walk_kwargs = (
        {"memory_budget_bytes": int(walk.memory_budget_mb * 1024 * 1024)}
        if walk.memory_budget_mb is not None
        else {}
    )
    trace = simulate_walk(
        WalkConfig(
            n=walk.n,
            d=walk.d,
            g=g,
            nonlinearity=nonlinearity,
            samples=walk.samples,
            seed=config.seed,
            mode=walk.mode,
            workers=workers,
            **walk_kwargs,
        )
    )
    files = [_write(trace_frame(trace), output_dir / "trace.csv")]

    final = final_layer_summary(trace)
    step_rng = Rng(config.seed).split("step-statistics")
    step = estimate_ln_z_stats(nonlinearity, walk.n, walk.step_samples, step_rng, g)
    closed = ln_z_stats(nonlinearity, walk.n) if nonlinearity is not Nonlinearity.TANH else None
    exact = exact_ln_z_moments_linear(walk.n) if nonlinearity is Nonlinearity.LINEAR else None
    log_gain = walk.d * math.log(g * g)
    if trace.samples >= 2 and trace.depth >= 2:
        fit = variance_fit(trace)
        slope, intercept, r_squared = fit.slope, fit.intercept, fit.r_squared
    else:
        slope = intercept = r_squared = float("nan")

    summary = {
        "n": walk.n,
        "d": walk.d,
        "g": g,
        "nonlinearity": nonlinearity.value,
        "mode": walk.mode.value,
        "samples": trace.samples,
        "discarded": trace.discarded,
        "final_mean_lnZ": final.mean,
        "final_std_error": final.standard_error,
        "final_var_lnZ": final.variance,
        "final_mean_over_se": final.mean / final.standard_error
        if final.standard_error and math.isfinite(final.standard_error)
        else float("nan"),
        "predicted_final_mean": log_gain + walk.d * closed.mean if closed else float("nan"),
        "predicted_final_mean_exact": log_gain + walk.d * exact.mean if exact else float("nan"),
        "variance_slope": slope,
        "variance_intercept": intercept,
        "variance_r2": r_squared,
        "predicted_slope_closed_form": closed.variance if closed else float("nan"),
        "predicted_slope_exact": exact.variance if exact else float("nan"),
        "measured_step_mean": step.mean,
        "measured_step_variance": step.variance,
    }
    files.append(_write(pd.DataFrame([summary]), output_dir / "summary.csv"))

    if walk.g_grid:
        points = mean_log_ratio_vs_g(
            walk.n,
            walk.d,
            walk.g_grid,
            nonlinearity,
            walk.curve_samples,
            Rng(config.seed).derive_seed("gain-curve"),
            workers,
        )
        files.append(_write(gain_curve_frame(points), output_dir / "gain_curve.csv"))

    if walk.optimal_g_widths:
        recommendations = optimal_g_table(
            nonlinearity,
            walk.optimal_g_widths,
            walk.optimal_g_depth,
            walk.optimal_g_trials,
            Rng(config.seed).split("optimal-g"),
            workers,
        )
        rows = [
            {
                "n": rec.n,
                "nonlinearity": rec.nonlinearity.value,
                "g_empirical": rec.g,
                "g_closed_form": optimal_gain(nonlinearity, rec.n).g
                if nonlinearity is not Nonlinearity.TANH
                else float("nan"),
                "bracketed": rec.bracketed,
                "evaluations": rec.evaluations,
                "discarded_trials": rec.discarded_trials,
            }
            for rec in recommendations
        ]
        files.append(_write(pd.DataFrame(rows), output_dir / "optimal_g.csv"))
    return files, 0


def run_gradient_check(config: ExperimentConfig, output_dir: Path, workers: int = 1) -> Tuple[List[str], int]:
    check = config.gradient_check
    widths = check.widths
    root = Rng(config.seed)
    rows = []
    for nonlinearity, objective in product(check.nonlinearities, list(ObjectiveKind)):
        stream = root.split(f"{nonlinearity.value}/{objective.value}")
        output = (
            OutputActivation.SOFTMAX
            if objective is ObjectiveKind.CROSS_ENTROPY
            else OutputActivation.from_nonlinearity(nonlinearity)
        )
        for seed in range(check.seeds):
            rng = stream.child(seed)
            params = init_network(widths, check.g, nonlinearity, output, seed=rng.split("init"))
            inputs = rng.split("inputs").standard_normal((check.examples, widths[0]))
            if objective is ObjectiveKind.CROSS_ENTROPY:
                labels = rng.split("targets").integers(0, widths[-1], check.examples)
                targets = one_hot(labels, widths[-1])
            else:
                targets = 0.5 * rng.split("targets").standard_normal((check.examples, widths[-1]))
            error = gradient_check(params, inputs, targets, objective)
            rows.append(
                {
                    "nonlinearity": nonlinearity.value,
                    "objective": objective.value,
                    "seed": seed,
                    "max_relative_error": error,
                    "passed": bool(error < check.tolerance),
                }
            )
    frame = pd.DataFrame(rows)
    failed = int((~frame["passed"]).sum())
    if failed:
        logger.warning("gradient_check_failures", failed=failed, tolerance=check.tolerance)
    return [_write(frame, output_dir / "gradient_check.csv")], failed


def write_manifest(output_dir: Path, config: ExperimentConfig, files: Sequence[str], failed: int) -> str:
    payload = {
        "artifact_version": ARTIFACT_VERSION,
        "schema_version": SCHEMA_VERSION,
        "command": config.kind.value,
        "seed": config.seed,
        "config": config.model_dump(mode="json"),
        "outputs": sorted(files),
        "failed_cells": failed,
    }
    write_json_atomic(output_dir / MANIFEST_NAME, payload)
    return MANIFEST_NAME


_RUNNERS = {
    ExperimentKind.WALK: run_walk_experiment,
    ExperimentKind.G_SWEEP: run_g_sweep,
    ExperimentKind.DEPTH_SWEEP: run_depth_sweep,
    ExperimentKind.TRAIN_ONCE: run_train_once,
    ExperimentKind.GRADIENT_CHECK: run_gradient_check,
}


def run_experiment(
    config: ExperimentConfig,
    settings: Optional[RuntimeSettings] = None,
    output_dir: Optional[Path] = None,
) -> RunOutcome:
    """Resolve the configuration, run it and write the manifest"""
    settings = settings or RuntimeSettings()
    resolved_dir = Path(output_dir or config.output_dir or settings.output_dir)
    workers = config.workers or settings.workers
    if config.kind in (ExperimentKind.G_SWEEP, ExperimentKind.DEPTH_SWEEP, ExperimentKind.TRAIN_ONCE):
        config = resolve_data_source(config, settings)
    if config.kind is ExperimentKind.WALK and config.walk.memory_budget_mb is None:
        # pinned so a replay streams or materializes the trace the same way
        walk = config.walk.model_copy(update={"memory_budget_mb": settings.trace_budget_mb})
        config = config.model_copy(update={"walk": walk})
    config = config.model_copy(update={"output_dir": str(resolved_dir)})

    try:
        resolved_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ExperimentIOError(resolved_dir, exc) from exc

    logger.info("experiment_started", kind=config.kind.value, seed=config.seed, output_dir=str(resolved_dir))
    files, failed = _RUNNERS[config.kind](config, resolved_dir, workers)
    files.append(write_manifest(resolved_dir, config, files, failed))
    logger.info("experiment_finished", kind=config.kind.value, files=files, failed_cells=failed)
    return RunOutcome(kind=config.kind, output_dir=resolved_dir, files=tuple(files), failed_cells=failed)
