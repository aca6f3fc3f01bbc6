#!/usr/bin/env python3
"""
Random Walk Initialization experiment CLI
Walk simulations, optimal-g and depth sweeps, single training runs and
gradient checks, each writing CSV results and a manifest
"""
import argparse
import os
import sys
from pathlib import Path
from typing import List, Optional

# Add the project root to Python path
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import structlog
from pydantic import ValidationError

from experiments import (
    ExperimentConfig,
    ExperimentIOError,
    ExperimentKind,
    RunOutcome,
    RuntimeSettings,
    configure_logging,
    default_config,
    get_settings,
    load_config,
    run_experiment,
    save_config,
)
from numeric_core import ArgumentError

logger = structlog.get_logger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2
EXIT_CELLS_FAILED = 3

VERBS = {
    "walk": ExperimentKind.WALK,
    "g-sweep": ExperimentKind.G_SWEEP,
    "depth-sweep": ExperimentKind.DEPTH_SWEEP,
    "train-once": ExperimentKind.TRAIN_ONCE,
    "gradient-check": ExperimentKind.GRADIENT_CHECK,
}


class ExperimentCLI:
    """Experiment commands"""

    def __init__(self, settings: RuntimeSettings):
        self.settings = settings

    def resolve_config(
        self,
        verb: str,
        config_path: Optional[str],
        seed: Optional[int],
        workers: Optional[int],
    ) -> ExperimentConfig:
        """Config file (or defaults) with the verb's kind and command-line overrides"""
        config = load_config(config_path) if config_path else default_config(VERBS[verb])
        update = {"kind": VERBS[verb]}
        if seed is not None:
            update["seed"] = seed
        if workers is not None:
            update["workers"] = workers
        return ExperimentConfig.model_validate({**config.model_dump(), **update})

    def run(self, config: ExperimentConfig, output_dir: Optional[str]) -> int:
        outcome = run_experiment(
            config, self.settings, Path(output_dir) if output_dir else None
        )
        self.report(outcome)
        return EXIT_OK if outcome.ok else EXIT_CELLS_FAILED

    def init_config(self, kind: str, path: str) -> int:
        written = save_config(default_config(VERBS[kind]), path)
        print(f"Wrote default {kind} configuration to {written}")
        return EXIT_OK

    @staticmethod
    def report(outcome: RunOutcome) -> None:
        print(f"{outcome.kind.value}: {len(outcome.files)} files in {outcome.output_dir}")
        for name in outcome.files:
            print(f"  {name}")
        if not outcome.ok:
            print(f"{outcome.failed_cells} cell(s) failed; reasons are in the outputs")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Random Walk Initialization experiments")
    subparsers = parser.add_subparsers(dest="command", help="Available commands")

    for verb, help_text in (
        ("walk", "Simulate ln Z random walks"),
        ("g-sweep", "Training error as a function of g and depth"),
        ("depth-sweep", "Training error across depths and learning-rate grids"),
        ("train-once", "Train a single network"),
        ("gradient-check", "Finite-difference gradient checks"),
    ):
        verb_parser = subparsers.add_parser(verb, help=help_text)
        verb_parser.add_argument("--config", help="JSON configuration or run manifest")
        verb_parser.add_argument("--output-dir", help="Directory for results")
        verb_parser.add_argument("--seed", type=int, help="Override the configured seed")
        verb_parser.add_argument("--workers", type=int, help="Parallel workers (-1: all cores)")

    init_parser = subparsers.add_parser("init-config", help="Write a default configuration")
    init_parser.add_argument("kind", choices=sorted(VERBS), help="Experiment kind")
    init_parser.add_argument("path", help="Output JSON path")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main CLI entry point"""
    parser = build_parser()
    args = parser.parse_args(argv)

    if not args.command:
        parser.print_help()
        return EXIT_USAGE

    settings = get_settings()
    configure_logging(settings.log_level, settings.json_logs)
    cli = ExperimentCLI(settings)

    try:
        if args.command == "init-config":
            return cli.init_config(args.kind, args.path)
        config = cli.resolve_config(args.command, args.config, args.seed, args.workers)
        return cli.run(config, args.output_dir)
    except (ValidationError, ArgumentError, ExperimentIOError, OSError, ValueError) as e:
        print(f"Error: {e}", file=sys.stderr)
        logger.error("cli_command_failed", command=args.command, error=str(e))
        return EXIT_ERROR
    except KeyboardInterrupt:
        print("Interrupted", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
