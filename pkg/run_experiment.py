#!/usr/bin/env python3
"""
Command-line entry point for the layer-wise training experiments.

Subcommands:
    run       train every configured (strategy, seed) pair and write results
    generate  write the synthetic dataset described by a config to CSV
    evaluate  report a saved model's error on a dataset CSV
"""

import argparse
import sys
from typing import List, Optional

from loguru import logger

from core.config_loader import settings
from core.errors import ConfigError, LayerwiseError
from core.log_setup import configure_logging
from experiment.config import load_config
from experiment.runner import EXIT_ERROR, EXIT_OK, run_experiment
from mlp.data import generate, read_csv, write_csv
from mlp.hyperparams import LossNorm
from mlp.model_io import load_model
from mlp.train import evaluate


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Full vs sequential (layer-wise) training experiments",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  python run_experiment.py run config/default_experiment.conf                    # Default experiment
  python run_experiment.py run exp.conf --out results/quick --seeds 1          # One seed, custom output
  python run_experiment.py run exp.conf --strategies sequential               # Sequential only
  python run_experiment.py generate config/default_experiment.conf data.csv  # Dump the dataset
  python run_experiment.py evaluate results/models/full_seed1.txt results/data/val.csv
        """,
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    run = subparsers.add_parser("run", help="Run an experiment")
    run.add_argument("config", help="Experiment config (section.key = value lines)")
    run.add_argument("--out", help="Output directory (overrides run.output_dir)")
    run.add_argument("--seeds", type=int, help="Number of seeds (overrides run.seeds)")
    run.add_argument("--strategies", help="Comma list of full,sequential (overrides run.strategies)")
    run.add_argument("--workers", type=int, help="Worker processes (overrides run.workers)")

    gen = subparsers.add_parser("generate", help="Write the synthetic dataset to CSV")
    gen.add_argument("config", help="Experiment config; only data.* keys are used")
    gen.add_argument("output", help="Destination CSV path")

    ev = subparsers.add_parser("evaluate", help="Evaluate a saved model on a dataset CSV")
    ev.add_argument("model", help="Serialized model file")
    ev.add_argument("dataset", help="Dataset CSV (u1,...,ud,target)")
    ev.add_argument("--loss", choices=[norm.value for norm in LossNorm], default=LossNorm.L1.value)
    return parser


def _run(args: argparse.Namespace) -> int:
    overrides = {
        "run.output_dir": args.out,
        "run.seeds": args.seeds,
        "run.strategies": args.strategies,
        "run.workers": args.workers,
    }
    cfg = load_config(args.config, overrides)
    return run_experiment(cfg).exit_code


def _generate(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    write_csv(generate(cfg.data.generator), args.output)
    logger.info(f"Dataset written: {args.output}")
    return EXIT_OK


def _evaluate(args: argparse.Namespace) -> int:
    net = load_model(args.model)
    error = evaluate(net, read_csv(args.dataset), LossNorm(args.loss))
    print(f"{args.loss} error = {error:.17g}")
    return EXIT_OK


COMMANDS = {"run": _run, "generate": _generate, "evaluate": _evaluate}


def main(argv: Optional[List[str]] = None) -> int:
    """Main function for command-line interface."""
    args = build_parser().parse_args(argv)
    configure_logging(settings.logging)

    try:
        return COMMANDS[args.command](args)
    except ConfigError as e:
        logger.error(f"Invalid configuration: {e}")
    except (LayerwiseError, OSError) as e:
        logger.error(f"{args.command} failed: {e}")
    except KeyboardInterrupt:
        logger.info("Interrupted by user")
        return 130
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
