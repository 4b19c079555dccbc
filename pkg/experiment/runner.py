"""
Experiment runner for the full-vs-sequential comparison.

Generates the synthetic dataset once, splits and standardizes it, trains every
(strategy, seed) pair, and writes curves.csv, summary.txt, the final models and
the datasets the runs were trained on.
"""

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional

from loguru import logger

from core.config_loader import OutputConfig, settings
from core.errors import DivergenceError
from experiment.config import ExperimentConfig
from experiment.report import (
    Comparison,
    RunOutcome,
    compare,
    curve_rows,
    render_summary,
    summarize,
    write_curves,
)
from mlp.data import Dataset, generate, split_three, standardize_apply, standardize_fit, write_csv
from mlp.hyperparams import Hyperparams
from mlp.model_io import save_model
from mlp.network import Architecture, problem_size_table
from mlp.train import Strategy, evaluate, train_strategy

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_DIVERGED = 2


@dataclass(frozen=True, eq=False)
class PreparedData:
    train: Dataset
    val: Dataset
    test: Optional[Dataset]


@dataclass(frozen=True, eq=False)
class RunJob:
    """Everything one worker needs; no state is shared between jobs."""
    strategy: Strategy
    seed: int
    arch: Architecture
    hp: Hyperparams
    data: PreparedData


@dataclass(frozen=True, eq=False)
class ExperimentResult:
    exit_code: int
    outcomes: List[RunOutcome]
    comparison: Comparison
    output_dir: Path


def execute_run(job: RunJob) -> RunOutcome:
    """Train one (strategy, seed) pair; divergence is captured, not raised."""
    start = time.perf_counter()
    logger.info(f"▶ {job.strategy.value} seed {job.seed}: {job.hp.epochs} epochs per problem")
    try:
        report = train_strategy(job.strategy, job.arch, job.data.train, job.data.val, job.hp)
    except DivergenceError as e:
        logger.error(f"{job.strategy.value} seed {job.seed}: {e}")
        return RunOutcome(job.strategy, job.seed, None, str(e), time.perf_counter() - start)

    test_error = None
    if job.data.test is not None:
        test_error = evaluate(report.final_model, job.data.test, job.hp.loss)
    elapsed = time.perf_counter() - start
    logger.info(
        f"✔ {job.strategy.value} seed {job.seed}: final validation error "
        f"{report.final_val_error:.6g} in {elapsed:.1f}s"
    )
    return RunOutcome(job.strategy, job.seed, report, None, elapsed, test_error)


class ExperimentRunner:
    """
    Runs a validated ExperimentConfig end to end.

    Independent runs may execute in worker processes; results are collected in
    job order and written by this process alone, so outputs do not depend on
    the worker count.
    """

    def __init__(self, cfg: ExperimentConfig, output: Optional[OutputConfig] = None):
        """
        Initialize experiment runner.

        Args:
            cfg: Experiment configuration
            output: Output file names. Defaults to the loaded settings
        """
        self.cfg = cfg
        self.output = output or settings.output
        self.output_dir = Path(cfg.run.output_dir)
        self.sizes = problem_size_table(cfg.arch)

    def prepare_data(self) -> PreparedData:
        """Generate, split and (optionally) standardize with training statistics."""
        data_cfg = self.cfg.data
        dataset = generate(data_cfg.generator)
        train, val, test = split_three(dataset, data_cfg.val_fraction, data_cfg.test_fraction, data_cfg.seed)
        if data_cfg.standardize:
            stats = standardize_fit(train)
            train = standardize_apply(train, stats)
            val = standardize_apply(val, stats)
            test = standardize_apply(test, stats) if test is not None else None
        logger.info(
            f"Data ready: {len(train)} train / {len(val)} validation"
            + (f" / {len(test)} test" if test is not None else "")
        )
        return PreparedData(train, val, test)

    def build_jobs(self, data: PreparedData) -> List[RunJob]:
        return [
            RunJob(strategy, seed, self.cfg.arch, self.cfg.hyperparams_for(strategy, seed), data)
            for strategy in self.cfg.run.strategies
            for seed in self.cfg.run_seeds
        ]

    def execute(self, jobs: List[RunJob]) -> List[RunOutcome]:
        workers = min(self.cfg.run.workers, len(jobs))
        if workers <= 1:
            return [execute_run(job) for job in jobs]
        logger.info(f"Running {len(jobs)} jobs on {workers} worker processes")
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(execute_run, jobs))

    def write_outputs(self, data: PreparedData, outcomes: List[RunOutcome]) -> Comparison:
        out = self.output_dir
        out.mkdir(parents=True, exist_ok=True)

        data_dir = out / self.output.data_dir
        write_csv(data.train, data_dir / "train.csv")
        write_csv(data.val, data_dir / "val.csv")
        if data.test is not None:
            write_csv(data.test, data_dir / "test.csv")

        rows = [row for outcome in outcomes for row in curve_rows(outcome)]
        write_curves(rows, out / self.output.curves_file)

        for outcome in outcomes:
            if outcome.report is not None:
                save_model(
                    outcome.report.final_model,
                    out / self.output.models_dir / f"{outcome.strategy.value}_seed{outcome.seed}.txt",
                )

        summaries = summarize(outcomes, self.cfg.run.strategies, self.sizes)
        comparison = compare(summaries)
        summary_path = out / self.output.summary_file
        with open(summary_path, "w", encoding="utf-8", newline="\n") as file:
            file.write(render_summary(self.cfg.echo(), self.sizes, summaries, comparison))
        logger.info(f"Summary written: {summary_path}")
        return comparison

    def run(self) -> ExperimentResult:
        logger.info(
            f"🚀 Experiment: strategies {[s.value for s in self.cfg.run.strategies]}, "
            f"{self.cfg.run.seeds} seed(s), output {self.output_dir}"
        )
        data = self.prepare_data()
        outcomes = self.execute(self.build_jobs(data))
        comparison = self.write_outputs(data, outcomes)

        diverged = [o for o in outcomes if not o.completed]
        if diverged:
            logger.warning(f"Completed with {len(diverged)} diverged run(s)")
            exit_code = EXIT_DIVERGED
        else:
            logger.info(f"✅ Experiment completed: {comparison.verdict}")
            exit_code = EXIT_OK
        return ExperimentResult(exit_code, outcomes, comparison, self.output_dir)


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    return ExperimentRunner(cfg).run()
