"""
Result artifacts of an experiment run: curve rows, per-strategy summaries,
the full-vs-sequential comparison and the plain-text summary report.

summary.txt layout (fields always in this order):

    [config]          every effective setting, `section.key = value`
    [problem_sizes]   full size, then one line per sequential stage with its share of full
    [strategy <s>]    one block per strategy in config order: runs, divergences,
                      final validation median/min/max, per-seed finals, per-stage medians
                      (sequential), test errors when a test partition exists, wall clock
    [comparison]      median full, median sequential, difference = full - sequential,
                      verdict, per-seed differences; or a note when a strategy is missing
"""

import csv
import statistics
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from loguru import logger

from mlp.network import ProblemSizes
from mlp.train import Strategy, TrainReport

CURVES_HEADER = ["strategy", "seed", "stage", "epoch", "train_loss", "val_error"]


@dataclass(frozen=True)
class CurveRow:
    strategy: Strategy
    seed: int
    stage: int
    epoch: int
    train_loss: float
    val_error: float


@dataclass(frozen=True, eq=False)
class RunOutcome:
    """One (strategy, seed) run: its report, or the divergence that stopped it."""
    strategy: Strategy
    seed: int
    report: Optional[TrainReport]
    divergence: Optional[str]
    wall_clock: float
    test_error: Optional[float] = None

    @property
    def completed(self) -> bool:
        return self.report is not None


def curve_rows(outcome: RunOutcome) -> List[CurveRow]:
    if outcome.report is None:
        return []
    rows = []
    for stage in outcome.report.stages:
        for epoch, (train_loss, val_error) in enumerate(zip(stage.train_loss, stage.val_error), start=1):
            rows.append(CurveRow(outcome.strategy, outcome.seed, stage.stage_index, epoch, train_loss, val_error))
    return rows


def write_curves(rows: Iterable[CurveRow], path: Union[str, Path]) -> int:
    """Write curves.csv (17 significant digits, LF endings); returns the row count."""
    count = 0
    with open(path, "w", encoding="utf-8", newline="") as file:
        writer = csv.writer(file, lineterminator="\n")
        writer.writerow(CURVES_HEADER)
        for row in rows:
            writer.writerow([
                row.strategy.value, row.seed, row.stage, row.epoch,
                f"{row.train_loss:.17g}", f"{row.val_error:.17g}",
            ])
            count += 1
    logger.info(f"Wrote {count} curve rows to {path}")
    return count


def read_curves(path: Union[str, Path]) -> List[CurveRow]:
    with open(path, "r", encoding="utf-8", newline="") as file:
        reader = csv.DictReader(file)
        return [
            CurveRow(
                Strategy(record["strategy"]), int(record["seed"]), int(record["stage"]),
                int(record["epoch"]), float(record["train_loss"]), float(record["val_error"]),
            )
            for record in reader
        ]


@dataclass(frozen=True)
class StrategySummary:
    """Aggregates over the seeds of one strategy."""
    strategy: Strategy
    final_val_errors: Tuple[Tuple[int, float], ...]
    divergences: Tuple[Tuple[int, str], ...]
    problem_sizes: Tuple[int, ...]
    stage_medians: Tuple[float, ...]
    test_errors: Tuple[Tuple[int, float], ...]
    wall_clock: float

    @property
    def errors(self) -> List[float]:
        return [error for _, error in self.final_val_errors]

    @property
    def median(self) -> Optional[float]:
        return statistics.median(self.errors) if self.errors else None

    @property
    def minimum(self) -> Optional[float]:
        return min(self.errors) if self.errors else None

    @property
    def maximum(self) -> Optional[float]:
        return max(self.errors) if self.errors else None


def summarize(
    outcomes: Sequence[RunOutcome], strategies: Sequence[Strategy], sizes: ProblemSizes
) -> List[StrategySummary]:
    """Group outcomes by strategy, keeping the configured strategy order."""
    summaries = []
    for strategy in strategies:
        runs = [o for o in outcomes if o.strategy is strategy]
        completed = [o for o in runs if o.completed]
        stage_count = len(completed[0].report.stages) if completed else 0
        stage_medians = tuple(
            statistics.median(o.report.stages[k].final_val_error for o in completed)
            for k in range(stage_count)
        )
        summaries.append(StrategySummary(
            strategy=strategy,
            final_val_errors=tuple((o.seed, o.report.final_val_error) for o in completed),
            divergences=tuple((o.seed, o.divergence) for o in runs if not o.completed),
            problem_sizes=(sizes.full,) if strategy is Strategy.FULL else sizes.stages,
            stage_medians=stage_medians,
            test_errors=tuple((o.seed, o.test_error) for o in completed if o.test_error is not None),
            wall_clock=sum(o.wall_clock for o in runs),
        ))
    return summaries


@dataclass(frozen=True)
class Comparison:
    """Signed difference full - sequential of final validation error; no pass/fail judgment."""
    available: bool
    note: str = ""
    median_full: Optional[float] = None
    median_sequential: Optional[float] = None
    per_seed: Tuple[Tuple[int, float], ...] = ()

    @property
    def difference(self) -> Optional[float]:
        if self.median_full is None or self.median_sequential is None:
            return None
        return self.median_full - self.median_sequential

    @property
    def verdict(self) -> str:
        return describe_difference(self.difference) if self.available else self.note


def describe_difference(difference: Optional[float]) -> str:
    if difference is None:
        return "not comparable"
    if difference > 0:
        return f"sequential better by {difference:.6g}"
    if difference < 0:
        return f"full better by {-difference:.6g}"
    return "no difference"


def compare(summaries: Sequence[StrategySummary]) -> Comparison:
    by_strategy: Dict[Strategy, StrategySummary] = {s.strategy: s for s in summaries}
    missing = [s.value for s in (Strategy.FULL, Strategy.SEQUENTIAL) if s not in by_strategy]
    if missing:
        return Comparison(False, note=f"comparison omitted: strategy {', '.join(missing)} not run")
    full = by_strategy[Strategy.FULL]
    sequential = by_strategy[Strategy.SEQUENTIAL]
    if full.median is None or sequential.median is None:
        return Comparison(False, note="comparison omitted: a strategy has no completed runs")
    sequential_by_seed = dict(sequential.final_val_errors)
    per_seed = tuple(
        (seed, error - sequential_by_seed[seed])
        for seed, error in full.final_val_errors
        if seed in sequential_by_seed
    )
    return Comparison(True, median_full=full.median, median_sequential=sequential.median, per_seed=per_seed)


def _g(value: Optional[float]) -> str:
    return "n/a" if value is None else f"{value:.17g}"


def render_summary(
    config_lines: Sequence[str],
    sizes: ProblemSizes,
    summaries: Sequence[StrategySummary],
    comparison: Comparison,
) -> str:
    """Render summary.txt in the documented field order."""
    lines = ["# layer-wise training experiment summary", "", "[config]"]
    lines.extend(config_lines)

    lines += ["", "[problem_sizes]", f"full = {sizes.full}"]
    for k, (size, ratio) in enumerate(zip(sizes.stages, sizes.ratios), start=1):
        lines.append(f"sequential.stage.{k} = {size} ({ratio:.4f} of full)")
    lines.append(f"sequential.discarded_head_params = {sizes.discarded_head_params}")

    for summary in summaries:
        lines += ["", f"[strategy {summary.strategy.value}]"]
        lines.append(f"runs = {len(summary.final_val_errors) + len(summary.divergences)}")
        lines.append(f"completed = {len(summary.final_val_errors)}")
        lines.append(f"divergences = {len(summary.divergences)}")
        lines.append("problem_sizes = " + ",".join(str(size) for size in summary.problem_sizes))
        lines.append(f"final_val_error.median = {_g(summary.median)}")
        lines.append(f"final_val_error.min = {_g(summary.minimum)}")
        lines.append(f"final_val_error.max = {_g(summary.maximum)}")
        for seed, error in summary.final_val_errors:
            lines.append(f"final_val_error.seed.{seed} = {_g(error)}")
        if summary.strategy is Strategy.SEQUENTIAL:
            for k, median in enumerate(summary.stage_medians, start=1):
                lines.append(f"stage_val_error.median.stage.{k} = {_g(median)}")
        for seed, error in summary.test_errors:
            lines.append(f"test_error.seed.{seed} = {_g(error)}")
        for seed, message in summary.divergences:
            lines.append(f"divergence.seed.{seed} = {message}")
        lines.append(f"wall_clock_seconds = {summary.wall_clock:.3f}")

    lines += ["", "[comparison]"]
    if comparison.available:
        lines.append(f"median.full = {_g(comparison.median_full)}")
        lines.append(f"median.sequential = {_g(comparison.median_sequential)}")
        lines.append(f"difference = {_g(comparison.difference)}")
        lines.append(f"verdict = {comparison.verdict}")
        for seed, difference in comparison.per_seed:
            lines.append(f"difference.seed.{seed} = {_g(difference)}")
    else:
        lines.append(f"note = {comparison.note}")
    return "\n".join(lines) + "\n"
