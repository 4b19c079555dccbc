"""
Experiment configuration: pydantic models and the flat `section.key = value` parser.

Grammar: one `section.key = value` per line; `#` starts a comment; blank lines
are ignored. Values are read as YAML scalars, and comma-separated lists
(`arch.hidden = 16,16,16`) are split by the field validators. Every key is
optional; an empty file yields the documented defaults.
"""

from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple, Union

import yaml
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from core.errors import ConfigError
from core.text_io import read_text
from mlp.data import GeneratorConfig
from mlp.hyperparams import Hyperparams
from mlp.network import Architecture
from mlp.train import Strategy

SUPPORTED_INPUT_DIM = 2


class BudgetMode(str, Enum):
    """per_stage: every problem gets E epochs; matched_total: full training gets L * E."""
    PER_STAGE = "per_stage"
    MATCHED_TOTAL = "matched_total"


class DataSettings(GeneratorConfig):
    """Generator settings plus partitioning and preprocessing."""
    val_fraction: float = Field(default=0.2, gt=0.0, lt=1.0, description="Validation share of all samples")
    test_fraction: float = Field(default=0.0, ge=0.0, lt=1.0, description="Held-out test share; 0 disables")
    standardize: bool = Field(default=True, description="Standardize inputs with training statistics")

    @property
    def generator(self) -> GeneratorConfig:
        return GeneratorConfig(**self.model_dump(include=set(GeneratorConfig.model_fields)))


class RunSettings(BaseModel):
    """Which strategies run, over how many seeds, and where results go."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    strategies: Tuple[Strategy, ...] = Field(
        default=(Strategy.FULL, Strategy.SEQUENTIAL), min_length=1, description="Strategies to run"
    )
    seeds: int = Field(default=5, ge=1, description="Number of training seeds per strategy")
    budget_mode: BudgetMode = Field(default=BudgetMode.PER_STAGE)
    output_dir: Path = Field(default=Path("results"), description="Directory for curves, summary and models")
    workers: int = Field(default=1, ge=1, description="Parallel worker processes")

    @field_validator("strategies", mode="before")
    @classmethod
    def _split_strategies(cls, value):
        if isinstance(value, str):
            value = [part.strip() for part in value.split(",") if part.strip()]
        return value

    @field_validator("strategies")
    @classmethod
    def _dedupe(cls, value: Tuple[Strategy, ...]) -> Tuple[Strategy, ...]:
        return tuple(dict.fromkeys(value))


class ExperimentConfig(BaseModel):
    """Fully validated experiment description."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    arch: Architecture = Field(default_factory=Architecture)
    data: DataSettings = Field(default_factory=DataSettings)
    train: Hyperparams = Field(default_factory=Hyperparams)
    run: RunSettings = Field(default_factory=RunSettings)

    @property
    def run_seeds(self) -> List[int]:
        """Training seeds train.seed, train.seed + 1, ... (mod 2^64)."""
        return [(self.train.seed + i) % 2**64 for i in range(self.run.seeds)]

    def hyperparams_for(self, strategy: Strategy, seed: int) -> Hyperparams:
        epochs = self.train.epochs
        if Strategy(strategy) is Strategy.FULL and self.run.budget_mode is BudgetMode.MATCHED_TOTAL:
            epochs *= self.arch.depth
        return self.train.model_copy(update={"seed": seed, "epochs": epochs})

    def echo(self) -> List[str]:
        """Every effective setting as `section.key = value`, in declaration order."""
        lines = []
        for section in type(self).model_fields:
            values = getattr(self, section).model_dump(mode="json", by_alias=True)
            for key, value in values.items():
                lines.append(f"{section}.{key} = {_format_value(value)}")
        return lines


def _format_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (list, tuple)):
        return ",".join(_format_value(v) for v in value)
    return str(value)


def _parse_value(text: str, key: str, line: int) -> Any:
    try:
        return yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise ConfigError(f"unreadable value '{text}': {e}", key=key, line=line) from e


def _line_of(key: str, lines: Mapping[str, int]) -> int:
    """Line of `key`; for a bad section, the first line that used it."""
    if key in lines:
        return lines[key]
    return min((n for k, n in lines.items() if k.startswith(key + ".") and n), default=0)


def parse_config(text: str, overrides: Optional[Mapping[str, Any]] = None) -> ExperimentConfig:
    """
    Parse and validate an experiment config.

    Args:
        text: File contents in the flat key-value grammar
        overrides: `section.key` -> value pairs applied on top (command-line flags)

    Returns:
        ExperimentConfig with every default filled in

    Raises:
        ConfigError: Naming the key and line of the first problem
    """
    raw: Dict[str, Dict[str, Any]] = {}
    lines: Dict[str, int] = {}

    for line_number, line in enumerate(text.splitlines(), start=1):
        content = line.split("#", 1)[0].strip()
        if not content:
            continue
        if "=" not in content:
            raise ConfigError("expected 'section.key = value'", line=line_number)
        key, value = (part.strip() for part in content.split("=", 1))
        if key.count(".") != 1 or not all(key.split(".")):
            raise ConfigError("key must have the form section.key", key=key, line=line_number)
        if key in lines:
            raise ConfigError(f"duplicate key (first set on line {lines[key]})", key=key, line=line_number)
        section, name = key.split(".")
        raw.setdefault(section, {})[name] = _parse_value(value, key, line_number)
        lines[key] = line_number

    for key, value in (overrides or {}).items():
        if value is None:
            continue
        section, name = key.split(".", 1)
        raw.setdefault(section, {})[name] = value
        lines[key] = 0

    try:
        cfg = ExperimentConfig.model_validate(raw)
    except ValidationError as e:
        error = e.errors()[0]
        key = ".".join(str(part) for part in error["loc"][:2])
        raise ConfigError(error["msg"], key=key, line=_line_of(key, lines)) from e

    if cfg.arch.input_dim != SUPPORTED_INPUT_DIM:
        key = "arch.input_dim"
        raise ConfigError(
            f"the synthetic generator produces {SUPPORTED_INPUT_DIM} features, got {cfg.arch.input_dim}",
            key=key, line=_line_of(key, lines),
        )
    if cfg.data.test_fraction and cfg.data.test_fraction >= 1.0 - cfg.data.val_fraction:
        key = "data.test_fraction"
        raise ConfigError("validation and test shares leave no training data", key=key, line=_line_of(key, lines))

    logger.debug(f"Parsed experiment config with {len(lines)} explicit key(s)")
    return cfg


def load_config(path: Union[str, Path], overrides: Optional[Mapping[str, Any]] = None) -> ExperimentConfig:
    """Read and parse a config file."""
    text = read_text(path, ConfigError)
    logger.info(f"Experiment config loaded from: {path}")
    return parse_config(text, overrides)
