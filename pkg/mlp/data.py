"""
Datasets for the layer-wise training experiments.

This module provides the synthetic parameter-estimation generator
(u = [x(0), x(0) * exp(t1 * a)], target a), seeded splitting, input
standardization, derivation of cached-activation datasets from a frozen
layer prefix, and CSV persistence.
"""

import csv
import io
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field, field_validator

from core.errors import ContractViolation, DatasetParseError
from core.prng import Prng
from core.text_io import read_text
from mlp.network import ActivationKind, LayerParams, layer_forward


class ProvenanceKind(str, Enum):
    RAW = "raw"
    STANDARDIZED = "standardized"
    ACTIVATIONS = "activations"


@dataclass(frozen=True)
class Provenance:
    """Where a dataset's inputs came from; `stage` is set for cached activations."""
    kind: ProvenanceKind = ProvenanceKind.RAW
    stage: Optional[int] = None

    def __str__(self) -> str:
        if self.kind is ProvenanceKind.ACTIVATIONS:
            return f"activations({self.stage})"
        return self.kind.value


@dataclass(frozen=True)
class Sample:
    input: np.ndarray
    target: float


@dataclass(frozen=True, eq=False)
class Dataset:
    """
    Paired inputs (one row per sample) and scalar targets.

    Arrays are copied and made read-only on construction.
    """
    inputs: np.ndarray
    targets: np.ndarray
    provenance: Provenance = Provenance()

    def __post_init__(self):
        inputs = np.array(self.inputs, dtype=np.float64)
        targets = np.array(self.targets, dtype=np.float64).reshape(-1)
        if inputs.ndim != 2:
            raise ContractViolation(f"dataset inputs must be a matrix, got shape {inputs.shape}")
        if inputs.shape[0] != targets.shape[0]:
            raise ContractViolation(f"{inputs.shape[0]} input rows but {targets.shape[0]} targets")
        if inputs.shape[1] < 1:
            raise ContractViolation("dataset inputs need at least one feature")
        if not (np.all(np.isfinite(inputs)) and np.all(np.isfinite(targets))):
            raise ContractViolation("dataset contains non-finite values")
        inputs.setflags(write=False)
        targets.setflags(write=False)
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "targets", targets)

    @classmethod
    def from_samples(cls, samples: Sequence[Sample], provenance: Provenance = Provenance()) -> "Dataset":
        if not samples:
            raise ContractViolation("cannot infer input_dim from an empty sample list")
        return cls(
            np.array([s.input for s in samples], dtype=np.float64),
            np.array([s.target for s in samples], dtype=np.float64),
            provenance,
        )

    @property
    def input_dim(self) -> int:
        return self.inputs.shape[1]

    @property
    def samples(self) -> Iterator[Sample]:
        for row, target in zip(self.inputs, self.targets):
            yield Sample(row, float(target))

    def __len__(self) -> int:
        return self.targets.shape[0]

    def take(self, indices: Sequence[int]) -> "Dataset":
        index = np.asarray(indices, dtype=np.int64)
        return Dataset(self.inputs[index], self.targets[index], self.provenance)

    def require_nonempty(self, what: str) -> None:
        if len(self) == 0:
            raise ContractViolation(f"{what} dataset is empty")


def _split_pair(value):
    """Accept "low,high" strings from flat config files."""
    if isinstance(value, str):
        return tuple(part.strip() for part in value.split(","))
    return value


class GeneratorConfig(BaseModel):
    """
    Synthetic data settings: x(0) ~ U(x0_range), a ~ U(a_range), measurement at t1.
    """
    model_config = ConfigDict(frozen=True, extra="forbid", allow_inf_nan=False)

    n: int = Field(default=500, ge=1, description="Number of samples")
    x0_range: Tuple[float, float] = Field(default=(0.5, 2.0), description="Support of x(0)")
    a_range: Tuple[float, float] = Field(default=(-1.0, 1.0), description="Support of the parameter a")
    t1: float = Field(default=2.0, description="Second measurement time")
    seed: int = Field(default=7, ge=0, le=2**64 - 1, description="Generator seed")

    @field_validator("x0_range", "a_range", mode="before")
    @classmethod
    def _split_ranges(cls, value):
        return _split_pair(value)

    @field_validator("x0_range")
    @classmethod
    def _positive_x0_range(cls, value: Tuple[float, float]) -> Tuple[float, float]:
        if not 0.0 < value[0] <= value[1]:
            raise ValueError(f"x0_range must satisfy 0 < low <= high, got {value}")
        return value

    @field_validator("a_range")
    @classmethod
    def _ordered_a_range(cls, value: Tuple[float, float]) -> Tuple[float, float]:
        if value[0] > value[1]:
            raise ValueError(f"a_range must satisfy low <= high, got {value}")
        return value


def generate(cfg: GeneratorConfig) -> Dataset:
    """
    Generate `cfg.n` samples of u = [x(0), x(0) * exp(t1 * a)] with target a.

    Each sample draws x(0) then a from the seeded stream.
    """
    rng = Prng(cfg.seed)
    x0 = np.empty(cfg.n)
    a = np.empty(cfg.n)
    for i in range(cfg.n):
        x0[i] = rng.uniform(*cfg.x0_range)
        a[i] = rng.uniform(*cfg.a_range)
    inputs = np.column_stack([x0, x0 * np.exp(cfg.t1 * a)])
    logger.info(f"Generated {cfg.n} samples (seed {cfg.seed}, x0 {cfg.x0_range}, a {cfg.a_range})")
    return Dataset(inputs, a, Provenance(ProvenanceKind.RAW))


def split(ds: Dataset, val_fraction: float, seed: int) -> Tuple[Dataset, Dataset]:
    """
    Seeded permutation, then the first ceil(n * (1 - f)) samples train and the rest validate.

    Raises:
        ContractViolation: If either part would be empty
    """
    if not 0.0 < val_fraction < 1.0:
        raise ContractViolation(f"val_fraction must lie in (0, 1), got {val_fraction}")
    n = len(ds)
    # rounding guards against 500 * 0.8 landing a hair above 400
    n_train = math.ceil(round(n * (1.0 - val_fraction), 9))
    if not 0 < n_train < n:
        raise ContractViolation(
            f"val_fraction {val_fraction} on {n} samples leaves {n_train} train / {n - n_train} validation"
        )
    order = Prng(seed).permutation(n)
    return ds.take(order[:n_train]), ds.take(order[n_train:])


def split_three(
    ds: Dataset, val_fraction: float, test_fraction: float, seed: int
) -> Tuple[Dataset, Dataset, Optional[Dataset]]:
    """
    Optionally hold out a test partition before the train/validation split.

    Both fractions are of the whole dataset. With test_fraction 0 this is
    exactly split(ds, val_fraction, seed) and the test part is None.
    """
    if test_fraction == 0.0:
        train, val = split(ds, val_fraction, seed)
        return train, val, None
    if not 0.0 < test_fraction < 1.0 - val_fraction:
        raise ContractViolation(
            f"test_fraction must lie in (0, 1 - val_fraction), got {test_fraction} with val_fraction {val_fraction}"
        )
    rest, test = split(ds, test_fraction, seed)
    train, val = split(rest, val_fraction / (1.0 - test_fraction), (seed + 1) % 2**64)
    return train, val, test


@dataclass(frozen=True, eq=False)
class StandardizeStats:
    """Per-feature mean and scale; constant features get mean 0 and scale 1."""
    mean: np.ndarray
    std: np.ndarray
    constant: np.ndarray


def standardize_fit(train: Dataset) -> StandardizeStats:
    """Per-feature mean and population std over the training partition only."""
    train.require_nonempty("standardization")
    mean = np.mean(train.inputs, axis=0)
    std = np.std(train.inputs, axis=0)
    constant = ~(std > 1e-12 * np.maximum(1.0, np.abs(mean)))
    if np.any(constant):
        logger.warning(f"Constant feature(s) {np.flatnonzero(constant).tolist()} left unscaled")
    return StandardizeStats(
        mean=np.where(constant, 0.0, mean),
        std=np.where(constant, 1.0, std),
        constant=constant,
    )


def standardize_apply(ds: Dataset, stats: StandardizeStats) -> Dataset:
    """Map x -> (x - mean) / std per feature; targets untouched."""
    if ds.input_dim != stats.mean.shape[0]:
        raise ContractViolation(f"stats cover {stats.mean.shape[0]} features, dataset has {ds.input_dim}")
    return Dataset(
        (ds.inputs - stats.mean) / stats.std,
        ds.targets,
        Provenance(ProvenanceKind.STANDARDIZED),
    )


def map_through(ds: Dataset, prefix: Sequence[LayerParams], act: ActivationKind) -> Dataset:
    """
    Replace every input by the activations of a frozen layer prefix.

    Mapping an activations(j) dataset through m more layers yields activations(j + m).
    """
    if not prefix:
        return ds
    x = ds.inputs
    for layer in prefix:
        x = layer_forward(layer, act, x)
    base = ds.provenance.stage if ds.provenance.kind is ProvenanceKind.ACTIVATIONS else 0
    return Dataset(x, ds.targets, Provenance(ProvenanceKind.ACTIVATIONS, base + len(prefix)))


def _header(input_dim: int) -> List[str]:
    return [f"u{i + 1}" for i in range(input_dim)] + ["target"]


def write_csv(ds: Dataset, path: Union[str, Path]) -> None:
    """Write `u1,...,ud,target` rows with 17 significant digits and LF endings."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as file:
        writer = csv.writer(file, lineterminator="\n")
        writer.writerow(_header(ds.input_dim))
        for row, target in zip(ds.inputs, ds.targets):
            writer.writerow([f"{value:.17g}" for value in row] + [f"{target:.17g}"])
    logger.debug(f"Wrote {len(ds)} samples to {path}")


def _records(reader) -> Iterator[Tuple[int, List[str]]]:
    """Rows paired with the line they end on; csv errors become parse errors."""
    try:
        for row in reader:
            yield reader.line_num, row
    except csv.Error as e:
        raise DatasetParseError(f"malformed CSV: {e}", line=reader.line_num) from e


def read_csv(path: Union[str, Path], provenance: Provenance = Provenance()) -> Dataset:
    """
    Read a dataset CSV written by write_csv.

    Raises:
        DatasetParseError: On a bad header or malformed row, with its line number
    """
    text = read_text(path, DatasetParseError)
    records = _records(csv.reader(io.StringIO(text, newline="")))
    _, header = next(records, (1, None))
    if not header or len(header) < 2 or header != _header(len(header) - 1):
        raise DatasetParseError(f"expected header u1,...,ud,target, got {header}", line=1)
    width = len(header)
    inputs: List[List[float]] = []
    targets: List[float] = []
    for line_number, row in records:
        if len(row) != width:
            raise DatasetParseError(f"expected {width} fields, got {len(row)}", line=line_number)
        try:
            values = [float(field) for field in row]
        except ValueError as e:
            raise DatasetParseError(f"not a number: {e}", line=line_number) from e
        if not all(math.isfinite(v) for v in values):
            raise DatasetParseError("non-finite value", line=line_number)
        inputs.append(values[:-1])
        targets.append(values[-1])
    return Dataset(np.array(inputs, dtype=np.float64).reshape(-1, width - 1), np.array(targets), provenance)
