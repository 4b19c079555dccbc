"""
Training strategies: full (joint) training and sequential layer-wise training.

Sequential training builds the network one hidden layer at a time. Each stage
trains a single layer plus a temporary output head on the cached activations
of the frozen prefix, freezes the layer, and maps the cached inputs through it
for the next stage. Only the last stage keeps its head.
"""

from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np
from loguru import logger

from core.errors import ContractViolation, DivergenceError
from core.prng import Prng
from mlp.data import Dataset, map_through
from mlp.gradients import backprop, loss
from mlp.hyperparams import Hyperparams, LossNorm
from mlp.network import (
    Architecture,
    LayerParams,
    Mlp,
    OutputHead,
    init_mlp,
    param_count_full,
    param_count_stage,
    parameter_arrays,
    predict,
    with_parameter_arrays,
)
from mlp.optimizers import OptimizerState, optimizer_step


class Strategy(str, Enum):
    FULL = "full"
    SEQUENTIAL = "sequential"


@dataclass(frozen=True, eq=False)
class StageReport:
    """
    Outcome of one optimization problem.

    For a sequential stage `layers` holds the single trained layer; for full
    training it holds every layer.
    """
    stage_index: int
    train_loss: Tuple[float, ...]
    val_error: Tuple[float, ...]
    layers: Tuple[LayerParams, ...]
    head: OutputHead
    head_discarded: bool

    @property
    def trained_layer(self) -> LayerParams:
        return self.layers[-1]

    @property
    def final_val_error(self) -> float:
        return self.val_error[-1]


@dataclass(frozen=True, eq=False)
class TrainReport:
    """Per-stage curves, the assembled model and the size of every optimization problem."""
    strategy: Strategy
    stages: Tuple[StageReport, ...]
    final_model: Mlp
    problem_sizes: Tuple[int, ...]

    @property
    def final_val_error(self) -> float:
        return self.stages[-1].final_val_error


def evaluate(net: Mlp, ds: Dataset, norm: LossNorm) -> float:
    """Mean loss of `net` over `ds`."""
    ds.require_nonempty("evaluation")
    return loss(predict(net, ds.inputs), ds.targets, norm)


def _check_datasets(input_dim: int, train: Dataset, val: Dataset) -> None:
    train.require_nonempty("training")
    val.require_nonempty("validation")
    for name, ds in (("training", train), ("validation", val)):
        if ds.input_dim != input_dim:
            raise ContractViolation(f"network expects {input_dim} inputs, {name} data has {ds.input_dim}")


def train_stage(
    net: Mlp,
    train: Dataset,
    val: Dataset,
    hp: Hyperparams,
    rng: Prng,
    stage_index: int = 1,
    head_discarded: bool = False,
) -> StageReport:
    """
    Train every parameter of `net` with shuffled mini-batches.

    Args:
        net: Initial network; all of its parameters form the trainable scope
        train: Training data (inputs already mapped through any frozen prefix)
        val: Validation data in the same input space
        hp: Hyperparameters
        rng: Stream used for per-epoch shuffling
        stage_index: Stage number recorded in the report and in errors
        head_discarded: Whether the caller will drop this head afterwards

    Returns:
        StageReport with one train loss and one validation error per epoch

    Raises:
        ContractViolation: On empty data or dimension mismatch
        DivergenceError: When the loss or the parameters stop being finite
    """
    _check_datasets(net.input_dim, train, val)

    params = parameter_arrays(net)
    state: Optional[OptimizerState] = None
    train_losses: List[float] = []
    val_errors: List[float] = []
    n = len(train)

    for epoch in range(1, hp.epochs + 1):
        order = rng.permutation(n)
        with np.errstate(over="ignore", invalid="ignore"):
            for start in range(0, n, hp.batch_size):
                batch = order[start:start + hp.batch_size]
                grads = backprop(net, train.inputs[batch], train.targets[batch], hp.loss)
                params, state = optimizer_step(params, grads.as_arrays(), state, hp)
                if not all(np.all(np.isfinite(p)) for p in params):
                    logger.error(f"Stage {stage_index}: parameters became non-finite in epoch {epoch}")
                    raise DivergenceError(epoch, stage_index, "non-finite parameters")
                net = with_parameter_arrays(net, params)

            train_loss = loss(predict(net, train.inputs), train.targets, hp.loss)
            val_error = loss(predict(net, val.inputs), val.targets, hp.loss)
        if not (np.isfinite(train_loss) and np.isfinite(val_error)):
            logger.error(f"Stage {stage_index}: non-finite loss in epoch {epoch}")
            raise DivergenceError(epoch, stage_index)
        train_losses.append(train_loss)
        val_errors.append(val_error)
        logger.debug(f"Stage {stage_index} epoch {epoch}: train {train_loss:.6g}, validation {val_error:.6g}")

    logger.info(
        f"Stage {stage_index} finished after {hp.epochs} epochs: "
        f"train {train_losses[-1]:.6g}, validation {val_errors[-1]:.6g}"
    )
    return StageReport(
        stage_index=stage_index,
        train_loss=tuple(train_losses),
        val_error=tuple(val_errors),
        layers=net.layers,
        head=net.head,
        head_discarded=head_discarded,
    )


def train_full(arch: Architecture, train: Dataset, val: Dataset, hp: Hyperparams) -> TrainReport:
    """
    Train every layer and the output head jointly as one problem.
    """
    _check_datasets(arch.input_dim, train, val)
    rng = Prng(hp.seed)
    net = init_mlp(arch, rng)
    size = param_count_full(arch)
    logger.info(f"Full training: {arch.depth} hidden layers, {size} unknowns, seed {hp.seed}")

    stage = train_stage(net, train, val, hp, rng, stage_index=1, head_discarded=False)
    model = Mlp(stage.layers, stage.head, arch.hidden_activation)
    return TrainReport(Strategy.FULL, (stage,), model, (size,))


def train_sequential(arch: Architecture, train: Dataset, val: Dataset, hp: Hyperparams) -> TrainReport:
    """
    Build the network one hidden layer at a time.

    Stage k trains layer k with a fresh temporary head on the activations of
    the frozen layers 1..k-1. Every stage draws its initialization and
    shuffles from one seeded stream, so a single-layer architecture reproduces
    train_full exactly.
    """
    _check_datasets(arch.input_dim, train, val)
    rng = Prng(hp.seed)
    act = arch.hidden_activation
    logger.info(f"Sequential training: {arch.depth} stages, seed {hp.seed}")

    frozen: List[LayerParams] = []
    stages: List[StageReport] = []
    stage_train, stage_val = train, val
    for k, width in enumerate(arch.hidden_widths, start=1):
        last = k == arch.depth
        stage_arch = Architecture(
            input_dim=stage_train.input_dim,
            hidden_widths=(width,),
            hidden_activation=act,
            output_activation=arch.output_activation,
        )
        stage_net = init_mlp(stage_arch, rng)
        logger.info(f"Stage {k}/{arch.depth}: {param_count_stage(arch, k)} unknowns, input {stage_train.provenance}")

        report = train_stage(stage_net, stage_train, stage_val, hp, rng, stage_index=k, head_discarded=not last)
        stages.append(report)
        frozen.append(report.trained_layer)
        if not last:
            stage_train = map_through(stage_train, [report.trained_layer], act)
            stage_val = map_through(stage_val, [report.trained_layer], act)

    model = Mlp(tuple(frozen), stages[-1].head, act)
    sizes = tuple(param_count_stage(arch, k) for k in range(1, arch.depth + 1))
    return TrainReport(Strategy.SEQUENTIAL, tuple(stages), model, sizes)


def train_strategy(
    strategy: Strategy, arch: Architecture, train: Dataset, val: Dataset, hp: Hyperparams
) -> TrainReport:
    if Strategy(strategy) is Strategy.FULL:
        return train_full(arch, train, val, hp)
    return train_sequential(arch, train, val, hp)
