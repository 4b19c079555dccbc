"""
Feedforward network representation.

This module holds the immutable parameter containers (LayerParams, OutputHead,
Mlp), the Architecture description, activation functions, forward propagation,
Glorot initialization and parameter counting for full and per-stage problems.
"""

from dataclasses import dataclass
from enum import Enum
from typing import List, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from core.errors import ContractViolation
from core.prng import Prng

ArrayLike = Union[np.ndarray, Sequence[float], Sequence[Sequence[float]]]


class ActivationKind(str, Enum):
    """Elementwise activation functions."""
    RELU = "relu"
    IDENTITY = "identity"
    TANH = "tanh"

    def apply(self, x: np.ndarray) -> np.ndarray:
        if self is ActivationKind.RELU:
            return np.maximum(x, 0.0)
        if self is ActivationKind.TANH:
            return np.tanh(x)
        return x

    def derivative(self, pre_activation: np.ndarray) -> np.ndarray:
        """
        Derivative evaluated at the pre-activation values.

        The ReLU derivative at exactly 0 is taken as 0.
        """
        if self is ActivationKind.RELU:
            return (pre_activation > 0.0).astype(np.float64)
        if self is ActivationKind.TANH:
            t = np.tanh(pre_activation)
            return 1.0 - t * t
        return np.ones_like(pre_activation, dtype=np.float64)


def _frozen_array(values: ArrayLike, ndim: int, name: str) -> np.ndarray:
    array = np.array(values, dtype=np.float64)
    if array.ndim != ndim:
        raise ContractViolation(f"{name} must be {ndim}-dimensional, got shape {array.shape}")
    if not np.all(np.isfinite(array)):
        raise ContractViolation(f"{name} contains non-finite values")
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class LayerParams:
    """
    Weights (out_dim x in_dim, row-major) and bias (out_dim) of one hidden layer.
    """
    weights: np.ndarray
    bias: np.ndarray

    def __post_init__(self):
        weights = _frozen_array(self.weights, 2, "weights")
        bias = _frozen_array(self.bias, 1, "bias")
        if weights.shape[0] != bias.shape[0]:
            raise ContractViolation(
                f"weights have {weights.shape[0]} rows but bias has length {bias.shape[0]}"
            )
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "bias", bias)

    @property
    def in_dim(self) -> int:
        return self.weights.shape[1]

    @property
    def out_dim(self) -> int:
        return self.weights.shape[0]

    @property
    def param_count(self) -> int:
        return self.weights.size + self.bias.size

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LayerParams):
            return NotImplemented
        return (
            self.weights.shape == other.weights.shape
            and self.weights.tobytes() == other.weights.tobytes()
            and self.bias.tobytes() == other.bias.tobytes()
        )


@dataclass(frozen=True, eq=False)
class OutputHead:
    """Single output node: weight vector, scalar bias and output activation."""
    weights: np.ndarray
    bias: float
    activation: ActivationKind = ActivationKind.IDENTITY

    def __post_init__(self):
        object.__setattr__(self, "weights", _frozen_array(self.weights, 1, "head weights"))
        bias = float(self.bias)
        if not np.isfinite(bias):
            raise ContractViolation("head bias is non-finite")
        object.__setattr__(self, "bias", bias)
        object.__setattr__(self, "activation", ActivationKind(self.activation))

    @property
    def in_dim(self) -> int:
        return self.weights.shape[0]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, OutputHead):
            return NotImplemented
        return (
            self.weights.tobytes() == other.weights.tobytes()
            and np.float64(self.bias).tobytes() == np.float64(other.bias).tobytes()
            and self.activation is other.activation
        )


class Architecture(BaseModel):
    """Shape of a network: input dimension, hidden widths and activation choices."""
    model_config = ConfigDict(frozen=True, extra="forbid", populate_by_name=True)

    input_dim: int = Field(default=2, ge=1, description="Number of input features")
    hidden_widths: Tuple[int, ...] = Field(
        default=(16, 16, 16, 16, 16), min_length=1, alias="hidden",
        description="Width of each hidden layer, input side first",
    )
    hidden_activation: ActivationKind = Field(default=ActivationKind.RELU)
    output_activation: ActivationKind = Field(default=ActivationKind.IDENTITY)

    @field_validator("hidden_widths", mode="before")
    @classmethod
    def _split_widths(cls, value):
        if isinstance(value, str):
            return tuple(part.strip() for part in value.split(",") if part.strip())
        if isinstance(value, int):
            return (value,)
        return value

    @field_validator("hidden_widths")
    @classmethod
    def _positive_widths(cls, value: Tuple[int, ...]) -> Tuple[int, ...]:
        if any(width < 1 for width in value):
            raise ValueError(f"every hidden width must be >= 1, got {list(value)}")
        return value

    @property
    def depth(self) -> int:
        return len(self.hidden_widths)

    def layer_input_dim(self, stage: int) -> int:
        """Input dimension of hidden layer `stage` (1-based)."""
        return self.input_dim if stage == 1 else self.hidden_widths[stage - 2]


@dataclass(frozen=True, eq=False)
class Mlp:
    """
    Multilayer perceptron: hidden layers in input-to-output order plus an output head.

    Construction rejects any layer chain whose dimensions do not line up.
    """
    layers: Tuple[LayerParams, ...]
    head: OutputHead
    hidden_activation: ActivationKind = ActivationKind.RELU

    def __post_init__(self):
        layers = tuple(self.layers)
        if not layers:
            raise ContractViolation("an Mlp needs at least one hidden layer")
        for k in range(1, len(layers)):
            if layers[k].in_dim != layers[k - 1].out_dim:
                raise ContractViolation(
                    f"layer {k + 1} expects {layers[k].in_dim} inputs "
                    f"but layer {k} produces {layers[k - 1].out_dim}"
                )
        if self.head.in_dim != layers[-1].out_dim:
            raise ContractViolation(
                f"head expects {self.head.in_dim} inputs "
                f"but the last layer produces {layers[-1].out_dim}"
            )
        object.__setattr__(self, "layers", layers)
        object.__setattr__(self, "hidden_activation", ActivationKind(self.hidden_activation))

    @property
    def input_dim(self) -> int:
        return self.layers[0].in_dim

    @property
    def depth(self) -> int:
        return len(self.layers)

    @property
    def architecture(self) -> Architecture:
        return Architecture(
            input_dim=self.input_dim,
            hidden_widths=tuple(layer.out_dim for layer in self.layers),
            hidden_activation=self.hidden_activation,
            output_activation=self.head.activation,
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Mlp):
            return NotImplemented
        return (
            self.hidden_activation is other.hidden_activation
            and self.layers == other.layers
            and self.head == other.head
        )


def affine(weights: np.ndarray, bias: np.ndarray, inputs: np.ndarray) -> np.ndarray:
    """
    Compute weights . x + bias for a single vector or for each row of a matrix.

    Input columns are accumulated one at a time in index order, so a row of a
    batch and the same vector evaluated alone round identically.
    """
    out = np.empty(inputs.shape[:-1] + (weights.shape[0],), dtype=np.float64)
    out[...] = bias
    for j in range(weights.shape[1]):
        out += inputs[..., j, None] * weights[:, j]
    return out


def _as_inputs(inputs: ArrayLike, expected_dim: int, what: str) -> np.ndarray:
    x = np.asarray(inputs, dtype=np.float64)
    if x.ndim not in (1, 2):
        raise ContractViolation(f"{what} input must be a vector or a matrix of rows, got shape {x.shape}")
    if x.shape[-1] != expected_dim:
        raise ContractViolation(f"{what} expects input length {expected_dim}, got {x.shape[-1]}")
    return x


def layer_forward(layer: LayerParams, act: ActivationKind, inputs: ArrayLike) -> np.ndarray:
    """
    Apply one hidden layer: act(weights . input + bias).

    Args:
        layer: Layer parameters
        act: Activation applied elementwise
        inputs: Vector of length in_dim, or a matrix with one sample per row

    Returns:
        Activations of length out_dim (per row for matrix input)

    Raises:
        ContractViolation: If the input length differs from the layer's in_dim
    """
    x = _as_inputs(inputs, layer.in_dim, "layer")
    return act.apply(affine(layer.weights, layer.bias, x))


def head_forward(head: OutputHead, inputs: ArrayLike) -> Union[float, np.ndarray]:
    """
    Apply the output node: activation(dot(weights, input) + bias).

    Returns a float for a vector input and a 1-D array for a matrix input.
    """
    x = _as_inputs(inputs, head.in_dim, "head")
    pre = affine(head.weights[None, :], np.array([head.bias]), x)[..., 0]
    out = head.activation.apply(pre)
    return float(out) if x.ndim == 1 else out


def hidden_activations(net: Mlp, inputs: ArrayLike, depth: int) -> np.ndarray:
    """
    Activations after the first `depth` hidden layers.

    Raises:
        ContractViolation: If depth is outside 1..number of layers
    """
    if not 1 <= depth <= net.depth:
        raise ContractViolation(f"depth must be in 1..{net.depth}, got {depth}")
    x = _as_inputs(inputs, net.input_dim, "network")
    for layer in net.layers[:depth]:
        x = layer_forward(layer, net.hidden_activation, x)
    return x


def mlp_forward(net: Mlp, inputs: ArrayLike) -> Union[float, np.ndarray]:
    """Full forward pass; a float for a vector input, a 1-D array for a matrix."""
    return head_forward(net.head, hidden_activations(net, inputs, net.depth))


def predict(net: Mlp, inputs: ArrayLike) -> np.ndarray:
    """Batched forward pass over a matrix with one sample per row."""
    x = np.asarray(inputs, dtype=np.float64)
    if x.ndim != 2:
        raise ContractViolation(f"predict expects a matrix of inputs, got shape {x.shape}")
    return mlp_forward(net, x)


def init_layer(in_dim: int, out_dim: int, rng: Prng) -> LayerParams:
    """Glorot-uniform weights, zero bias."""
    return LayerParams(rng.glorot_uniform(in_dim, out_dim, (out_dim, in_dim)), np.zeros(out_dim))


def init_head(width: int, activation: ActivationKind, rng: Prng) -> OutputHead:
    return OutputHead(rng.glorot_uniform(width, 1, (width,)), 0.0, activation)


def init_mlp(arch: Architecture, rng: Prng) -> Mlp:
    """
    Draw a fresh network: layers in input-to-output order, then the head.
    """
    layers = []
    in_dim = arch.input_dim
    for width in arch.hidden_widths:
        layers.append(init_layer(in_dim, width, rng))
        in_dim = width
    head = init_head(in_dim, arch.output_activation, rng)
    return Mlp(tuple(layers), head, arch.hidden_activation)


def parameter_arrays(net: Mlp) -> List[np.ndarray]:
    """
    Writable copies of every parameter in the canonical order
    [W1, b1, ..., WL, bL, head weights, head bias (length 1)].
    """
    arrays: List[np.ndarray] = []
    for layer in net.layers:
        arrays.append(layer.weights.copy())
        arrays.append(layer.bias.copy())
    arrays.append(net.head.weights.copy())
    arrays.append(np.array([net.head.bias]))
    return arrays


def with_parameter_arrays(net: Mlp, arrays: Sequence[np.ndarray]) -> Mlp:
    """Rebuild `net` with new parameter values given in parameter_arrays order."""
    expected = 2 * net.depth + 2
    if len(arrays) != expected:
        raise ContractViolation(f"expected {expected} parameter arrays, got {len(arrays)}")
    layers = tuple(
        LayerParams(arrays[2 * k], arrays[2 * k + 1]) for k in range(net.depth)
    )
    head = OutputHead(arrays[-2], float(arrays[-1][0]), net.head.activation)
    rebuilt = Mlp(layers, head, net.hidden_activation)
    for old, new in zip(net.layers, rebuilt.layers):
        if old.weights.shape != new.weights.shape:
            raise ContractViolation(
                f"parameter shape {new.weights.shape} does not match {old.weights.shape}"
            )
    return rebuilt


def param_count_full(arch: Architecture) -> int:
    """Unknowns of the full optimization problem: every layer plus the head."""
    total = 0
    in_dim = arch.input_dim
    for width in arch.hidden_widths:
        total += in_dim * width + width
        in_dim = width
    return total + in_dim + 1


def param_count_stage(arch: Architecture, stage: int) -> int:
    """
    Unknowns of sequential stage `stage`: that layer plus its temporary head.

    Raises:
        ContractViolation: If stage is outside 1..L
    """
    if not 1 <= stage <= arch.depth:
        raise ContractViolation(f"stage must be in 1..{arch.depth}, got {stage}")
    in_dim = arch.layer_input_dim(stage)
    width = arch.hidden_widths[stage - 1]
    return in_dim * width + width + width + 1


@dataclass(frozen=True)
class ProblemSizes:
    """Optimization problem sizes of the full and the sequential strategy."""
    full: int
    stages: Tuple[int, ...]

    @property
    def ratios(self) -> Tuple[float, ...]:
        return tuple(size / self.full for size in self.stages)

    @property
    def discarded_head_params(self) -> int:
        return sum(self.stages) - self.full


def problem_size_table(arch: Architecture) -> ProblemSizes:
    return ProblemSizes(
        full=param_count_full(arch),
        stages=tuple(param_count_stage(arch, k) for k in range(1, arch.depth + 1)),
    )
