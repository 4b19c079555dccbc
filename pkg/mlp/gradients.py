"""
Loss, reverse-mode gradients and the central finite-difference oracle.
"""

from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from core.errors import ContractViolation
from mlp.hyperparams import LossNorm
from mlp.network import Mlp, affine, parameter_arrays, predict, with_parameter_arrays


@dataclass(frozen=True, eq=False)
class Gradients:
    """Gradient arrays laid out like the Mlp they belong to."""
    layer_weights: Tuple[np.ndarray, ...]
    layer_biases: Tuple[np.ndarray, ...]
    head_weights: np.ndarray
    head_bias: float

    @classmethod
    def from_arrays(cls, arrays: Sequence[np.ndarray]) -> "Gradients":
        """Build from arrays in network.parameter_arrays order."""
        depth = (len(arrays) - 2) // 2
        return cls(
            layer_weights=tuple(np.asarray(arrays[2 * k]) for k in range(depth)),
            layer_biases=tuple(np.asarray(arrays[2 * k + 1]) for k in range(depth)),
            head_weights=np.asarray(arrays[-2]),
            head_bias=float(np.asarray(arrays[-1]).reshape(-1)[0]),
        )

    def as_arrays(self) -> List[np.ndarray]:
        arrays: List[np.ndarray] = []
        for weights, bias in zip(self.layer_weights, self.layer_biases):
            arrays.extend([weights, bias])
        arrays.extend([self.head_weights, np.array([self.head_bias])])
        return arrays

    def flat(self) -> np.ndarray:
        return np.concatenate([array.reshape(-1) for array in self.as_arrays()])

    def matches_shapes_of(self, net: Mlp) -> bool:
        return [a.shape for a in self.as_arrays()] == [p.shape for p in parameter_arrays(net)]


def loss(predictions: Sequence[float], targets: Sequence[float], norm: LossNorm) -> float:
    """
    Mean residual norm: l1 -> mean |z - z*|, l2 -> mean (z - z*)^2.

    Raises:
        ContractViolation: On empty input or length mismatch
    """
    z = np.asarray(predictions, dtype=np.float64).reshape(-1)
    target = np.asarray(targets, dtype=np.float64).reshape(-1)
    if z.size == 0:
        raise ContractViolation("loss of an empty batch is undefined")
    if z.size != target.size:
        raise ContractViolation(f"{z.size} predictions but {target.size} targets")
    residual = z - target
    if LossNorm(norm) is LossNorm.L1:
        return float(np.mean(np.abs(residual)))
    return float(np.mean(residual * residual))


def _check_batch(net: Mlp, inputs, targets) -> Tuple[np.ndarray, np.ndarray]:
    x = np.asarray(inputs, dtype=np.float64)
    z_star = np.asarray(targets, dtype=np.float64).reshape(-1)
    if x.ndim != 2 or x.shape[0] == 0:
        raise ContractViolation(f"batch inputs must be a nonempty matrix, got shape {x.shape}")
    if x.shape[1] != net.input_dim:
        raise ContractViolation(f"network expects {net.input_dim} input features, batch has {x.shape[1]}")
    if z_star.size != x.shape[0]:
        raise ContractViolation(f"{x.shape[0]} batch inputs but {z_star.size} targets")
    return x, z_star


def backprop(net: Mlp, inputs, targets, norm: LossNorm) -> Gradients:
    """
    Exact gradient of `loss` over the batch with respect to every parameter.

    Args:
        net: Network to differentiate
        inputs: Matrix with one sample per row
        targets: One target per row
        norm: Residual norm of the loss

    Returns:
        Gradients in the network's parameter layout
    """
    x, z_star = _check_batch(net, inputs, targets)
    n = x.shape[0]
    act = net.hidden_activation

    activations = [x]
    pre_activations = []
    for layer in net.layers:
        pre = affine(layer.weights, layer.bias, activations[-1])
        pre_activations.append(pre)
        activations.append(act.apply(pre))

    head = net.head
    head_pre = affine(head.weights[None, :], np.array([head.bias]), activations[-1])[:, 0]
    residual = head.activation.apply(head_pre) - z_star
    if LossNorm(norm) is LossNorm.L1:
        d_output = np.sign(residual) / n
    else:
        d_output = 2.0 * residual / n

    d_head_pre = d_output * head.activation.derivative(head_pre)
    head_weights_grad = activations[-1].T @ d_head_pre
    head_bias_grad = float(np.sum(d_head_pre))

    weight_grads: List[np.ndarray] = [None] * net.depth
    bias_grads: List[np.ndarray] = [None] * net.depth
    upstream = np.outer(d_head_pre, head.weights)
    for k in range(net.depth - 1, -1, -1):
        d_pre = upstream * act.derivative(pre_activations[k])
        weight_grads[k] = d_pre.T @ activations[k]
        bias_grads[k] = np.sum(d_pre, axis=0)
        upstream = d_pre @ net.layers[k].weights

    return Gradients(tuple(weight_grads), tuple(bias_grads), head_weights_grad, head_bias_grad)


def finite_diff_grad(net: Mlp, inputs, targets, norm: LossNorm, epsilon: float = 1e-5) -> Gradients:
    """
    Central-difference gradient (L(p + eps) - L(p - eps)) / (2 eps), one parameter at a time.

    Only meant as an oracle for backprop; cost is two forward passes per parameter.
    """
    if not epsilon > 0.0:
        raise ContractViolation(f"epsilon must be positive, got {epsilon}")
    x, z_star = _check_batch(net, inputs, targets)

    arrays = parameter_arrays(net)
    grads = [np.zeros_like(array) for array in arrays]
    for array, grad in zip(arrays, grads):
        for i in range(array.size):
            original = array.flat[i]
            array.flat[i] = original + epsilon
            plus = loss(predict(with_parameter_arrays(net, arrays), x), z_star, norm)
            array.flat[i] = original - epsilon
            minus = loss(predict(with_parameter_arrays(net, arrays), x), z_star, norm)
            array.flat[i] = original
            grad.flat[i] = (plus - minus) / (2.0 * epsilon)
    return Gradients.from_arrays(grads)


def max_relative_error(analytic: Gradients, numeric: Gradients, floor: float = 1e-3) -> float:
    """
    max |a - b| / max(|a|, |b|, floor) over every parameter.

    The floor keeps components that are zero up to rounding from dominating.
    """
    a = analytic.flat()
    b = numeric.flat()
    if a.shape != b.shape:
        raise ContractViolation(f"gradient sizes differ: {a.size} vs {b.size}")
    scale = np.maximum(np.maximum(np.abs(a), np.abs(b)), floor)
    return float(np.max(np.abs(a - b) / scale))
