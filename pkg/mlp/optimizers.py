"""
SGD and Adam update rules over lists of parameter arrays.

State is an immutable value threaded through successive calls, so a training
run owns its state outright and nothing is shared between runs.
"""

from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from core.errors import ContractViolation
from mlp.hyperparams import Hyperparams, OptimizerKind


@dataclass(frozen=True)
class OptimizerState:
    """Timestep and Adam moment estimates (empty for SGD)."""
    step: int = 0
    first_moment: Tuple[np.ndarray, ...] = ()
    second_moment: Tuple[np.ndarray, ...] = ()


def _sgd_update(params, grads, state: OptimizerState, hp: Hyperparams):
    updated = [p - hp.learning_rate * g for p, g in zip(params, grads)]
    return updated, OptimizerState(step=state.step + 1)


def _adam_update(params, grads, state: OptimizerState, hp: Hyperparams):
    step = state.step + 1
    first = state.first_moment or tuple(np.zeros_like(p) for p in params)
    second = state.second_moment or tuple(np.zeros_like(p) for p in params)

    bias_correction1 = 1.0 - hp.adam_beta1 ** step
    bias_correction2 = 1.0 - hp.adam_beta2 ** step

    updated, new_first, new_second = [], [], []
    for p, g, m, v in zip(params, grads, first, second):
        m = hp.adam_beta1 * m + (1.0 - hp.adam_beta1) * g
        v = hp.adam_beta2 * v + (1.0 - hp.adam_beta2) * (g * g)
        m_hat = m / bias_correction1
        v_hat = v / bias_correction2
        updated.append(p - hp.learning_rate * m_hat / (np.sqrt(v_hat) + hp.adam_epsilon))
        new_first.append(m)
        new_second.append(v)
    return updated, OptimizerState(step, tuple(new_first), tuple(new_second))


_UPDATE_RULES: Dict[OptimizerKind, Callable] = {
    OptimizerKind.SGD: _sgd_update,
    OptimizerKind.ADAM: _adam_update,
}


def optimizer_step(
    params: Sequence[np.ndarray],
    grads: Sequence[np.ndarray],
    state: Optional[OptimizerState],
    hp: Hyperparams,
) -> Tuple[List[np.ndarray], OptimizerState]:
    """
    Apply one optimizer update.

    Args:
        params: Parameter arrays
        grads: Gradient arrays, same order and shapes as params
        state: State returned by the previous call, or None on the first call
        hp: Optimizer kind, learning rate and Adam constants

    Returns:
        New parameter arrays and the new optimizer state

    Raises:
        ContractViolation: If params and grads do not line up
    """
    if len(params) != len(grads):
        raise ContractViolation(f"{len(params)} parameter arrays but {len(grads)} gradient arrays")
    params = [np.asarray(p, dtype=np.float64) for p in params]
    grads = [np.asarray(g, dtype=np.float64) for g in grads]
    for index, (p, g) in enumerate(zip(params, grads)):
        if p.shape != g.shape:
            raise ContractViolation(f"array {index}: parameter shape {p.shape} vs gradient shape {g.shape}")
    state = state or OptimizerState()
    return _UPDATE_RULES[hp.optimizer](params, grads, state, hp)
