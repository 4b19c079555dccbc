"""
Pytest configuration and fixtures for the layer-wise training test suite.

This module provides logging configuration, shared architectures, a seeded
network factory and small deterministic datasets for the entire test suite.
"""

from pathlib import Path
from typing import Callable, Generator

import numpy as np
import pytest
from loguru import logger

from core.prng import Prng
from mlp.data import Dataset
from mlp.network import Architecture, LayerParams, Mlp, OutputHead, init_mlp


def pytest_configure(config) -> None:
    """
    Configure loguru sinks for the test run.

    Args:
        config: Pytest configuration object
    """
    logger.remove()

    from core.config_loader import settings

    Path("logs").mkdir(exist_ok=True)
    Path("reports").mkdir(exist_ok=True)

    logger.add(
        "logs/test_execution.log",
        level=settings.logging.level,
        format=settings.logging.format,
        rotation="10 MB",
        retention="30 days",
        compression="zip",
    )
    logger.add(
        lambda msg: print(msg, end=""),
        level="WARNING",
        format="<green>{time:HH:mm:ss}</green> | <level>{level}</level> | {message}",
        colorize=True,
    )
    logger.info("Test suite initialized")


@pytest.fixture(scope="function", autouse=True)
def test_logging(request) -> Generator[None, None, None]:
    """
    Automatic per-test logging.

    Args:
        request: Pytest request object
    """
    test_class = request.node.cls.__name__ if request.node.cls else "TestFunction"
    logger.info(f"Starting test: {test_class}::{request.node.name}")
    yield
    logger.info(f"Completed test: {test_class}::{request.node.name}")


@pytest.fixture(scope="session")
def arch_3x3() -> Architecture:
    """Two inputs, three hidden layers of three nodes, one output."""
    return Architecture(input_dim=2, hidden_widths=(3, 3, 3))


@pytest.fixture(scope="session")
def make_net() -> Callable[..., Mlp]:
    """
    Factory for seeded networks with randomized (nonzero) biases.

    Returns:
        Callable (arch, seed) -> Mlp
    """
    def _make(arch: Architecture, seed: int = 0) -> Mlp:
        rng = Prng(seed)
        net = init_mlp(arch, rng)
        layers = []
        for layer in net.layers:
            layers.append(LayerParams(layer.weights, rng.uniform_array(-0.5, 0.5, (layer.out_dim,))))
        head = OutputHead(net.head.weights, rng.uniform(-0.5, 0.5), net.head.activation)
        return Mlp(tuple(layers), head, net.hidden_activation)

    return _make


def random_dataset(n: int, input_dim: int, seed: int, target_fn=None) -> Dataset:
    """Uniform inputs on [-1, 1]; targets from target_fn(inputs) or uniform noise."""
    rng = Prng(seed)
    inputs = rng.uniform_array(-1.0, 1.0, (n, input_dim))
    targets = target_fn(inputs) if target_fn is not None else rng.uniform_array(-1.0, 1.0, (n,))
    return Dataset(inputs, targets)


@pytest.fixture(scope="session")
def dataset_factory() -> Callable[..., Dataset]:
    """Factory for seeded uniform datasets, see random_dataset."""
    return random_dataset


@pytest.fixture(scope="function")
def small_regression() -> tuple:
    """Train/validation pair for z* = sin(u1) + 0.5 u2 on 2 features."""
    fn = lambda x: np.sin(x[:, 0]) + 0.5 * x[:, 1]  # noqa: E731
    return random_dataset(48, 2, seed=11, target_fn=fn), random_dataset(16, 2, seed=12, target_fn=fn)
