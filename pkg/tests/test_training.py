"""
Training strategy tests.

This module covers the epoch loop, full training, sequential layer-wise
training, stage composition, cached-activation consistency, determinism and
divergence handling.
"""

import allure
import numpy as np
import pytest
from loguru import logger

from core.errors import ContractViolation, DivergenceError
from core.prng import Prng
from mlp.data import Dataset, ProvenanceKind, map_through
from mlp.gradients import loss
from mlp.hyperparams import Hyperparams, LossNorm, OptimizerKind
from mlp.network import (
    ActivationKind,
    Architecture,
    Mlp,
    head_forward,
    hidden_activations,
    init_mlp,
    mlp_forward,
    predict,
)
from mlp.train import Strategy, evaluate, train_full, train_sequential, train_stage, train_strategy

IDENTITY = ActivationKind.IDENTITY


def _linear_arch(input_dim: int, widths: tuple) -> Architecture:
    return Architecture(input_dim=input_dim, hidden_widths=widths, hidden_activation=IDENTITY)


@allure.epic("Training")
@allure.feature("Stage Loop")
class TestTrainStage:
    """Test class for the mini-batch epoch loop."""

    @allure.story("Bookkeeping")
    @allure.title("Zero learning rate keeps parameters and gives flat curves")
    @allure.severity("high")
    @pytest.mark.smoke
    @pytest.mark.training
    @pytest.mark.parametrize("optimizer", list(OptimizerKind))
    def test_zero_learning_rate(self, small_regression, arch_3x3, optimizer):
        train, val = small_regression
        net = init_mlp(arch_3x3, Prng(3))
        hp = Hyperparams(optimizer=optimizer, learning_rate=0.0, epochs=4, batch_size=10)

        report = train_stage(net, train, val, hp, Prng(3))

        assert Mlp(report.layers, report.head, net.hidden_activation) == net
        assert len(set(report.train_loss)) == 1
        assert len(set(report.val_error)) == 1

    @allure.story("Bookkeeping")
    @allure.title("One train loss and one validation error per epoch")
    @allure.severity("medium")
    @pytest.mark.smoke
    @pytest.mark.training
    def test_curve_lengths(self, small_regression, arch_3x3):
        train, val = small_regression
        report = train_stage(init_mlp(arch_3x3, Prng(1)), train, val, Hyperparams(epochs=7), Prng(1))
        assert len(report.train_loss) == 7
        assert len(report.val_error) == 7
        assert report.final_val_error == report.val_error[-1]

    @allure.story("Closed Form")
    @allure.title("Width-1 identity network reaches the least-squares line")
    @allure.severity("critical")
    @pytest.mark.regression
    @pytest.mark.training
    def test_linear_regression_oracle(self):
        u = np.linspace(-1.0, 1.0, 21)
        z = 2.0 * u + 0.5 + 0.1 * np.sin(7.0 * u)
        data = Dataset(u[:, None], z)
        slope, intercept = np.polyfit(u, z, 1)

        hp = Hyperparams(
            optimizer=OptimizerKind.SGD, learning_rate=0.05, batch_size=len(u), epochs=2000, loss=LossNorm.L2
        )
        report = train_full(_linear_arch(1, (1,)), data, data, hp)
        net = report.final_model

        fitted_intercept = mlp_forward(net, [0.0])
        fitted_slope = mlp_forward(net, [1.0]) - fitted_intercept
        logger.info(f"Fitted {fitted_slope:.6f} u + {fitted_intercept:.6f}, oracle {slope:.6f} u + {intercept:.6f}")
        assert fitted_slope == pytest.approx(slope, abs=1e-3)
        assert fitted_intercept == pytest.approx(intercept, abs=1e-3)

    @allure.story("Contracts")
    @allure.title("Empty or mismatched datasets are rejected")
    @allure.severity("high")
    @pytest.mark.negative
    @pytest.mark.training
    def test_dataset_contracts(self, small_regression, arch_3x3):
        train, val = small_regression
        empty = Dataset(np.zeros((0, 2)), np.zeros(0))
        with pytest.raises(ContractViolation):
            train_full(arch_3x3, empty, val, Hyperparams(epochs=1))
        with pytest.raises(ContractViolation):
            train_sequential(arch_3x3, train, empty, Hyperparams(epochs=1))
        with pytest.raises(ContractViolation):
            train_full(Architecture(input_dim=3, hidden_widths=(2,)), train, val, Hyperparams(epochs=1))


@allure.epic("Training")
@allure.feature("Full Training")
class TestTrainFull:
    """Test class for joint training of every layer."""

    @allure.story("Problem Size")
    @allure.title("Full training records one problem of 37 unknowns")
    @allure.severity("critical")
    @pytest.mark.smoke
    @pytest.mark.training
    def test_problem_size(self, small_regression, arch_3x3):
        train, val = small_regression
        report = train_full(arch_3x3, train, val, Hyperparams(epochs=2))
        assert report.strategy is Strategy.FULL
        assert report.problem_sizes == (37,)
        assert len(report.stages) == 1
        assert not report.stages[0].head_discarded

    @allure.story("Initialization")
    @allure.title("Zero learning rate returns the seeded initialization")
    @allure.severity("high")
    @pytest.mark.regression
    @pytest.mark.training
    def test_zero_lr_returns_initialization(self, small_regression, arch_3x3):
        train, val = small_regression
        hp = Hyperparams(learning_rate=0.0, epochs=3, seed=42)
        report = train_full(arch_3x3, train, val, hp)
        assert report.final_model == init_mlp(arch_3x3, Prng(42))

    @allure.story("Convergence")
    @allure.title("Identity chain fits z = u1 almost exactly")
    @allure.severity("high")
    @pytest.mark.regression
    @pytest.mark.training
    def test_separable_task(self, dataset_factory):
        target = lambda x: x[:, 0]  # noqa: E731
        train = dataset_factory(40, 2, seed=5, target_fn=target)
        val = dataset_factory(20, 2, seed=6, target_fn=target)
        hp = Hyperparams(
            optimizer=OptimizerKind.SGD, learning_rate=0.05, batch_size=len(train), epochs=3000, loss=LossNorm.L2
        )
        report = train_full(_linear_arch(2, (2,)), train, val, hp)
        assert report.final_val_error < 1e-4
        assert evaluate(report.final_model, val, LossNorm.L2) == report.final_val_error


@allure.epic("Training")
@allure.feature("Sequential Training")
class TestTrainSequential:
    """Test class for greedy layer-wise training."""

    @allure.story("Problem Size")
    @allure.title("Sequential training records 13, 16, 16 unknowns")
    @allure.severity("critical")
    @pytest.mark.smoke
    @pytest.mark.training
    def test_problem_sizes(self, small_regression, arch_3x3):
        train, val = small_regression
        report = train_sequential(arch_3x3, train, val, Hyperparams(epochs=2))
        assert report.strategy is Strategy.SEQUENTIAL
        assert report.problem_sizes == (13, 16, 16)
        assert [stage.stage_index for stage in report.stages] == [1, 2, 3]
        assert [stage.head_discarded for stage in report.stages] == [True, True, False]
        assert report.final_model.architecture == arch_3x3

    @allure.story("Degenerate Depth")
    @allure.title("One hidden layer: sequential equals full")
    @allure.severity("high")
    @pytest.mark.regression
    @pytest.mark.training
    def test_single_layer_matches_full(self, small_regression):
        train, val = small_regression
        arch = Architecture(input_dim=2, hidden_widths=(5,))
        hp = Hyperparams(epochs=5, batch_size=8, seed=11)
        full = train_full(arch, train, val, hp)
        sequential = train_sequential(arch, train, val, hp)

        assert sequential.final_model == full.final_model
        assert sequential.stages[0].train_loss == full.stages[0].train_loss
        assert sequential.stages[0].val_error == full.stages[0].val_error

    @allure.story("Composition")
    @allure.title("Assembled model equals the last head on cached activations")
    @allure.severity("critical")
    @pytest.mark.regression
    @pytest.mark.training
    def test_stage_composition_exact(self, small_regression, arch_3x3):
        train, val = small_regression
        report = train_sequential(arch_3x3, train, val, Hyperparams(epochs=5))
        model = report.final_model
        last_head = report.stages[-1].head

        for row in val.inputs:
            cached = hidden_activations(model, row, model.depth)
            assert mlp_forward(model, row) == head_forward(last_head, cached)
        batched = head_forward(last_head, hidden_activations(model, val.inputs, model.depth))
        assert predict(model, val.inputs).tobytes() == batched.tobytes()

    @allure.story("Cache Consistency")
    @allure.title("Each stage trained on the exact activations of the frozen prefix")
    @allure.severity("critical")
    @pytest.mark.regression
    @pytest.mark.training
    def test_cache_consistency(self, small_regression, arch_3x3):
        train, val = small_regression
        hp = Hyperparams(epochs=4)
        report = train_sequential(arch_3x3, train, val, hp)
        model = report.final_model

        for k in range(1, model.depth):
            cached = map_through(train, model.layers[:k], model.hidden_activation)
            assert cached.provenance.kind is ProvenanceKind.ACTIVATIONS
            assert cached.provenance.stage == k
            assert cached.inputs.tobytes() == hidden_activations(model, train.inputs, k).tobytes()

            stage = report.stages[k]
            stage_net = Mlp((stage.trained_layer,), stage.head, model.hidden_activation)
            assert loss(predict(stage_net, cached.inputs), cached.targets, hp.loss) == stage.train_loss[-1]

    @allure.story("Scope Isolation")
    @allure.title("Frozen layers are untouched by later stages")
    @allure.severity("critical")
    @pytest.mark.regression
    @pytest.mark.training
    def test_scope_isolation(self, small_regression, arch_3x3):
        train, val = small_regression
        report = train_sequential(arch_3x3, train, val, Hyperparams(epochs=4))
        for k, stage in enumerate(report.stages):
            assert report.final_model.layers[k] == stage.trained_layer
            assert not stage.trained_layer.weights.flags.writeable

        with allure.step("Training a stage on mapped data leaves the prefix bit-identical"):
            first = report.final_model.layers[0]
            before = (first.weights.tobytes(), first.bias.tobytes())
            mapped_train = map_through(train, [first], arch_3x3.hidden_activation)
            mapped_val = map_through(val, [first], arch_3x3.hidden_activation)
            stage_arch = Architecture(input_dim=3, hidden_widths=(3,))
            train_stage(init_mlp(stage_arch, Prng(2)), mapped_train, mapped_val, Hyperparams(epochs=3), Prng(2))
            assert (first.weights.tobytes(), first.bias.tobytes()) == before


@allure.epic("Training")
@allure.feature("Reproducibility")
class TestDeterminismAndDivergence:
    """Test class for seeded determinism and divergence reporting."""

    @allure.story("Determinism")
    @allure.title("Identical inputs give bit-identical reports")
    @allure.severity("critical")
    @pytest.mark.regression
    @pytest.mark.training
    @pytest.mark.parametrize("strategy", list(Strategy))
    def test_determinism(self, small_regression, arch_3x3, strategy):
        train, val = small_regression
        hp = Hyperparams(epochs=6, batch_size=7, seed=123)
        first = train_strategy(strategy, arch_3x3, train, val, hp)
        second = train_strategy(strategy, arch_3x3, train, val, hp)

        assert first.final_model == second.final_model
        for a, b in zip(first.stages, second.stages):
            assert np.array(a.train_loss).tobytes() == np.array(b.train_loss).tobytes()
            assert np.array(a.val_error).tobytes() == np.array(b.val_error).tobytes()

        other = train_strategy(strategy, arch_3x3, train, val, hp.model_copy(update={"seed": 124}))
        assert other.final_model != first.final_model

    @allure.story("Divergence")
    @allure.title("Exploding SGD raises a divergence error with its epoch and stage")
    @allure.severity("high")
    @pytest.mark.negative
    @pytest.mark.training
    @pytest.mark.parametrize("strategy", list(Strategy))
    def test_divergence(self, small_regression, strategy):
        train, val = small_regression
        hp = Hyperparams(optimizer=OptimizerKind.SGD, learning_rate=1e6, epochs=50, loss=LossNorm.L2)
        with pytest.raises(DivergenceError) as error:
            train_strategy(strategy, _linear_arch(2, (4, 4)), train, val, hp)

        assert error.value.stage == 1
        assert 1 <= error.value.epoch <= 50
        assert "diverged" in str(error.value)
