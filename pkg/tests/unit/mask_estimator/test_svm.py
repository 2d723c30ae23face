"""Unit tests for the linear SVM trainer."""

import numpy as np
import pytest

from mdt_workbench.layer.errors import ConstantModelRequired, InputValidationError
from mdt_workbench.mask_estimator.svm import constant_model, svm_objective, train_svm
from mdt_workbench.models.estimator import SvmTrainConfig


def overlapping_classes(rng: np.random.Generator, n: int = 20) -> tuple[np.ndarray, np.ndarray]:
    samples = np.concatenate([rng.normal(-1.0, 1.0, n), rng.normal(1.0, 1.0, n)])[:, None]
    labels = np.r_[np.zeros(n, dtype=bool), np.ones(n, dtype=bool)]
    return samples, labels


@pytest.mark.unit
class TestTrainSvm:
    """Test hinge-loss training."""

    def test_separable(self) -> None:
        """Test a separable set is classified correctly."""
        samples = np.array([[-2.0, 0.0], [-1.0, 0.5], [1.0, -0.5], [2.0, 0.0]])
        labels = np.array([False, False, True, True])
        model = train_svm(samples, labels)
        assert model.predict(samples).tolist() == labels.tolist()
        assert model.n_samples == 4
        assert model.positive_fraction == 0.5

    def test_objective_near_grid_optimum(self, rng: np.random.Generator) -> None:
        """Test the trained objective is close to the best (w, b) on a fine grid."""
        samples, labels = overlapping_classes(rng)
        signs = np.where(labels, 1.0, -1.0)
        cfg = SvmTrainConfig(lam=1.0, min_steps=5000)
        model = train_svm(samples, labels, cfg)

        grid = np.linspace(-2.0, 2.0, 201)
        w, b = np.meshgrid(grid, grid, indexing="ij")
        margins = signs * (w[..., None] * samples[:, 0] + b[..., None])
        objectives = 0.5 * w**2 + np.maximum(0.0, 1.0 - margins).mean(axis=-1)
        best = float(objectives.min())

        assert model.objective == pytest.approx(svm_objective(model.weights, model.bias, samples, signs, 1.0))
        assert model.objective <= best + 0.01

    def test_history_never_increases(self, rng: np.random.Generator) -> None:
        """Test the kept objective is monotone over epochs."""
        samples, labels = overlapping_classes(rng)
        history = train_svm(samples, labels, SvmTrainConfig(epochs=5, min_steps=10)).objective_history
        assert history[0] == pytest.approx(1.0)
        assert all(b <= a for a, b in zip(history, history[1:], strict=False))

    def test_xor_does_not_diverge(self) -> None:
        """Test an inseparable set keeps an objective no worse than w = 0."""
        samples = np.array([[1.0, 1.0], [-1.0, -1.0], [1.0, -1.0], [-1.0, 1.0]])
        labels = np.array([True, True, False, False])
        model = train_svm(samples, labels, SvmTrainConfig(min_steps=200))
        assert model.objective <= 1.0

    def test_seed_repeatable(self, rng: np.random.Generator) -> None:
        """Test equal seeds give identical models."""
        samples, labels = overlapping_classes(rng)
        cfg = SvmTrainConfig(seed=11, min_steps=100)
        first, second = train_svm(samples, labels, cfg), train_svm(samples, labels, cfg)
        assert np.array_equal(first.weights, second.weights)
        assert first.bias == second.bias

    @pytest.mark.parametrize("label", [True, False])
    def test_single_class(self, label: bool) -> None:
        """Test one-label data asks for a constant model."""
        with pytest.raises(ConstantModelRequired) as info:
            train_svm(np.zeros((3, 2)), np.full(3, label))
        assert info.value.label is label

    def test_invalid_inputs(self) -> None:
        """Test shape, size and finiteness checks."""
        with pytest.raises(InputValidationError):
            train_svm(np.zeros((1, 2)), np.array([True]))
        with pytest.raises(InputValidationError):
            train_svm(np.zeros((3, 2)), np.array([True, False]))
        with pytest.raises(InputValidationError, match="non-finite"):
            train_svm(np.array([[np.nan], [1.0]]), np.array([True, False]))

    def test_lambda_alias(self) -> None:
        """Test the config accepts the 'lambda' key."""
        assert SvmTrainConfig.model_validate({"lambda": 0.5}).lam == 0.5

    def test_constant_model(self) -> None:
        """Test constant predictors answer their label everywhere."""
        samples = np.random.default_rng(0).normal(size=(5, 3))
        assert constant_model(3, True).predict(samples).all()
        assert not constant_model(3, False).predict(samples).any()
