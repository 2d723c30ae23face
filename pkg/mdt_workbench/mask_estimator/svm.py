"""
MDT Workbench - Linear SVM Trainer

Regularized hinge loss minimized by deterministic, epoch-shuffled
mini-batch subgradient descent with iterate averaging.
"""

import math

import numpy as np

from mdt_workbench.layer.errors import ConstantModelRequired, InputValidationError
from mdt_workbench.layer.logger import get_logger
from mdt_workbench.models.estimator import LinearSvm, SvmTrainConfig

logger = get_logger(__name__)


def svm_objective(weights: np.ndarray, bias: float, samples: np.ndarray, signs: np.ndarray, lam: float) -> float:
    """lam/2 ||w||^2 + mean hinge loss; ``signs`` are +1 (reliable) / -1."""
    margins = signs * (samples @ weights + bias)
    return float(0.5 * lam * weights @ weights + np.maximum(0.0, 1.0 - margins).mean())


def _check_inputs(samples: np.ndarray, labels: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    samples = np.asarray(samples, dtype=np.float64)
    labels = np.asarray(labels, dtype=bool)
    if samples.ndim != 2 or labels.shape != (samples.shape[0],):
        raise InputValidationError(f"samples {samples.shape} and labels {labels.shape} disagree")
    if samples.shape[0] < 2:
        raise InputValidationError(f"need at least 2 training samples, got {samples.shape[0]}")
    if not np.all(np.isfinite(samples)):
        raise InputValidationError("training samples contain non-finite values")
    if labels.all() or not labels.any():
        raise ConstantModelRequired(bool(labels[0]))
    return samples, labels


def train_svm(samples: np.ndarray, labels: np.ndarray, cfg: SvmTrainConfig | None = None) -> LinearSvm:
    """Fit a linear SVM on (samples, labels); label True means reliable.

    Steps follow eta_t = eta0 / (1 + lambda eta0 t); the bias is not
    regularized. Epochs are extended until ``min_steps`` steps have run.
    At each epoch end the full objective of both the current and the
    averaged iterate is evaluated and the best iterate seen so far is kept,
    so ``objective_history`` never increases.

    Args:
        samples: (N, D) standardized feature rows
        labels: (N,) booleans
        cfg: Trainer settings; ``cfg.seed`` fixes the shuffling

    Returns:
        Trained LinearSvm

    Raises:
        ConstantModelRequired: Only one label present
        InputValidationError: Shape mismatch, N < 2 or non-finite input
    """
    cfg = cfg or SvmTrainConfig()
    samples, labels = _check_inputs(samples, labels)
    n, dim = samples.shape
    signs = np.where(labels, 1.0, -1.0)
    rng = np.random.default_rng(cfg.seed)

    batch = min(cfg.batch_size, n)
    steps_per_epoch = math.ceil(n / batch)
    epochs = max(cfg.epochs, math.ceil(cfg.min_steps / steps_per_epoch))

    w = np.zeros(dim)
    b = 0.0
    w_avg = np.zeros(dim)
    b_avg = 0.0
    best_w, best_b = w.copy(), b
    best_obj = svm_objective(w, b, samples, signs, cfg.lam)
    history = [best_obj]

    step = 0
    for _ in range(epochs):
        order = rng.permutation(n)
        for start in range(0, n, batch):
            idx = order[start : start + batch]
            x, y = samples[idx], signs[idx]
            active = y * (x @ w + b) < 1.0
            grad_w = cfg.lam * w - (y[active, None] * x[active]).sum(axis=0) / idx.shape[0]
            grad_b = -y[active].sum() / idx.shape[0]
            eta = cfg.eta0 / (1.0 + cfg.lam * cfg.eta0 * step)
            w = w - eta * grad_w
            b = b - eta * grad_b
            step += 1
            w_avg += (w - w_avg) / step
            b_avg += (b - b_avg) / step

        for cand_w, cand_b in ((w, b), (w_avg, b_avg)):
            obj = svm_objective(cand_w, cand_b, samples, signs, cfg.lam)
            if obj < best_obj:
                best_obj, best_w, best_b = obj, cand_w.copy(), float(cand_b)
        history.append(best_obj)

    logger.debug("Trained linear SVM", samples=n, epochs=epochs, steps=step, objective=best_obj)
    return LinearSvm(
        weights=best_w,
        bias=best_b,
        n_samples=n,
        positive_fraction=float(labels.mean()),
        objective=best_obj,
        objective_history=tuple(history),
    )


def constant_model(dim: int, label: bool, n_samples: int = 0) -> LinearSvm:
    """Predictor that always answers ``label``."""
    return LinearSvm(
        weights=np.zeros(dim),
        bias=1.0 if label else -1.0,
        n_samples=n_samples,
        positive_fraction=1.0 if label else 0.0,
    )
