"""
MDT Workbench - Estimator Bank

Training of one linear SVM per (HMM state, mel band) from forced-aligned
frames, and mask prediction driven by a state transcription.
"""

from collections.abc import Sequence
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Self

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from mdt_workbench.layer.errors import ConstantModelRequired, InputValidationError
from mdt_workbench.layer.logger import get_logger
from mdt_workbench.mask.oracle import delta_from_static
from mdt_workbench.mask_estimator.features import Standardizer
from mdt_workbench.mask_estimator.svm import train_svm
from mdt_workbench.models.audio import DeltaConfig
from mdt_workbench.models.estimator import N_FEATURE_GROUPS, EstimatorBank, SlotKind, SvmTrainConfig
from mdt_workbench.models.hmm import StateAlignment
from mdt_workbench.models.masks import BinaryMask, DeltaRule
from mdt_workbench.seeding import derive_seed

logger = get_logger(__name__)

# slot seed keys: (seed, group, ...) with group 0 = pooled band models, 1 = state models
_POOLED_GROUP = 0
_STATE_GROUP = 1


class BankTrainingUtterance(BaseModel):
    """Raw mask features, oracle static mask and forced alignment of one utterance."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    utt_id: str
    features: np.ndarray
    oracle: np.ndarray
    states: np.ndarray

    @field_validator("features", mode="before")
    @classmethod
    def _features(cls, v: Any) -> np.ndarray:
        return np.asarray(v, dtype=np.float64)

    @field_validator("oracle", mode="before")
    @classmethod
    def _oracle(cls, v: Any) -> np.ndarray:
        if isinstance(v, BinaryMask):
            return v.values
        return np.asarray(v, dtype=bool)

    @field_validator("states", mode="before")
    @classmethod
    def _states(cls, v: Any) -> np.ndarray:
        if isinstance(v, StateAlignment):
            return v.states
        return np.asarray(v, dtype=np.int64)

    @model_validator(mode="after")
    def _check(self) -> Self:
        t = self.features.shape[0]
        if self.oracle.ndim != 2 or self.features.ndim != 2 or self.states.shape != (t,):
            msg = f"{self.utt_id}: features, oracle mask and alignment must be (T, 6K), (T, K), (T,)"
            raise ValueError(msg)
        if self.oracle.shape[0] != t:
            msg = f"{self.utt_id}: oracle mask has {self.oracle.shape[0]} frames, features {t}"
            raise ValueError(msg)
        if self.features.shape[1] != N_FEATURE_GROUPS * self.oracle.shape[1]:
            msg = f"{self.utt_id}: feature width {self.features.shape[1]} != 6 x {self.oracle.shape[1]}"
            raise ValueError(msg)
        return self


def _slot_config(cfg: SvmTrainConfig, *keys: int) -> SvmTrainConfig:
    return cfg.model_copy(update={"seed": derive_seed(cfg.seed, *keys)})


def _pooled_model(
    samples: np.ndarray, labels: np.ndarray, band: int, cfg: SvmTrainConfig
) -> tuple[np.ndarray, float]:
    n = samples.shape[0]
    take = min(n, cfg.max_pooled_samples)
    idx = np.unique(np.linspace(0, n - 1, take).round().astype(np.int64))
    try:
        model = train_svm(samples[idx], labels[idx, band], _slot_config(cfg, _POOLED_GROUP, band))
    except ConstantModelRequired as e:
        return np.zeros(samples.shape[1]), 1.0 if e.label else -1.0
    return np.array(model.weights), model.bias


def _state_job(job: tuple[int, np.ndarray, np.ndarray, SvmTrainConfig]) -> list[tuple[int, bool, np.ndarray | None, float]]:
    """Resolve the K slots of one state: (kind, label, weights, bias) per band."""
    state, samples, labels, cfg = job
    n, n_bands = labels.shape
    slots: list[tuple[int, bool, np.ndarray | None, float]] = []
    for band in range(n_bands):
        column = labels[:, band]
        positives = int(column.sum())
        if n < cfg.min_samples_per_model:
            slots.append((SlotKind.FALLBACK, False, None, 0.0))
        elif positives in (0, n):
            slots.append((SlotKind.CONSTANT, positives == n, None, 0.0))
        elif min(positives, n - positives) < cfg.min_per_class:
            slots.append((SlotKind.CONSTANT, 2 * positives >= n, None, 0.0))
        else:
            model = train_svm(samples, column, _slot_config(cfg, _STATE_GROUP, state, band))
            slots.append((SlotKind.TRAINED, False, np.array(model.weights), model.bias))
    return slots


def train_estimator_bank(
    utterances: Sequence[BankTrainingUtterance],
    n_states: int,
    cfg: SvmTrainConfig | None = None,
    workers: int = 1,
) -> EstimatorBank:
    """Train the S x K bank from forced-aligned, oracle-labelled frames.

    Per (state, band): fewer than ``min_samples_per_model`` frames use the
    band's pooled model; a single label, or a minority class smaller than
    ``min_per_class``, gives a constant predictor; otherwise a LinearSvm is
    trained. Every slot seed is derived from (seed, state, band), so any
    ``workers`` value gives the same bank.

    Args:
        utterances: Training utterances with raw features, oracle masks and alignments
        n_states: S_total of the HMM set the alignments index
        cfg: Trainer settings
        workers: Processes for per-state training

    Returns:
        EstimatorBank with global standardization statistics

    Raises:
        InputValidationError: Empty training set, inconsistent widths or a state out of range
    """
    cfg = cfg or SvmTrainConfig()
    if not utterances:
        raise InputValidationError("estimator bank needs a non-empty training set")
    n_bands = utterances[0].oracle.shape[1]
    if any(u.oracle.shape[1] != n_bands for u in utterances):
        raise InputValidationError("training utterances disagree on the band count")

    raw = np.concatenate([u.features for u in utterances])
    labels = np.concatenate([u.oracle for u in utterances])
    states = np.concatenate([u.states for u in utterances])
    if states.size and (states.min() < 0 or states.max() >= n_states):
        raise InputValidationError(f"alignment state out of range [0, {n_states})")

    standardizer = Standardizer.fit(raw)
    samples = standardizer.transform(raw)
    dim = samples.shape[1]

    pooled = [_pooled_model(samples, labels, k, cfg) for k in range(n_bands)]
    pooled_weights = np.stack([w for w, _ in pooled])
    pooled_biases = np.array([b for _, b in pooled])

    order = np.argsort(states, kind="stable")
    bounds = np.searchsorted(states[order], np.arange(n_states + 1))
    jobs = []
    for s in range(n_states):
        rows = order[bounds[s] : bounds[s + 1]]
        jobs.append((s, samples[rows], labels[rows], cfg))

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            resolved = list(pool.map(_state_job, jobs, chunksize=4))
    else:
        resolved = [_state_job(job) for job in jobs]

    kinds = np.empty((n_states, n_bands), dtype=np.uint8)
    slot_labels = np.zeros((n_states, n_bands), dtype=bool)
    weights = np.zeros((n_states, n_bands, dim))
    biases = np.zeros((n_states, n_bands))
    for s, slots in enumerate(resolved):
        for k, (kind, label, w, b) in enumerate(slots):
            kinds[s, k] = kind
            slot_labels[s, k] = label
            if w is not None:
                weights[s, k] = w
                biases[s, k] = b

    bank = EstimatorBank(
        n_states=n_states,
        n_bands=n_bands,
        feature_dim=dim,
        mean=standardizer.mean,
        scale=standardizer.scale,
        kinds=kinds,
        labels=slot_labels,
        weights=weights,
        biases=biases,
        pooled_weights=pooled_weights,
        pooled_biases=pooled_biases,
    )
    stats = bank.stats()
    logger.info(
        "Trained estimator bank",
        frames=int(samples.shape[0]),
        slots=stats.slots,
        trained=stats.trained,
        constant=stats.constant,
        fallback=stats.fallback,
    )
    return bank


def standardize(bank: EstimatorBank, raw_features: np.ndarray) -> np.ndarray:
    """Apply the bank's global standardization to a raw T x 6K matrix."""
    return Standardizer(mean=bank.mean, scale=bank.scale).transform(raw_features)


def predict_state_masks(bank: EstimatorBank, raw_features: np.ndarray) -> np.ndarray:
    """Static mask of every state for every frame, shape (S, T, K)."""
    samples = standardize(bank, raw_features)
    weights, biases = bank.resolved_parameters()
    scores = np.einsum("td,skd->stk", samples, weights) + biases[:, None, :]
    return scores >= 0.0


def predict_mask_state_dependent(
    bank: EstimatorBank,
    raw_features: np.ndarray,
    alignment: StateAlignment | np.ndarray,
    d: DeltaConfig | None = None,
    rule: DeltaRule = DeltaRule.AND,
) -> BinaryMask:
    """Mask whose frame t comes from the models of state ``alignment[t]``.

    Raises:
        InputValidationError: Alignment/feature length mismatch or state out of range
    """
    states = alignment.states if isinstance(alignment, StateAlignment) else np.asarray(alignment, dtype=np.int64)
    samples = standardize(bank, raw_features)
    if states.shape != (samples.shape[0],):
        raise InputValidationError(
            f"alignment length {states.shape[0]} != feature frames {samples.shape[0]}"
        )
    if states.size and (states.min() < 0 or states.max() >= bank.n_states):
        raise InputValidationError(f"state index out of range [0, {bank.n_states})")
    weights, biases = bank.resolved_parameters()
    scores = np.einsum("td,tkd->tk", samples, weights[states]) + biases[states]
    static = scores >= 0.0
    return BinaryMask(values=static, delta=delta_from_static(static, d or DeltaConfig(), rule))


def pooled_baseline_mask(
    bank: EstimatorBank,
    raw_features: np.ndarray,
    d: DeltaConfig | None = None,
    rule: DeltaRule = DeltaRule.AND,
) -> BinaryMask:
    """Mask from the per-band pooled models only (no state information)."""
    samples = standardize(bank, raw_features)
    static = samples @ bank.pooled_weights.T + bank.pooled_biases >= 0.0
    return BinaryMask(values=static, delta=delta_from_static(static, d or DeltaConfig(), rule))


def label_agreement(predicted: BinaryMask, reference: BinaryMask) -> float:
    """Fraction of static cells on which two masks agree."""
    if predicted.shape != reference.shape:
        raise InputValidationError(f"mask shapes differ: {predicted.shape} vs {reference.shape}")
    return float(np.mean(predicted.values == reference.values))
