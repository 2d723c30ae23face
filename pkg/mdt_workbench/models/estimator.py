"""
MDT Workbench - Mask Estimator Models

SVM training settings, feature settings, linear SVMs and the
per-(state, band) estimator bank.
"""

from enum import IntEnum
from typing import Any, Self

import numpy as np
from pydantic import AliasChoices, BaseModel, ConfigDict, Field, field_validator, model_validator

N_FEATURE_GROUPS = 6


class SvmTrainConfig(BaseModel):
    """Hinge-loss subgradient trainer settings."""

    model_config = ConfigDict(frozen=True, extra="forbid", populate_by_name=True)

    lam: float = Field(
        default=1e-3,
        gt=0.0,
        validation_alias=AliasChoices("lam", "lambda"),
        description="Regularization strength lambda",
    )
    epochs: int = Field(default=20, ge=1)
    batch_size: int = Field(default=16, ge=1, description="Mini-batch size per subgradient step")
    eta0: float = Field(default=1.0, gt=0.0, description="Initial step in the eta0 / (1 + lambda eta0 t) schedule")
    min_steps: int = Field(default=1000, ge=1, description="Epochs are extended until this many steps are taken")
    seed: int = Field(default=0, ge=0)
    min_samples_per_model: int = Field(default=20, ge=2)
    min_per_class: int = Field(default=2, ge=1)
    max_pooled_samples: int = Field(default=20000, ge=2, description="Subsample cap for pooled band models")


class HarmonicConfig(BaseModel):
    """Pitch tracking and harmonic/random split settings."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    f0_min_hz: float = Field(default=60.0, gt=0.0)
    f0_max_hz: float = Field(default=400.0, gt=0.0)
    voicing_threshold: float = Field(default=0.3, ge=0.0, le=1.0, description="Peak-to-energy ratio")
    pitch_window: int = Field(default=320, gt=0, description="Autocorrelation window in samples")
    harmonic_half_width: int = Field(default=1, ge=0, description="Bins on each side of a harmonic")

    @model_validator(mode="after")
    def _check(self) -> Self:
        if self.f0_max_hz <= self.f0_min_hz:
            msg = "f0_max_hz must exceed f0_min_hz"
            raise ValueError(msg)
        return self

    def check_window(self, sample_rate: int) -> None:
        """The pitch window must hold two periods at the lowest f0."""
        need = int(np.ceil(2.0 * sample_rate / self.f0_min_hz))
        if self.pitch_window < need:
            msg = f"pitch_window {self.pitch_window} < two periods at {self.f0_min_hz} Hz ({need} samples)"
            raise ValueError(msg)


class EstimatorConfig(BaseModel):
    """Mask-estimation features and bank training ([svm] section)."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    noise_floor_window: int = Field(default=40, ge=1, description="Minimum-statistics window in frames")
    noise_floor_bias: float = Field(default=1.5, gt=0.0)
    flatness_half_width: int = Field(default=5, ge=1, description="H: frames each side")
    snr_floor_db: float = Field(default=-30.0)
    snr_ceiling_db: float = Field(default=60.0)
    svm: SvmTrainConfig = Field(default_factory=SvmTrainConfig)
    harmonic: HarmonicConfig = Field(default_factory=HarmonicConfig)

    @model_validator(mode="after")
    def _check(self) -> Self:
        if self.snr_ceiling_db <= self.snr_floor_db:
            msg = "snr_ceiling_db must exceed snr_floor_db"
            raise ValueError(msg)
        return self


def _vector(v: Any) -> np.ndarray:
    arr = np.array(v, dtype=np.float64, copy=True)
    if arr.ndim != 1:
        msg = f"Expected a vector, got shape {arr.shape}"
        raise ValueError(msg)
    if not np.all(np.isfinite(arr)):
        msg = "parameters must be finite"
        raise ValueError(msg)
    arr.flags.writeable = False
    return arr


class LinearSvm(BaseModel):
    """Linear classifier; reliable iff w.x + b >= 0."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    weights: np.ndarray
    bias: float = Field(allow_inf_nan=False)
    n_samples: int = Field(default=0, ge=0)
    positive_fraction: float = Field(default=0.0, ge=0.0, le=1.0)
    objective: float = Field(default=0.0, ge=0.0)
    objective_history: tuple[float, ...] = ()

    @field_validator("weights", mode="before")
    @classmethod
    def _weights(cls, v: Any) -> np.ndarray:
        return _vector(v)

    def decision_function(self, features: np.ndarray) -> np.ndarray:
        return np.asarray(features) @ self.weights + self.bias

    def predict(self, features: np.ndarray) -> np.ndarray:
        return self.decision_function(features) >= 0.0


class SlotKind(IntEnum):
    """Resolution of one (state, band) slot; values are the SVMB record tags."""

    TRAINED = 0
    CONSTANT = 1
    FALLBACK = 2


class BankStats(BaseModel):
    """Slot counts reported after bank training."""

    model_config = ConfigDict(frozen=True)

    slots: int
    trained: int
    constant: int
    fallback: int


class EstimatorBank(BaseModel):
    """S_total x K linear SVM slots plus one pooled fallback model per band.

    Features are standardized with a single global (mean, scale) shared by
    every slot.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    n_states: int = Field(ge=1)
    n_bands: int = Field(ge=1)
    feature_dim: int = Field(ge=1)
    mean: np.ndarray
    scale: np.ndarray
    kinds: np.ndarray = Field(..., description="(S, K) SlotKind values")
    labels: np.ndarray = Field(..., description="(S, K) constant labels")
    weights: np.ndarray = Field(..., description="(S, K, D) trained weights, zero elsewhere")
    biases: np.ndarray = Field(..., description="(S, K) trained biases")
    pooled_weights: np.ndarray = Field(..., description="(K, D)")
    pooled_biases: np.ndarray = Field(..., description="(K,)")

    @field_validator(
        "mean", "scale", "weights", "biases", "pooled_weights", "pooled_biases", mode="before"
    )
    @classmethod
    def _float_arrays(cls, v: Any) -> np.ndarray:
        arr = np.array(v, dtype=np.float64, copy=True)
        arr.flags.writeable = False
        return arr

    @field_validator("kinds", mode="before")
    @classmethod
    def _kinds(cls, v: Any) -> np.ndarray:
        arr = np.array(v, dtype=np.uint8, copy=True)
        arr.flags.writeable = False
        return arr

    @field_validator("labels", mode="before")
    @classmethod
    def _labels(cls, v: Any) -> np.ndarray:
        arr = np.array(v, dtype=bool, copy=True)
        arr.flags.writeable = False
        return arr

    @model_validator(mode="after")
    def _check(self) -> Self:
        s, k, d = self.n_states, self.n_bands, self.feature_dim
        expected = {
            "mean": (d,),
            "scale": (d,),
            "kinds": (s, k),
            "labels": (s, k),
            "weights": (s, k, d),
            "biases": (s, k),
            "pooled_weights": (k, d),
            "pooled_biases": (k,),
        }
        for name, shape in expected.items():
            if getattr(self, name).shape != shape:
                msg = f"{name} shape {getattr(self, name).shape} != {shape}"
                raise ValueError(msg)
        if not set(np.unique(self.kinds).tolist()) <= {int(kind) for kind in SlotKind}:
            msg = "unknown slot kind in bank"
            raise ValueError(msg)
        if np.any(self.scale <= 0.0):
            msg = "standardization scale must be positive"
            raise ValueError(msg)
        return self

    @property
    def n_slots(self) -> int:
        return self.n_states * self.n_bands

    def stats(self) -> BankStats:
        counts = np.bincount(self.kinds.ravel(), minlength=len(SlotKind))
        return BankStats(
            slots=self.n_slots,
            trained=int(counts[SlotKind.TRAINED]),
            constant=int(counts[SlotKind.CONSTANT]),
            fallback=int(counts[SlotKind.FALLBACK]),
        )

    def resolved_parameters(self) -> tuple[np.ndarray, np.ndarray]:
        """Effective (weights (S, K, D), biases (S, K)) of every slot.

        Constant slots become w = 0, b = +1 (reliable) or -1 (unreliable);
        fallback slots take their band's pooled model.
        """
        kinds = self.kinds
        weights = np.array(self.weights)
        biases = np.array(self.biases)

        constant = kinds == SlotKind.CONSTANT
        weights[constant] = 0.0
        biases[constant] = np.where(self.labels[constant], 1.0, -1.0)

        fallback = kinds == SlotKind.FALLBACK
        bands = np.broadcast_to(np.arange(self.n_bands), kinds.shape)[fallback]
        weights[fallback] = self.pooled_weights[bands]
        biases[fallback] = self.pooled_biases[bands]
        return weights, biases
