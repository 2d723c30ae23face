"""
MDT Workbench - Mask Estimation Features

Per-frame feature vectors shared by every estimator in the bank:
subband energy to noise floor ratio, flatness, harmonic and random
log-mel components, and the noisy static + delta log-mel observations.
"""

from typing import Any, Self

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from mdt_workbench.frontend.features import delta_coefficients, linear_mel_spectrogram, to_log
from mdt_workbench.layer.errors import InputValidationError
from mdt_workbench.mask_estimator.harmonic import harmonic_decomposition
from mdt_workbench.models.audio import DeltaConfig, Domain, FrontendConfig, SpectroTemporal, Waveform
from mdt_workbench.models.estimator import N_FEATURE_GROUPS, EstimatorConfig

FEATURE_GROUPS = ("subband_snr", "flatness", "harmonic", "random", "noisy_static", "noisy_delta")


def _linear(noisy: SpectroTemporal) -> np.ndarray:
    if noisy.domain is not Domain.LINEAR_POWER:
        raise InputValidationError(f"expected linear_power features, got {noisy.domain}")
    return noisy.values


def noise_floor_estimate(noisy_linear: SpectroTemporal, window: int = 40, bias: float = 1.5) -> np.ndarray:
    """Minimum-statistics noise floor per band (linear power, shape (K,)).

    The smallest mean energy over any ``window`` consecutive frames, times
    ``bias``. Utterances shorter than the window use the whole-utterance mean.

    Raises:
        InputValidationError: Empty input
    """
    values = _linear(noisy_linear)
    if values.shape[0] == 0:
        raise InputValidationError("noise floor of an empty utterance")
    if values.shape[0] < window:
        return bias * values.mean(axis=0)
    window_means = sliding_window_view(values, window, axis=0).mean(axis=-1)
    return bias * window_means.min(axis=0)


def subband_snr_feature(
    noisy_linear: SpectroTemporal, floor: np.ndarray, low_db: float = -30.0, high_db: float = 60.0
) -> np.ndarray:
    """10 log10(noisy / floor) per cell, clamped to [low_db, high_db].

    Raises:
        InputValidationError: A nonpositive floor or a floor of the wrong length
    """
    values = _linear(noisy_linear)
    floor = np.asarray(floor, dtype=np.float64)
    if floor.shape != (values.shape[1],):
        raise InputValidationError(f"floor shape {floor.shape} != ({values.shape[1]},)")
    if np.any(floor <= 0.0):
        raise InputValidationError("noise floor must be positive in every band")
    return np.clip(10.0 * np.log10(values / floor), low_db, high_db)


def flatness_feature(noisy_linear: SpectroTemporal, half_width: int = 5, energy_floor: float = 1e-10) -> np.ndarray:
    """Geometric over arithmetic mean of each band across t-H..t+H (edges replicated).

    Values lie in (0, 1]; a window of equal values gives exactly 1.
    """
    if half_width < 1:
        raise InputValidationError(f"flatness half width must be >= 1, got {half_width}")
    values = np.maximum(_linear(noisy_linear), energy_floor)
    padded = np.pad(values, ((half_width, half_width), (0, 0)), mode="edge")
    windows = sliding_window_view(padded, 2 * half_width + 1, axis=0)  # (T, K, 2H+1)
    geometric = np.exp(np.log(windows).mean(axis=-1))
    arithmetic = windows.mean(axis=-1)
    constant = windows.max(axis=-1) == windows.min(axis=-1)
    return np.where(constant, 1.0, np.minimum(geometric / arithmetic, 1.0))


def build_feature_matrix(
    noisy_linear: SpectroTemporal,
    harmonic: SpectroTemporal,
    random: SpectroTemporal,
    delta_cfg: DeltaConfig,
    cfg: EstimatorConfig,
    energy_floor: float = 1e-10,
) -> np.ndarray:
    """Raw (unstandardized) T x 6K feature matrix in FEATURE_GROUPS order.

    Raises:
        InputValidationError: Constituent matrices disagree in shape
    """
    shape = noisy_linear.values.shape
    for name, part in (("harmonic", harmonic), ("random", random)):
        if part.values.shape != shape:
            raise InputValidationError(f"{name} shape {part.values.shape} != noisy shape {shape}")
        if part.domain is not Domain.LOG:
            raise InputValidationError(f"{name} component must be log-mel")

    floor = noise_floor_estimate(noisy_linear, cfg.noise_floor_window, cfg.noise_floor_bias)
    static = to_log(noisy_linear)
    columns = [
        subband_snr_feature(noisy_linear, floor, cfg.snr_floor_db, cfg.snr_ceiling_db),
        flatness_feature(noisy_linear, cfg.flatness_half_width, energy_floor),
        harmonic.values,
        random.values,
        static.values,
        delta_coefficients(static, delta_cfg).values,
    ]
    matrix = np.hstack(columns)
    if not np.all(np.isfinite(matrix)):
        raise InputValidationError("mask features contain non-finite values")
    return matrix


def mask_features(
    noisy: Waveform, frontend: FrontendConfig, delta_cfg: DeltaConfig, cfg: EstimatorConfig
) -> np.ndarray:
    """Feature matrix of a noisy waveform, all components from one frontend."""
    noisy_linear = linear_mel_spectrogram(noisy, frontend)
    harmonic, random = harmonic_decomposition(noisy, frontend, cfg.harmonic)
    return build_feature_matrix(noisy_linear, harmonic, random, delta_cfg, cfg, frontend.energy_floor)


def feature_dim(n_bands: int) -> int:
    return N_FEATURE_GROUPS * n_bands


class Standardizer(BaseModel):
    """Global per-dimension (x - mean) / scale shared by every estimator."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    mean: np.ndarray
    scale: np.ndarray

    @field_validator("mean", "scale", mode="before")
    @classmethod
    def _vector(cls, v: Any) -> np.ndarray:
        arr = np.array(v, dtype=np.float64, copy=True)
        arr.flags.writeable = False
        return arr

    @model_validator(mode="after")
    def _check(self) -> Self:
        if self.mean.ndim != 1 or self.mean.shape != self.scale.shape:
            msg = "mean and scale must be vectors of equal length"
            raise ValueError(msg)
        if np.any(self.scale <= 0.0):
            msg = "scale must be positive"
            raise ValueError(msg)
        return self

    @classmethod
    def fit(cls, features: np.ndarray) -> "Standardizer":
        """Statistics of a training matrix; constant dimensions get scale 1."""
        features = np.asarray(features, dtype=np.float64)
        if features.ndim != 2 or features.shape[0] == 0:
            raise InputValidationError(f"cannot standardize a {features.shape} matrix")
        mean = features.mean(axis=0)
        scale = features.std(axis=0)
        return cls(mean=mean, scale=np.where(scale > 0.0, scale, 1.0))

    def _check_width(self, features: np.ndarray) -> None:
        if features.ndim != 2 or features.shape[1] != self.mean.shape[0]:
            raise InputValidationError(
                f"feature width {features.shape[-1]} != standardizer width {self.mean.shape[0]}"
            )

    def transform(self, features: np.ndarray) -> np.ndarray:
        features = np.asarray(features, dtype=np.float64)
        self._check_width(features)
        return (features - self.mean) / self.scale

    def inverse_transform(self, standardized: np.ndarray) -> np.ndarray:
        standardized = np.asarray(standardized, dtype=np.float64)
        self._check_width(standardized)
        return standardized * self.scale + self.mean
