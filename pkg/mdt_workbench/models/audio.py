"""
MDT Workbench - Audio and Feature Models

Pydantic models for waveforms, frontend settings and spectro-temporal
feature matrices.
"""

from enum import StrEnum
from typing import Any, Self

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from mdt_workbench.models.validators import as_matrix


class Domain(StrEnum):
    """Value domain of a feature matrix."""

    LINEAR_POWER = "linear_power"
    LOG = "log"

    @property
    def tag(self) -> int:
        """Byte written into STFM headers."""
        return 0 if self is Domain.LINEAR_POWER else 1

    @classmethod
    def from_tag(cls, tag: int) -> "Domain":
        if tag == 0:
            return cls.LINEAR_POWER
        if tag == 1:
            return cls.LOG
        msg = f"Unknown domain tag: {tag}"
        raise ValueError(msg)


class Waveform(BaseModel):
    """Mono audio signal; nominal amplitude range [-1, 1]."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    samples: np.ndarray = Field(..., description="1-D sample array")
    sample_rate: int = Field(gt=0, description="Sampling rate in Hz")

    @field_validator("samples", mode="before")
    @classmethod
    def _to_vector(cls, v: Any) -> np.ndarray:
        arr = np.array(v, dtype=np.float64, copy=True)
        if arr.ndim != 1:
            msg = f"Waveform samples must be 1-D, got shape {arr.shape}"
            raise ValueError(msg)
        arr.flags.writeable = False
        return arr

    @property
    def n_samples(self) -> int:
        return int(self.samples.shape[0])


class FrontendConfig(BaseModel):
    """Log-mel frontend settings.

    Defaults follow the usual 8 kHz digit-task frontends: 25 ms Hamming
    frames every 10 ms, 23 mel bands between 64 Hz and Nyquist.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    sample_rate: int = Field(default=8000, gt=0, description="Sampling rate in Hz")
    frame_len: int = Field(default=200, gt=0, description="Frame length in samples")
    frame_shift: int = Field(default=80, gt=0, description="Frame shift in samples")
    preemphasis: float = Field(default=0.97, ge=0.0, lt=1.0)
    n_mel: int = Field(default=23, ge=1, description="Number of mel bands (K)")
    f_min: float = Field(default=64.0, ge=0.0, description="Lowest filterbank edge in Hz")
    f_max: float = Field(default=4000.0, gt=0.0, description="Highest filterbank edge in Hz")
    energy_floor: float = Field(default=1e-10, gt=0.0, description="Floor applied before log")
    n_fft: int = Field(default=256, gt=0, description="DFT size (zero-padded frames)")

    @model_validator(mode="after")
    def _check_geometry(self) -> Self:
        if self.frame_shift > self.frame_len:
            msg = f"frame_shift ({self.frame_shift}) must not exceed frame_len ({self.frame_len})"
            raise ValueError(msg)
        if not self.f_min < self.f_max <= self.sample_rate / 2:
            msg = (
                f"Need f_min < f_max <= sample_rate/2, got f_min={self.f_min}, "
                f"f_max={self.f_max}, sample_rate={self.sample_rate}"
            )
            raise ValueError(msg)
        if self.n_fft < self.frame_len:
            msg = f"n_fft ({self.n_fft}) must be >= frame_len ({self.frame_len})"
            raise ValueError(msg)
        return self

    @property
    def n_bins(self) -> int:
        return self.n_fft // 2 + 1

    def n_frames(self, n_samples: int) -> int:
        """Frame count for a signal of ``n_samples`` (0 if shorter than one frame)."""
        if n_samples < self.frame_len:
            return 0
        return (n_samples - self.frame_len) // self.frame_shift + 1


class DeltaConfig(BaseModel):
    """Regression window for delta features and delta masks."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    window_half_width: int = Field(default=2, ge=1, description="W: frames on each side")


class SpectroTemporal(BaseModel):
    """T x K feature matrix with provenance metadata."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    values: np.ndarray
    domain: Domain
    frame_len: int = Field(gt=0)
    frame_shift: int = Field(gt=0)
    sample_rate: int = Field(gt=0)

    @field_validator("values", mode="before")
    @classmethod
    def _to_matrix(cls, v: Any) -> np.ndarray:
        return as_matrix(v)

    @property
    def n_frames(self) -> int:
        return int(self.values.shape[0])

    @property
    def n_bands(self) -> int:
        return int(self.values.shape[1])

    def with_values(self, values: np.ndarray, domain: Domain | None = None) -> "SpectroTemporal":
        """Same provenance, new values (and optionally a new domain)."""
        return SpectroTemporal(
            values=values,
            domain=domain or self.domain,
            frame_len=self.frame_len,
            frame_shift=self.frame_shift,
            sample_rate=self.sample_rate,
        )

    @classmethod
    def from_config(
        cls, values: np.ndarray, domain: Domain, cfg: FrontendConfig
    ) -> "SpectroTemporal":
        return cls(
            values=values,
            domain=domain,
            frame_len=cfg.frame_len,
            frame_shift=cfg.frame_shift,
            sample_rate=cfg.sample_rate,
        )
