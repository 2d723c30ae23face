"""
MDT Workbench - Mask Models

Reliability masks and the oracle-mask settings.
"""

from enum import StrEnum
from typing import Any, Self

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from mdt_workbench.models.audio import DeltaConfig


class DeltaRule(StrEnum):
    """How a delta mask cell is derived from the static cells in its window."""

    AND = "and"
    OR = "or"


class OracleThreshold(BaseModel):
    """Local SNR threshold of the classical oracle mask."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    theta_db: float = Field(default=0.0, allow_inf_nan=False, description="Reliable iff local SNR >= theta")


class MaskConfig(BaseModel):
    """Oracle mask settings ([mask] section)."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    theta_db: float = Field(default=0.0, allow_inf_nan=False)
    delta_rule: DeltaRule = DeltaRule.AND
    align_on_noisy: bool = Field(
        default=False,
        description="Oracle state transcription from noisy instead of clean features",
    )

    @property
    def threshold(self) -> OracleThreshold:
        return OracleThreshold(theta_db=self.theta_db)


def _as_bool_matrix(v: Any) -> np.ndarray:
    arr = np.array(v, dtype=bool, copy=True)
    if arr.ndim != 2:
        msg = f"Mask must be a 2-D matrix, got shape {arr.shape}"
        raise ValueError(msg)
    arr.flags.writeable = False
    return arr


class BinaryMask(BaseModel):
    """T x K reliability mask (True = reliable) with an optional delta companion."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    values: np.ndarray
    delta: np.ndarray | None = None

    @field_validator("values", mode="before")
    @classmethod
    def _values(cls, v: Any) -> np.ndarray:
        return _as_bool_matrix(v)

    @field_validator("delta", mode="before")
    @classmethod
    def _delta(cls, v: Any) -> np.ndarray | None:
        return None if v is None else _as_bool_matrix(v)

    @model_validator(mode="after")
    def _check_shapes(self) -> Self:
        if self.delta is not None and self.delta.shape != self.values.shape:
            msg = f"delta mask shape {self.delta.shape} != static shape {self.values.shape}"
            raise ValueError(msg)
        return self

    @property
    def shape(self) -> tuple[int, int]:
        return (int(self.values.shape[0]), int(self.values.shape[1]))

    @property
    def n_frames(self) -> int:
        return self.shape[0]

    @property
    def n_bands(self) -> int:
        return self.shape[1]

    def stacked(self) -> np.ndarray:
        """T x 2K mask aligned with [static | delta] observations.

        A mask without a delta companion marks every delta dimension reliable.
        """
        delta = self.delta if self.delta is not None else np.ones_like(self.values)
        return np.hstack([self.values, delta])

    def matches_delta(self, d: DeltaConfig, rule: DeltaRule = DeltaRule.AND) -> bool:
        """Regeneration check: the companion equals delta_mask(values)."""
        from mdt_workbench.mask.oracle import delta_mask

        if self.delta is None:
            return True
        return bool(np.array_equal(self.delta, delta_mask(self, d, rule)))
