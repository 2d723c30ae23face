"""
MDT Workbench - HMM Models

Word-level left-to-right GMM-HMM set, training settings, state
alignments and word accuracy counts.
"""

from enum import StrEnum
from typing import Any, Self

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

SILENCE = "<sil>"


class DeltaMarginalization(StrEnum):
    """Treatment of unreliable delta dimensions."""

    FULL = "full"
    BOUNDED = "bounded"


class HmmConfig(BaseModel):
    """Topology, training and decoding settings ([hmm] section)."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    states_per_word: int = Field(default=8, ge=1)
    silence_states: int = Field(default=3, ge=1)
    n_mixtures: int = Field(default=3, ge=1, description="Gaussians per state (M)")
    training_passes: int = Field(default=6, ge=1, description="Segmental k-means passes")
    em_iterations: int = Field(default=4, ge=0, description="EM refinements per state and pass")
    kmeans_iterations: int = Field(default=10, ge=1)
    variance_floor_ratio: float = Field(default=1e-3, gt=0.0, description="Floor as fraction of global variance")
    self_loop_prob: float = Field(default=0.6, gt=0.0, lt=1.0, description="Flat-start self-loop probability")
    min_word_count: int = Field(default=1, ge=1)
    word_insertion_penalty: float = Field(default=0.0, le=0.0, description="Log-score added per word entry")
    delta_marginalization: DeltaMarginalization = DeltaMarginalization.FULL
    optional_silence: bool = True

    @classmethod
    def aurora_preset(cls, **overrides: Any) -> "HmmConfig":
        """16 states per digit and a 3-state silence model (179 states for 11 words)."""
        return cls(**{"states_per_word": 16, "silence_states": 3, **overrides})

    def total_states(self, n_words: int) -> int:
        return n_words * self.states_per_word + self.silence_states


def _frozen_array(v: Any, ndim: int, dtype: Any = np.float64) -> np.ndarray:
    arr = np.array(v, dtype=dtype, copy=True)
    if arr.ndim != ndim:
        msg = f"Expected a {ndim}-D array, got shape {arr.shape}"
        raise ValueError(msg)
    arr.flags.writeable = False
    return arr


class GaussianMixture(BaseModel):
    """Diagonal-covariance mixture of one state."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    weights: np.ndarray = Field(..., description="(M,)")
    means: np.ndarray = Field(..., description="(M, D)")
    variances: np.ndarray = Field(..., description="(M, D)")

    @field_validator("weights", mode="before")
    @classmethod
    def _weights(cls, v: Any) -> np.ndarray:
        return _frozen_array(v, 1)

    @field_validator("means", "variances", mode="before")
    @classmethod
    def _params(cls, v: Any) -> np.ndarray:
        return _frozen_array(v, 2)

    @model_validator(mode="after")
    def _check(self) -> Self:
        if self.weights.shape[0] == 0:
            msg = "mixture must have at least one component"
            raise ValueError(msg)
        if self.means.shape != self.variances.shape or self.means.shape[0] != self.weights.shape[0]:
            msg = "weights (M,), means (M, D) and variances (M, D) disagree"
            raise ValueError(msg)
        if not np.isclose(self.weights.sum(), 1.0, atol=1e-9) or np.any(self.weights <= 0.0):
            msg = "mixture weights must be positive and sum to 1"
            raise ValueError(msg)
        if np.any(self.variances <= 0.0):
            msg = "variances must be positive"
            raise ValueError(msg)
        return self

    @property
    def n_components(self) -> int:
        return int(self.weights.shape[0])


class HmmSet(BaseModel):
    """Trained models over a global state index space.

    Word w owns states ``w * states_per_word`` .. ``(w + 1) * states_per_word - 1``;
    the silence model owns the last ``silence_states`` indices.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    words: tuple[str, ...]
    states_per_word: int = Field(ge=1)
    silence_states: int = Field(ge=1)
    weights: np.ndarray = Field(..., description="(S, M) mixture weights")
    means: np.ndarray = Field(..., description="(S, M, 2K)")
    variances: np.ndarray = Field(..., description="(S, M, 2K) diagonal variances")
    self_loop: np.ndarray = Field(..., description="(S,) self-loop probabilities")
    variance_floor: np.ndarray = Field(..., description="(2K,) floor applied in training")

    @field_validator("weights", mode="before")
    @classmethod
    def _weights(cls, v: Any) -> np.ndarray:
        return _frozen_array(v, 2)

    @field_validator("means", "variances", mode="before")
    @classmethod
    def _params(cls, v: Any) -> np.ndarray:
        return _frozen_array(v, 3)

    @field_validator("self_loop", "variance_floor", mode="before")
    @classmethod
    def _vectors(cls, v: Any) -> np.ndarray:
        return _frozen_array(v, 1)

    @model_validator(mode="after")
    def _check(self) -> Self:
        n_states = len(self.words) * self.states_per_word + self.silence_states
        n_mix = self.weights.shape[1]
        n_dims = self.means.shape[2]
        if self.weights.shape != (n_states, n_mix):
            msg = f"weights shape {self.weights.shape} != ({n_states}, {n_mix})"
            raise ValueError(msg)
        if self.means.shape != (n_states, n_mix, n_dims) or self.variances.shape != self.means.shape:
            msg = "means/variances must both have shape (S, M, D)"
            raise ValueError(msg)
        if n_dims % 2:
            msg = f"observation dimension must be 2K, got {n_dims}"
            raise ValueError(msg)
        if self.self_loop.shape != (n_states,) or self.variance_floor.shape != (n_dims,):
            msg = "self_loop must have S entries and variance_floor D entries"
            raise ValueError(msg)
        if not np.allclose(self.weights.sum(axis=1), 1.0, atol=1e-9):
            msg = "mixture weights must sum to 1 per state"
            raise ValueError(msg)
        if np.any(self.variance_floor <= 0.0) or np.any(self.variances < self.variance_floor):
            msg = "variances must be >= the positive variance floor"
            raise ValueError(msg)
        if np.any(self.self_loop <= 0.0) or np.any(self.self_loop >= 1.0):
            msg = "self-loop probabilities must lie in (0, 1)"
            raise ValueError(msg)
        return self

    @property
    def n_states(self) -> int:
        return int(self.weights.shape[0])

    @property
    def n_mixtures(self) -> int:
        return int(self.weights.shape[1])

    @property
    def n_dims(self) -> int:
        return int(self.means.shape[2])

    @property
    def n_bands(self) -> int:
        return self.n_dims // 2

    @property
    def silence_offset(self) -> int:
        return len(self.words) * self.states_per_word

    def word_index(self, word: str) -> int:
        try:
            return self.words.index(word)
        except ValueError:
            msg = f"Word not in model set: {word}"
            raise ValueError(msg) from None

    def word_states(self, word: str) -> range:
        start = self.word_index(word) * self.states_per_word
        return range(start, start + self.states_per_word)

    def silence_range(self) -> range:
        return range(self.silence_offset, self.n_states)

    def owner(self, state: int) -> tuple[str, int]:
        """(word or SILENCE, local state index) of a global state."""
        if not 0 <= state < self.n_states:
            msg = f"state index {state} out of range [0, {self.n_states})"
            raise ValueError(msg)
        if state >= self.silence_offset:
            return SILENCE, state - self.silence_offset
        return self.words[state // self.states_per_word], state % self.states_per_word

    def log_self_loop(self) -> np.ndarray:
        return np.log(self.self_loop)

    def log_exit(self) -> np.ndarray:
        return np.log1p(-self.self_loop)

    def replace(self, **changes: Any) -> "HmmSet":
        """Copy with some parameter arrays replaced."""
        return HmmSet(**{**self.model_dump(), **changes})


class StateAlignment(BaseModel):
    """Per-frame global state index."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    states: np.ndarray

    @field_validator("states", mode="before")
    @classmethod
    def _states(cls, v: Any) -> np.ndarray:
        arr = np.array(v, dtype=np.int64, copy=True)
        if arr.ndim != 1:
            msg = f"alignment must be 1-D, got shape {arr.shape}"
            raise ValueError(msg)
        if arr.size and arr.min() < 0:
            msg = "state indices must be nonnegative"
            raise ValueError(msg)
        arr.flags.writeable = False
        return arr

    @property
    def n_frames(self) -> int:
        return int(self.states.shape[0])


class EvalReport(BaseModel):
    """Word-level Levenshtein counts; accuracy = 100 (N - S - D - I) / N."""

    model_config = ConfigDict(frozen=True)

    n_words: int = Field(ge=0, description="N: reference words")
    substitutions: int = Field(default=0, ge=0)
    deletions: int = Field(default=0, ge=0)
    insertions: int = Field(default=0, ge=0)
    n_utterances: int = Field(default=0, ge=0)

    @property
    def accuracy(self) -> float:
        if self.n_words == 0:
            msg = "accuracy undefined for an empty reference set"
            raise ValueError(msg)
        errors = self.substitutions + self.deletions + self.insertions
        return 100.0 * (self.n_words - errors) / self.n_words

    @property
    def correct(self) -> int:
        return self.n_words - self.substitutions - self.deletions

    def __add__(self, other: "EvalReport") -> "EvalReport":
        return EvalReport(
            n_words=self.n_words + other.n_words,
            substitutions=self.substitutions + other.substitutions,
            deletions=self.deletions + other.deletions,
            insertions=self.insertions + other.insertions,
            n_utterances=self.n_utterances + other.n_utterances,
        )
