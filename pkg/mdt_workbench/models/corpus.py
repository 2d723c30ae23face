"""
MDT Workbench - Corpus Models

Pydantic models for the synthetic lexicon, noise and mixing specs,
corpus configuration, manifest entries and utterance records.
"""

import math
from enum import StrEnum
from pathlib import Path
from typing import Any, Self

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from mdt_workbench.models.audio import Waveform
from mdt_workbench.models.validators import (
    format_snr,
    parse_snr,
    split_list,
    validate_noise_kind,
)

CLEAN_NOISE_KIND = "none"


class Split(StrEnum):
    """Corpus partition."""

    TRAIN = "train"
    TEST = "test"

    @property
    def seed_bit(self) -> int:
        """Low bit of every seed drawn for this split (train even, test odd)."""
        return 0 if self is Split.TRAIN else 1


class PhoneSpec(BaseModel):
    """Formant target and duration range of one synthetic phone."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    formants_hz: list[float] = Field(..., min_length=2, max_length=3)
    bandwidths_hz: list[float] = Field(..., min_length=2, max_length=3)
    voiced: bool
    min_frames: int = Field(gt=0)
    max_frames: int = Field(gt=0)
    gain: float = Field(default=1.0, gt=0.0, description="Source amplitude multiplier")

    @model_validator(mode="after")
    def _check(self) -> Self:
        if len(self.formants_hz) != len(self.bandwidths_hz):
            msg = "formants_hz and bandwidths_hz must have equal length"
            raise ValueError(msg)
        if any(f <= 0 for f in self.formants_hz) or any(b <= 0 for b in self.bandwidths_hz):
            msg = "formant frequencies and bandwidths must be positive"
            raise ValueError(msg)
        if self.max_frames < self.min_frames:
            msg = f"max_frames ({self.max_frames}) < min_frames ({self.min_frames})"
            raise ValueError(msg)
        return self


class Lexicon(BaseModel):
    """Ordered word list with per-word phone sequences."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    phones: dict[str, PhoneSpec]
    words: dict[str, list[str]]

    @model_validator(mode="after")
    def _check(self) -> Self:
        if len(self.words) < 2:
            msg = f"Lexicon needs at least 2 words, got {len(self.words)}"
            raise ValueError(msg)
        for word, phone_seq in self.words.items():
            if not phone_seq:
                msg = f"Word '{word}' has no phones"
                raise ValueError(msg)
            unknown = [p for p in phone_seq if p not in self.phones]
            if unknown:
                msg = f"Word '{word}' uses unknown phones: {unknown}"
                raise ValueError(msg)
        return self

    @property
    def word_ids(self) -> list[str]:
        return list(self.words)

    def subset(self, n_words: int) -> "Lexicon":
        """First ``n_words`` words (lexicon order) and the phones they use."""
        if not 2 <= n_words <= len(self.words):
            msg = f"n_words must be in [2, {len(self.words)}], got {n_words}"
            raise ValueError(msg)
        words = dict(list(self.words.items())[:n_words])
        used = {p for seq in words.values() for p in seq}
        return Lexicon(phones={k: v for k, v in self.phones.items() if k in used}, words=words)


class NoiseSpec(BaseModel):
    """Noise generator parameters."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: str
    seed: int = Field(ge=0, lt=2**64)
    cutoff_hz: float = Field(default=1000.0, gt=0.0, description="lowpass cutoff")
    modulation_hz: float = Field(default=4.0, gt=0.0, description="amplitude_modulated rate")
    modulation_depth: float = Field(default=0.9, ge=0.0, le=1.0)
    hum_f0_hz: float = Field(default=50.0, gt=0.0, description="harmonic_hum fundamental")

    @field_validator("kind")
    @classmethod
    def _kind(cls, v: str) -> str:
        return validate_noise_kind(v)


class MixSpec(BaseModel):
    """Target SNR of a mixture; +inf means clean."""

    model_config = ConfigDict(frozen=True)

    snr_db: float
    seed: int = Field(default=0, ge=0, lt=2**64)

    @field_validator("snr_db", mode="before")
    @classmethod
    def _snr(cls, v: Any) -> float:
        return parse_snr(v)

    @property
    def is_clean(self) -> bool:
        return math.isinf(self.snr_db)


class CorpusConfig(BaseModel):
    """Synthetic corpus layout.

    The train split holds clean speech plus every (noise kind x train SNR)
    mixture; the test split holds clean plus every (noise kind x test SNR)
    cell, mirroring a multi-condition train set and a Table-style test set.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    seed: int = Field(default=1234, ge=0, description="Master seed")
    sample_rate: int = Field(default=8000, gt=0)
    frame_shift: int = Field(default=80, gt=0, description="Samples per duration frame")
    lexicon_path: Path | None = None
    n_words: int = Field(default=5, ge=2)
    train_per_word: int = Field(default=40, ge=1)
    test_per_word: int = Field(default=20, ge=1)
    noise_kinds: list[str] = Field(default_factory=lambda: ["lowpass", "amplitude_modulated"])
    train_snrs: list[float] = Field(default_factory=lambda: [20.0, 10.0, 5.0])
    test_snrs: list[float] = Field(default_factory=lambda: [20.0, 10.0, 5.0, 0.0, -5.0])
    multiword_fraction: float = Field(default=0.2, ge=0.0, le=1.0)
    max_sequence_len: int = Field(default=4, ge=2)
    leading_silence_frames: int = Field(default=20, ge=0)
    trailing_silence_frames: int = Field(default=20, ge=0)
    transition_frames: int = Field(default=2, ge=0)
    pause_min_frames: int = Field(default=3, ge=0, description="Shortest pause between words")
    pause_max_frames: int = Field(default=8, ge=0, description="Longest pause between words")
    f0_min_hz: float = Field(default=90.0, gt=0.0)
    f0_max_hz: float = Field(default=200.0, gt=0.0)
    lowpass_cutoff_hz: float = Field(default=1000.0, gt=0.0)
    modulation_hz: float = Field(default=4.0, gt=0.0)
    hum_f0_hz: float = Field(default=50.0, gt=0.0)

    @field_validator("noise_kinds", mode="before")
    @classmethod
    def _kinds(cls, v: Any) -> list[str]:
        return [validate_noise_kind(k) for k in split_list(v)]

    @field_validator("train_snrs", "test_snrs", mode="before")
    @classmethod
    def _snrs(cls, v: Any) -> list[float]:
        # clean is always present in both splits; drop explicit mentions
        return [s for s in (parse_snr(x) for x in split_list(v)) if not math.isinf(s)]

    @model_validator(mode="after")
    def _check(self) -> Self:
        if not self.noise_kinds and (self.train_snrs or self.test_snrs):
            msg = "noisy SNR levels need at least one noise kind"
            raise ValueError(msg)
        if self.f0_max_hz < self.f0_min_hz:
            msg = "f0_max_hz must be >= f0_min_hz"
            raise ValueError(msg)
        if self.pause_max_frames < self.pause_min_frames:
            msg = "pause_max_frames must be >= pause_min_frames"
            raise ValueError(msg)
        nyquist = self.sample_rate / 2
        for name in ("lowpass_cutoff_hz", "hum_f0_hz", "f0_max_hz"):
            if getattr(self, name) >= nyquist:
                msg = f"{name} must be below Nyquist ({nyquist} Hz)"
                raise ValueError(msg)
        return self

    def snrs(self, split: Split) -> list[float]:
        return self.train_snrs if split is Split.TRAIN else self.test_snrs

    def per_word(self, split: Split) -> int:
        return self.train_per_word if split is Split.TRAIN else self.test_per_word

    def cells(self, split: Split) -> list[tuple[float, str]]:
        """(snr_db, noise_kind) cells of a split, clean first."""
        cells = [(math.inf, CLEAN_NOISE_KIND)]
        cells.extend((snr, kind) for kind in self.noise_kinds for snr in self.snrs(split))
        return cells

    def expected_entries(self) -> int:
        """Manifest line count implied by this config."""
        return sum(self.n_words * self.per_word(s) * len(self.cells(s)) for s in Split)

    def noise_spec(self, kind: str, seed: int) -> NoiseSpec:
        return NoiseSpec(
            kind=kind,
            seed=seed,
            cutoff_hz=self.lowpass_cutoff_hz,
            modulation_hz=self.modulation_hz,
            hum_f0_hz=self.hum_f0_hz,
        )


class ManifestEntry(BaseModel):
    """One manifest line (paths relative to the corpus root)."""

    model_config = ConfigDict(frozen=True)

    utt_id: str
    split: Split
    words: tuple[str, ...]
    snr_db: float
    noise_kind: str
    clean_path: str
    noise_path: str
    noisy_path: str

    @field_validator("snr_db", mode="before")
    @classmethod
    def _snr(cls, v: Any) -> float:
        return parse_snr(v)

    @property
    def is_clean(self) -> bool:
        return math.isinf(self.snr_db)

    def to_line(self) -> str:
        return "\t".join(
            [
                self.utt_id,
                self.split.value,
                ",".join(self.words),
                format_snr(self.snr_db),
                self.noise_kind,
                self.clean_path,
                self.noise_path,
                self.noisy_path,
            ]
        )

    @classmethod
    def from_line(cls, line: str) -> "ManifestEntry":
        fields = line.rstrip("\n").split("\t")
        if len(fields) != 8:
            msg = f"Manifest line needs 8 tab-separated fields, got {len(fields)}"
            raise ValueError(msg)
        utt_id, split, words, snr, kind, clean, noise, noisy = fields
        return cls(
            utt_id=utt_id,
            split=Split(split),
            words=tuple(w for w in words.split(",") if w),
            snr_db=snr,
            noise_kind=kind,
            clean_path=clean,
            noise_path=noise,
            noisy_path=noisy,
        )


class PhoneSegment(BaseModel):
    """Labelled frame span [start, end) of a word or phone."""

    model_config = ConfigDict(frozen=True)

    label: str
    start_frame: int = Field(ge=0)
    end_frame: int = Field(ge=0)


class SynthAnnotation(BaseModel):
    """Ground-truth segmentation returned by the speech synthesizer."""

    model_config = ConfigDict(frozen=True)

    f0_hz: float
    words: list[PhoneSegment] = Field(default_factory=list)
    phones: list[PhoneSegment] = Field(default_factory=list)


class UtteranceRecord(BaseModel):
    """Clean, scaled-noise and noisy components of one utterance.

    ``noisy == clean + noise`` holds exactly in float32 arithmetic, the
    precision audio is stored in.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    utt_id: str
    words: tuple[str, ...]
    clean: Waveform
    noise: Waveform
    noisy: Waveform
    snr_db: float
    noise_kind: str
    split: Split

    @model_validator(mode="after")
    def _check_mix(self) -> Self:
        lengths = {self.clean.n_samples, self.noise.n_samples, self.noisy.n_samples}
        if len(lengths) != 1:
            msg = f"clean/noise/noisy lengths differ: {sorted(lengths)}"
            raise ValueError(msg)
        if self.mix_error() != 0.0:
            msg = f"noisy != clean + noise (max error {self.mix_error()})"
            raise ValueError(msg)
        return self

    def mix_error(self) -> float:
        """max |noisy - (clean + noise)| evaluated in float32."""
        clean = self.clean.samples.astype(np.float32)
        noise = self.noise.samples.astype(np.float32)
        noisy = self.noisy.samples.astype(np.float32)
        if clean.size == 0:
            return 0.0
        return float(np.max(np.abs(noisy - (clean + noise))))
