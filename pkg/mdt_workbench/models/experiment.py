"""
MDT Workbench - Experiment Models

Experiment configuration (all sections) and the experiment report.
"""

import math
from enum import StrEnum
from pathlib import Path
from typing import Any, Self

from pydantic import BaseModel, ConfigDict, Field, field_serializer, field_validator, model_validator

from mdt_workbench.models.audio import DeltaConfig, FrontendConfig
from mdt_workbench.models.corpus import CorpusConfig
from mdt_workbench.models.estimator import BankStats, EstimatorConfig
from mdt_workbench.models.hmm import EvalReport, HmmConfig
from mdt_workbench.models.masks import MaskConfig
from mdt_workbench.models.validators import format_snr, parse_snr, split_list, validate_method

ALL_NOISE = "all"


class Method(StrEnum):
    """Decoding methods compared by the experiment."""

    CLASSICAL_ORACLE = "classical_oracle"
    STATE_DEPENDENT_ORACLE = "state_dependent_oracle"
    STATE_CONDITIONED_DECODE = "state_conditioned_decode"

    @property
    def row_label(self) -> str:
        """Row name in the text report."""
        return {
            Method.CLASSICAL_ORACLE: "classical",
            Method.STATE_DEPENDENT_ORACLE: "state dep.",
            Method.STATE_CONDITIONED_DECODE: "state cond.",
        }[self]


class ExperimentSettings(BaseModel):
    """[experiment] section."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    methods: list[Method] = Field(
        default_factory=lambda: [Method.CLASSICAL_ORACLE, Method.STATE_DEPENDENT_ORACLE]
    )
    output_dir: Path = Path("runs/desk")
    workers: int = Field(default=1, ge=1)
    per_noise_tables: bool = True

    @field_validator("methods", mode="before")
    @classmethod
    def _methods(cls, v: Any) -> list[Method]:
        methods = [Method(validate_method(str(m))) for m in split_list(v)]
        if not methods:
            msg = "methods must not be empty"
            raise ValueError(msg)
        if len(set(methods)) != len(methods):
            msg = "methods must not repeat"
            raise ValueError(msg)
        return methods


class ExperimentConfig(BaseModel):
    """Complete experiment: one master seed and every config section.

    The corpus seed always equals the master seed.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    seed: int = Field(default=1234, ge=0, description="Master seed")
    corpus: CorpusConfig = Field(default_factory=CorpusConfig)
    frontend: FrontendConfig = Field(default_factory=FrontendConfig)
    delta: DeltaConfig = Field(default_factory=DeltaConfig)
    hmm: HmmConfig = Field(default_factory=HmmConfig)
    estimator: EstimatorConfig = Field(default_factory=EstimatorConfig)
    mask: MaskConfig = Field(default_factory=MaskConfig)
    experiment: ExperimentSettings = Field(default_factory=ExperimentSettings)

    @model_validator(mode="before")
    @classmethod
    def _sync_seed(cls, data: Any) -> Any:
        if not isinstance(data, dict) or "seed" not in data:
            return data
        corpus = data.get("corpus") or {}
        if isinstance(corpus, CorpusConfig):
            corpus = corpus.model_dump()
        return {**data, "corpus": {**corpus, "seed": data["seed"]}}

    @model_validator(mode="after")
    def _check(self) -> Self:
        if self.corpus.sample_rate != self.frontend.sample_rate:
            msg = (
                f"corpus sample_rate ({self.corpus.sample_rate}) != "
                f"frontend sample_rate ({self.frontend.sample_rate})"
            )
            raise ValueError(msg)
        if self.corpus.frame_shift != self.frontend.frame_shift:
            msg = "corpus frame_shift must equal frontend frame_shift"
            raise ValueError(msg)
        self.estimator.harmonic.check_window(self.frontend.sample_rate)
        return self

    @property
    def snrs(self) -> list[float]:
        """Report columns: clean first, then the test SNRs in config order."""
        return [math.inf, *self.corpus.test_snrs]

    @property
    def methods(self) -> list[Method]:
        return self.experiment.methods

    def with_seed(self, seed: int) -> "ExperimentConfig":
        return ExperimentConfig.model_validate({**self.model_dump(), "seed": seed})


class MethodResult(BaseModel):
    """Scores and mask diagnostics of one (method, SNR, noise kind) cell."""

    model_config = ConfigDict(frozen=True)

    method: Method
    snr_db: float
    noise_kind: str = ALL_NOISE
    counts: EvalReport
    isolated_reliable: float = Field(ge=0.0, description="Mean isolated reliable cells per utterance")
    reliable_fraction: float = Field(ge=0.0, le=1.0)
    label_agreement: float = Field(default=1.0, ge=0.0, le=1.0, description="Static cells agreeing with the oracle mask")
    pooled_agreement: float | None = Field(
        default=None, ge=0.0, le=1.0, description="Same, for the state-independent pooled estimators"
    )
    oracle_fallbacks: int = Field(
        default=0, ge=0, description="Utterances masked along the classical decode for want of an oracle alignment"
    )

    @field_validator("snr_db", mode="before")
    @classmethod
    def _snr(cls, v: Any) -> float:
        return parse_snr(v)

    @field_serializer("snr_db", when_used="json")
    def _snr_out(self, v: float) -> str:
        return format_snr(v)

    @property
    def accuracy(self) -> float:
        return self.counts.accuracy


class HypothesisStats(BaseModel):
    """Mask hypotheses: all 2^K binary vectors vs. one per HMM state."""

    model_config = ConfigDict(frozen=True)

    n_bands: int
    n_states: int
    frames: int = Field(default=0, ge=0, description="Test frames decoded per method")
    mask_evaluations: int = Field(default=0, ge=0, description="Per-state mask vectors evaluated")

    @property
    def possible_masks(self) -> int:
        return 2**self.n_bands


def tenths(value: float) -> int:
    """Accuracy as integer tenths of a percent (the printed precision)."""
    return int(round(value * 10.0))


class ExperimentReport(BaseModel):
    """Accuracy table, mask diagnostics and runtime metadata."""

    model_config = ConfigDict(frozen=True)

    seed: int
    snrs: list[float]
    methods: list[Method]
    noise_kinds: list[str]
    results: list[MethodResult]
    hypothesis: HypothesisStats
    bank: BankStats | None = None
    runtime: dict[str, Any] = Field(default_factory=dict)

    @field_validator("snrs", mode="before")
    @classmethod
    def _snrs(cls, v: Any) -> list[float]:
        return [parse_snr(x) for x in v]

    @field_serializer("snrs", when_used="json")
    def _snrs_out(self, v: list[float]) -> list[str]:
        return [format_snr(x) for x in v]

    def result(self, method: Method, snr_db: float, noise_kind: str = ALL_NOISE) -> MethodResult:
        for r in self.results:
            if r.method is method and r.snr_db == snr_db and r.noise_kind == noise_kind:
                return r
        msg = f"No result for {method} at {snr_db} dB ({noise_kind})"
        raise KeyError(msg)

    def accuracy_tenths(self, method: Method, snr_db: float, noise_kind: str = ALL_NOISE) -> int:
        return tenths(self.result(method, snr_db, noise_kind).accuracy)

    @property
    def has_delta_row(self) -> bool:
        return {Method.CLASSICAL_ORACLE, Method.STATE_DEPENDENT_ORACLE} <= set(self.methods)

    def delta_tenths(self, snr_db: float, noise_kind: str = ALL_NOISE) -> int:
        """State-dependent minus classical, on the reported (rounded) values."""
        return self.accuracy_tenths(
            Method.STATE_DEPENDENT_ORACLE, snr_db, noise_kind
        ) - self.accuracy_tenths(Method.CLASSICAL_ORACLE, snr_db, noise_kind)
