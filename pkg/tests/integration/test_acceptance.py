"""Acceptance runs: the bundled desk experiment and the full-size bank geometry."""

import math
import os
from pathlib import Path

import numpy as np
import orjson
import pytest

from mdt_workbench.config import BUNDLED_CONFIG, load_experiment_config
from mdt_workbench.harness.experiment import run_experiment
from mdt_workbench.harness.report import format_text_report
from mdt_workbench.harness.stages import ALIGN_INDEX, BOUNDARY_TOLERANCE
from mdt_workbench.mask_estimator.bank import BankTrainingUtterance, train_estimator_bank
from mdt_workbench.models.experiment import ExperimentConfig, ExperimentReport, Method
from tests.fixtures.experiment import sample_report

AURORA_SHAPE = BUNDLED_CONFIG.parent / "aurora_shape.cfg"
LOW_SNRS = (5.0, 0.0, -5.0)


def with_output_dir(cfg: ExperimentConfig, out: Path) -> ExperimentConfig:
    return cfg.model_copy(update={"experiment": cfg.experiment.model_copy(update={"output_dir": out})})


@pytest.fixture(scope="module")
def desk(tmp_path_factory: pytest.TempPathFactory) -> tuple[ExperimentConfig, ExperimentReport]:
    """The bundled desk experiment, run once for the whole module."""
    cfg = with_output_dir(load_experiment_config(), tmp_path_factory.mktemp("desk"))
    return cfg, run_experiment(cfg, workers=min(8, os.cpu_count() or 1))


@pytest.mark.integration
@pytest.mark.slow
@pytest.mark.timeout(3600)
class TestDeskExperiment:
    """Test the desk run reproduces the expected trends."""

    def test_clean_accuracy(self, desk: tuple[ExperimentConfig, ExperimentReport]) -> None:
        """Test clean utterances with all-reliable masks are recognized at least 99% of the time."""
        _, report = desk
        assert report.result(Method.CLASSICAL_ORACLE, math.inf).accuracy >= 99.0

    def test_alignment_boundaries(self, desk: tuple[ExperimentConfig, ExperimentReport]) -> None:
        """Test forced-aligned word boundaries sit within 3 frames of the annotation on 90% of clean utterances."""
        cfg, _ = desk
        index = orjson.loads((cfg.experiment.output_dir / ALIGN_INDEX).read_bytes())
        boundaries = index["boundaries"]
        assert BOUNDARY_TOLERANCE == boundaries["tolerance"] == 3
        clean_utterances = cfg.corpus.n_words * (cfg.corpus.train_per_word + cfg.corpus.test_per_word)
        # utterances without an alignment count as misses
        within = boundaries["utterances"] * boundaries["utterances_within_tolerance"]
        assert within >= 0.9 * clean_utterances

    def test_state_dependent_accuracy_trend(self, desk: tuple[ExperimentConfig, ExperimentReport]) -> None:
        """Test state-dependent masks never lose more than 0.5% and gain most at the lowest SNR."""
        _, report = desk
        for snr in report.snrs:
            assert report.delta_tenths(snr) >= -5, f"delta acc. at {snr} dB"
        assert report.delta_tenths(-5.0) > 0
        assert report.delta_tenths(-5.0) > report.delta_tenths(20.0)

    def test_fewer_isolated_reliable_cells(self, desk: tuple[ExperimentConfig, ExperimentReport]) -> None:
        """Test state-dependent masks are less fragmented than classical ones at 5 dB and below."""
        _, report = desk
        for snr in LOW_SNRS:
            state_dependent = report.result(Method.STATE_DEPENDENT_ORACLE, snr).isolated_reliable
            classical = report.result(Method.CLASSICAL_ORACLE, snr).isolated_reliable
            assert state_dependent < classical, f"isolated reliable cells at {snr} dB"


@pytest.mark.integration
class TestFullSizeGeometry:
    """Test the 179-state, 23-band preset."""

    def test_bank_slot_count(self) -> None:
        """Test S_total x K = 179 x 23 = 4117 estimator slots."""
        cfg = load_experiment_config(AURORA_SHAPE)
        n_states = cfg.hmm.total_states(cfg.corpus.n_words)
        n_bands = cfg.frontend.n_mel
        assert (n_states, n_bands) == (179, 23)

        rng = np.random.default_rng(4117)
        # state 0 is well populated; every other state falls back to the pooled models
        states = np.concatenate([np.zeros(40, dtype=np.int64), np.repeat(np.arange(1, n_states), 4)])
        utterance = BankTrainingUtterance(
            utt_id="full_size",
            features=rng.normal(size=(states.size, 6 * n_bands)),
            oracle=rng.random((states.size, n_bands)) < 0.5,
            states=states,
        )
        stats = train_estimator_bank([utterance], n_states, cfg.estimator.svm).stats()
        assert stats.slots == 4117
        assert stats.fallback == (n_states - 1) * n_bands
        assert stats.trained + stats.constant == n_bands

    def test_hypothesis_count(self) -> None:
        """Test the report states 2^23 possible masks per frame."""
        n_bands = load_experiment_config(AURORA_SHAPE).frontend.n_mel
        assert "2^23 = 8388608 possible masks per frame" in format_text_report(sample_report(n_bands=n_bands))
