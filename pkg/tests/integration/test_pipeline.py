"""End-to-end tests of the staged experiment on a tiny corpus."""

import math
from pathlib import Path

import pytest

from mdt_workbench.harness.experiment import run_experiment
from mdt_workbench.models.experiment import ExperimentConfig, Method
from tests.fixtures.experiment import tiny_config


@pytest.mark.integration
@pytest.mark.slow
class TestPipeline:
    """Test run-all on the tiny three-method experiment."""

    def test_report_contents(self, tiny_experiment: ExperimentConfig) -> None:
        """Test every method is scored at every SNR and the report files exist."""
        report = run_experiment(tiny_experiment)
        assert report.snrs == [math.inf, 10.0, 0.0]
        assert report.methods == list(Method)
        for method in report.methods:
            for snr in report.snrs:
                result = report.result(method, snr)
                assert result.counts.n_words == 2 * 2
                assert 0.0 <= result.reliable_fraction <= 1.0
        assert report.result(Method.CLASSICAL_ORACLE, math.inf).reliable_fraction == 1.0
        assert report.has_delta_row
        assert report.hypothesis.n_states == 2 * 3 + 1
        assert report.hypothesis.mask_evaluations == report.hypothesis.frames * report.hypothesis.n_states
        assert report.bank is not None
        assert report.bank.slots == 7 * 8

        out = tiny_experiment.experiment.output_dir
        text = (out / "report.txt").read_text(encoding="utf-8")
        assert "delta acc." in text
        assert "state cond." in text
        assert len((out / "report.csv").read_text(encoding="utf-8").splitlines()) == 1 + 3 * 3 * 3

    def test_rerun_is_up_to_date(self, tiny_experiment: ExperimentConfig) -> None:
        """Test a second run reuses every artifact and reproduces the report."""
        run_experiment(tiny_experiment)
        report_txt = tiny_experiment.experiment.output_dir / "report.txt"
        first = report_txt.read_bytes()
        again = run_experiment(tiny_experiment)
        assert not any(info["ran"] for info in again.runtime["stages"].values())
        assert report_txt.read_bytes() == first

    def test_workers_do_not_change_results(self, tmp_path: Path) -> None:
        """Test one and two worker processes give byte-identical reports."""
        texts = []
        for workers in (1, 2):
            cfg = tiny_config(tmp_path / f"w{workers}")
            run_experiment(cfg, workers=workers)
            texts.append((cfg.experiment.output_dir / "report.txt").read_bytes())
        assert texts[0] == texts[1]

    def test_classical_only_skips_state_stages(self, tmp_path: Path) -> None:
        """Test alignment and estimator training are skipped without state methods."""
        cfg = tiny_config(tmp_path / "classical", methods="classical_oracle")
        report = run_experiment(cfg)
        assert "align" not in report.runtime["stages"]
        assert "train-estimators" not in report.runtime["stages"]
        assert report.bank is None
        assert not report.has_delta_row
