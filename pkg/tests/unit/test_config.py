"""Unit tests for configuration loading."""

import math
from pathlib import Path

import pytest
from pydantic import ValidationError

from mdt_workbench.config import BUNDLED_CONFIG, RuntimeSettings, load_corpus_config, load_experiment_config
from mdt_workbench.layer.errors import ConfigError
from mdt_workbench.models.experiment import Method


def write(path: Path, text: str) -> Path:
    path.write_text(text, encoding="utf-8")
    return path


@pytest.mark.unit
class TestBundledConfigs:
    """Test the configurations shipped with the package."""

    def test_desk_defaults(self) -> None:
        """Test the desk experiment values."""
        cfg = load_experiment_config()
        assert cfg.seed == cfg.corpus.seed == 1234
        assert cfg.corpus.n_words == 5
        assert cfg.snrs == [math.inf, 20.0, 10.0, 5.0, 0.0, -5.0]
        assert cfg.methods == [Method.CLASSICAL_ORACLE, Method.STATE_DEPENDENT_ORACLE]
        assert cfg.delta.window_half_width == 2
        assert cfg.estimator.svm.lam == 0.001
        assert cfg.experiment.output_dir.resolve() == (BUNDLED_CONFIG.parent.parent / "runs" / "desk").resolve()

    def test_aurora_shape(self) -> None:
        """Test the full-size geometry: 179 states and 23 bands."""
        cfg = load_experiment_config(BUNDLED_CONFIG.parent / "aurora_shape.cfg")
        assert cfg.hmm.total_states(cfg.corpus.n_words) == 179
        assert cfg.frontend.n_mel == 23
        assert len(cfg.methods) == 3


@pytest.mark.unit
class TestExperimentFile:
    """Test sectioned experiment files."""

    def test_svm_key_routing(self, tmp_path: Path) -> None:
        """Test [svm] keys reach the trainer, the pitch tracker and the feature settings."""
        path = write(tmp_path / "x.cfg", "[svm]\nlambda = 0.01\nvoicing_threshold = 0.4\nflatness_half_width = 3\n")
        cfg = load_experiment_config(path)
        assert cfg.estimator.svm.lam == 0.01
        assert cfg.estimator.harmonic.voicing_threshold == 0.4
        assert cfg.estimator.flatness_half_width == 3

    def test_relative_paths(self, tmp_path: Path) -> None:
        """Test output_dir resolves against the config file's directory."""
        (tmp_path / "cfgs").mkdir()
        path = write(tmp_path / "cfgs" / "x.cfg", "[experiment]\noutput_dir = out/run1\n")
        expected = (tmp_path / "cfgs" / "out" / "run1").resolve()
        assert load_experiment_config(path).experiment.output_dir.resolve() == expected

    def test_seed_drives_corpus(self, tmp_path: Path) -> None:
        """Test the experiment seed is the corpus seed."""
        path = write(tmp_path / "x.cfg", "[experiment]\nseed = 42\n")
        cfg = load_experiment_config(path)
        assert cfg.corpus.seed == 42
        assert cfg.with_seed(43).corpus.seed == 43

    def test_corpus_include(self, tmp_path: Path) -> None:
        """Test [corpus] config= reads a flat file that inline keys override."""
        write(tmp_path / "corpus.cfg", "n_words = 3\ntest_per_word = 4\n")
        path = write(tmp_path / "x.cfg", "[corpus]\nconfig = corpus.cfg\ntest_per_word = 2\n")
        corpus = load_experiment_config(path).corpus
        assert (corpus.n_words, corpus.test_per_word) == (3, 2)

    def test_unknown_section(self, tmp_path: Path) -> None:
        """Test sections outside the known six are refused."""
        with pytest.raises(ConfigError, match="decoder"):
            load_experiment_config(write(tmp_path / "x.cfg", "[decoder]\nbeam = 3\n"))

    def test_unknown_key(self, tmp_path: Path) -> None:
        """Test unknown keys in a known section are refused."""
        with pytest.raises(ValidationError):
            load_experiment_config(write(tmp_path / "x.cfg", "[hmm]\nbeam = 3\n"))

    def test_missing_file(self, tmp_path: Path) -> None:
        """Test a missing file raises ConfigError."""
        with pytest.raises(ConfigError, match="not found"):
            load_experiment_config(tmp_path / "absent.cfg")

    def test_methods_validated(self, tmp_path: Path) -> None:
        """Test repeated or unknown methods are refused."""
        for methods in ("classical_oracle, classical_oracle", "magic_masks"):
            with pytest.raises(ValidationError):
                load_experiment_config(write(tmp_path / "x.cfg", f"[experiment]\nmethods = {methods}\n"))

    def test_sample_rate_mismatch(self, tmp_path: Path) -> None:
        """Test corpus and frontend must agree on the sample rate."""
        with pytest.raises(ValidationError, match="sample_rate"):
            load_experiment_config(write(tmp_path / "x.cfg", "[frontend]\nsample_rate = 16000\n"))


@pytest.mark.unit
class TestCorpusFile:
    """Test flat corpus files."""

    def test_flat_file(self, tmp_path: Path) -> None:
        """Test key = value lines without a section header; clean is implicit."""
        corpus = load_corpus_config(write(tmp_path / "c.cfg", "n_words = 4\nnoise_kinds = white\ntest_snrs = clean, 5\n"))
        assert corpus.n_words == 4
        assert corpus.noise_kinds == ["white"]
        assert corpus.test_snrs == [5.0]


@pytest.mark.unit
class TestRuntimeSettings:
    """Test process-level settings from the environment."""

    def test_environment(self, monkeypatch: pytest.MonkeyPatch) -> None:
        """Test MDT_* variables are read."""
        monkeypatch.setenv("MDT_WORKERS", "3")
        monkeypatch.setenv("MDT_LOG_LEVEL", "DEBUG")
        settings = RuntimeSettings()
        assert (settings.workers, settings.log_level) == (3, "DEBUG")

    def test_defaults(self, monkeypatch: pytest.MonkeyPatch) -> None:
        """Test defaults without environment overrides."""
        monkeypatch.delenv("MDT_WORKERS", raising=False)
        monkeypatch.delenv("MDT_LOG_LEVEL", raising=False)
        settings = RuntimeSettings(_env_file=None)
        assert settings.workers is None
        assert settings.log_level == "INFO"
