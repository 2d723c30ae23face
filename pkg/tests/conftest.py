"""Pytest configuration and fixtures for MDT Workbench tests."""

from pathlib import Path

import numpy as np
import pytest

from mdt_workbench.models.audio import DeltaConfig, FrontendConfig
from mdt_workbench.models.experiment import ExperimentConfig
from mdt_workbench.models.hmm import HmmSet
from tests.fixtures.experiment import tiny_config
from tests.fixtures.models import toy_hmm


@pytest.fixture
def frontend_cfg() -> FrontendConfig:
    """Default 8 kHz log-mel frontend."""
    return FrontendConfig()


@pytest.fixture
def delta_cfg() -> DeltaConfig:
    """Delta window with W = 2."""
    return DeltaConfig()


@pytest.fixture
def rng() -> np.random.Generator:
    """Seeded generator for test data."""
    return np.random.default_rng(20240601)


@pytest.fixture
def hmm() -> HmmSet:
    """Two-word toy HMM: states a0 a1 b0 b1 sil with well separated means."""
    return toy_hmm()


@pytest.fixture
def tiny_experiment(tmp_path: Path) -> ExperimentConfig:
    """Tiny three-method experiment writing under tmp_path."""
    return tiny_config(tmp_path / "run")
