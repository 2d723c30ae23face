"""Unit tests for domain models."""

import numpy as np
import pytest
from pydantic import ValidationError

from mdt_workbench.models.hmm import SILENCE, GaussianMixture, HmmConfig, HmmSet
from tests.fixtures.models import toy_hmm


@pytest.mark.unit
class TestHmmConfig:
    """Test topology settings."""

    def test_aurora_preset(self) -> None:
        """Test 11 words x 16 states + 3 silence states = 179."""
        preset = HmmConfig.aurora_preset()
        assert preset.states_per_word == 16
        assert preset.total_states(11) == 179

    def test_preset_overrides(self) -> None:
        """Test overrides replace preset values."""
        assert HmmConfig.aurora_preset(n_mixtures=2).n_mixtures == 2

    def test_positive_insertion_penalty_rejected(self) -> None:
        """Test the penalty is a log-score and cannot reward words."""
        with pytest.raises(ValidationError):
            HmmConfig(word_insertion_penalty=1.0)


@pytest.mark.unit
class TestHmmSet:
    """Test the global state index space."""

    def test_every_state_has_one_owner(self) -> None:
        """Test global indices map onto (word, local state) exactly once."""
        hmm = toy_hmm(words=("a", "b", "c"), states_per_word=3, silence_states=2)
        owners = [hmm.owner(s) for s in range(hmm.n_states)]
        assert len(set(owners)) == hmm.n_states == 11
        assert owners[0] == ("a", 0)
        assert owners[5] == ("b", 2)
        assert owners[9:] == [(SILENCE, 0), (SILENCE, 1)]

    def test_owner_out_of_range(self) -> None:
        """Test an index past the silence model is refused."""
        with pytest.raises(ValueError, match="out of range"):
            toy_hmm().owner(5)

    def test_self_loop_bounds(self) -> None:
        """Test transition probabilities must stay inside (0, 1)."""
        hmm = toy_hmm()
        with pytest.raises(ValidationError, match="self-loop"):
            HmmSet.model_validate({**dict(hmm), "self_loop": np.ones(hmm.n_states)})

    def test_arrays_read_only(self) -> None:
        """Test trained parameters cannot be modified in place."""
        with pytest.raises(ValueError):
            toy_hmm().means[0, 0, 0] = 1.0


@pytest.mark.unit
class TestGaussianMixture:
    """Test per-state mixture validation."""

    def test_components(self) -> None:
        """Test the component count follows the weights."""
        gmm = GaussianMixture(weights=[0.25, 0.75], means=np.zeros((2, 4)), variances=np.ones((2, 4)))
        assert gmm.n_components == 2

    def test_weights_sum_to_one(self) -> None:
        """Test unnormalized weights are refused."""
        with pytest.raises(ValidationError, match="sum to 1"):
            GaussianMixture(weights=[0.5, 0.6], means=np.zeros((2, 4)), variances=np.ones((2, 4)))

    def test_shape_agreement(self) -> None:
        """Test means and variances must match the weights."""
        with pytest.raises(ValidationError, match="disagree"):
            GaussianMixture(weights=[1.0], means=np.zeros((2, 4)), variances=np.ones((2, 4)))

    def test_positive_variances(self) -> None:
        """Test zero variance is refused."""
        with pytest.raises(ValidationError, match="positive"):
            GaussianMixture(weights=[1.0], means=np.zeros((1, 2)), variances=np.zeros((1, 2)))
