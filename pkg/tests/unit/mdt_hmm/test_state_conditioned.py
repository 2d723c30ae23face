"""Unit tests for state-conditioned decoding."""

import numpy as np
import pytest

from mdt_workbench.layer.errors import InputValidationError
from mdt_workbench.mdt_hmm.state_conditioned import decode_state_conditioned, state_mask_stack
from mdt_workbench.mdt_hmm.viterbi import viterbi_decode
from mdt_workbench.models.audio import DeltaConfig
from mdt_workbench.models.hmm import HmmSet
from tests.fixtures.models import constant_bank, mixed_bank, observations_for

B_UTTERANCE = [4] * 3 + [2] * 3 + [3] * 3 + [4] * 3


@pytest.mark.unit
class TestStateConditionedDecoding:
    """Test decoding where every state applies its own mask."""

    def test_all_reliable_bank_matches_plain_decode(self, hmm: HmmSet, rng: np.random.Generator) -> None:
        """Test a bank answering reliable everywhere reduces to all-reliable decoding."""
        obs = observations_for(hmm, B_UTTERANCE)
        raw = rng.normal(size=(len(B_UTTERANCE), 6 * hmm.n_bands))
        result = decode_state_conditioned(hmm, obs, constant_bank(hmm.n_states, hmm.n_bands), raw)
        plain = viterbi_decode(hmm, obs)
        assert result.words == plain.words == ("b",)
        assert result.score == pytest.approx(plain.score)
        assert result.mask_evaluations == len(B_UTTERANCE) * hmm.n_states

    def test_bank_must_match_models(self, hmm: HmmSet, rng: np.random.Generator) -> None:
        """Test S and K of bank and model set must agree."""
        raw = rng.normal(size=(len(B_UTTERANCE), 6 * hmm.n_bands))
        with pytest.raises(InputValidationError, match="does not match"):
            decode_state_conditioned(hmm, observations_for(hmm, B_UTTERANCE), constant_bank(3, hmm.n_bands), raw)

    def test_mask_stack_shape(self, rng: np.random.Generator) -> None:
        """Test the per-state stack holds static and delta halves."""
        raw = rng.normal(size=(7, 12))
        stack = state_mask_stack(mixed_bank(), raw, DeltaConfig(window_half_width=1))
        assert stack.shape == (3, 7, 4)
        assert not stack[1].any()
        assert np.array_equal(stack[0, :, 0], raw[:, 0] >= 0.0)
