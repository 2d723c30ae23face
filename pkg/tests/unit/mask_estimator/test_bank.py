"""Unit tests for the per-(state, band) estimator bank."""

import numpy as np
import pytest

from mdt_workbench.layer.errors import InputValidationError
from mdt_workbench.mask_estimator.bank import (
    BankTrainingUtterance,
    label_agreement,
    pooled_baseline_mask,
    predict_mask_state_dependent,
    predict_state_masks,
    train_estimator_bank,
)
from mdt_workbench.models.audio import DeltaConfig
from mdt_workbench.models.estimator import SlotKind, SvmTrainConfig
from tests.fixtures.models import mixed_bank

FAST = SvmTrainConfig(epochs=2, min_steps=100, min_samples_per_model=20)


def slot_rule_utterances(rng: np.random.Generator) -> list[BankTrainingUtterance]:
    """One band, 30 frames each for states 0-2, none for state 3.

    State 0 is learnable from feature 0, state 1 is always reliable and
    state 2 has a single reliable frame.
    """
    features = rng.normal(size=(90, 6))
    features[:30, 0] += np.where(features[:30, 0] > 0.0, 1.5, -1.5)
    states = np.repeat([0, 1, 2], 30)
    oracle = np.zeros((90, 1), dtype=bool)
    oracle[:30, 0] = features[:30, 0] > 0.0
    oracle[30:60, 0] = True
    oracle[75, 0] = True
    return [
        BankTrainingUtterance(utt_id=f"u{i}", features=features[i::3], oracle=oracle[i::3], states=states[i::3])
        for i in range(3)
    ]


@pytest.mark.unit
class TestTrainEstimatorBank:
    """Test slot resolution and training."""

    def test_slot_rules(self, rng: np.random.Generator) -> None:
        """Test trained, constant, minority-constant and fallback slots."""
        bank = train_estimator_bank(slot_rule_utterances(rng), n_states=4, cfg=FAST)
        assert bank.kinds[:, 0].tolist() == [SlotKind.TRAINED, SlotKind.CONSTANT, SlotKind.CONSTANT, SlotKind.FALLBACK]
        assert bool(bank.labels[1, 0]) is True
        assert bool(bank.labels[2, 0]) is False
        stats = bank.stats()
        assert (stats.slots, stats.trained, stats.constant, stats.fallback) == (4, 1, 2, 1)

    def test_trained_slot_learns_its_rule(self, rng: np.random.Generator) -> None:
        """Test the trained slot separates its frames on feature 0."""
        utts = slot_rule_utterances(rng)
        bank = train_estimator_bank(utts, n_states=4, cfg=FAST)
        raw = np.concatenate([u.features for u in utts])
        states = np.concatenate([u.states for u in utts])
        masks = predict_state_masks(bank, raw)
        assert masks.shape == (4, 90, 1)
        own = states == 0
        assert np.mean(masks[0, own, 0] == (raw[own, 0] > 0.0)) >= 0.9
        assert masks[1].all()
        assert not masks[2].any()

    def test_global_standardization(self, rng: np.random.Generator) -> None:
        """Test one mean and scale over every training frame."""
        utts = slot_rule_utterances(rng)
        bank = train_estimator_bank(utts, n_states=4, cfg=FAST)
        raw = np.concatenate([u.features for u in utts])
        assert np.allclose(bank.mean, raw.mean(axis=0))
        assert np.allclose(bank.scale, raw.std(axis=0))

    def test_state_out_of_range(self, rng: np.random.Generator) -> None:
        """Test alignments must index the model set."""
        with pytest.raises(InputValidationError, match="out of range"):
            train_estimator_bank(slot_rule_utterances(rng), n_states=2, cfg=FAST)

    def test_empty_training_set(self) -> None:
        """Test at least one utterance is needed."""
        with pytest.raises(InputValidationError, match="non-empty"):
            train_estimator_bank([], n_states=3)

    def test_utterance_shapes_checked(self) -> None:
        """Test features must be 6K wide."""
        with pytest.raises(ValueError, match="feature width"):
            BankTrainingUtterance(utt_id="u", features=np.zeros((4, 5)), oracle=np.zeros((4, 1)), states=np.zeros(4))

    @pytest.mark.slow
    def test_workers_do_not_change_bank(self, rng: np.random.Generator) -> None:
        """Test process-parallel training gives the same bank."""
        utts = slot_rule_utterances(rng)
        serial = train_estimator_bank(utts, n_states=4, cfg=FAST)
        parallel = train_estimator_bank(utts, n_states=4, cfg=FAST, workers=2)
        assert np.array_equal(serial.weights, parallel.weights)
        assert np.array_equal(serial.biases, parallel.biases)
        assert np.array_equal(serial.kinds, parallel.kinds)


@pytest.mark.unit
class TestPrediction:
    """Test mask prediction from a hand-built bank."""

    def test_state_masks(self, rng: np.random.Generator) -> None:
        """Test each slot kind answers with its own rule."""
        raw = rng.normal(size=(6, 12))
        masks = predict_state_masks(mixed_bank(), raw)
        assert masks.shape == (3, 6, 2)
        assert np.array_equal(masks[0, :, 0], raw[:, 0] >= 0.0)
        assert not masks[1].any()
        assert np.array_equal(masks[2, :, 1], raw[:, 1] >= 0.0)

    def test_state_dependent_follows_alignment(self, rng: np.random.Generator) -> None:
        """Test frame t uses the slots of state alignment[t]."""
        raw = rng.normal(size=(4, 12))
        mask = predict_mask_state_dependent(mixed_bank(), raw, np.array([0, 1, 2, 1]), DeltaConfig(window_half_width=1))
        expected = np.array([raw[0, 0] >= 0.0, False, raw[2, 1] >= 0.0, False])
        assert np.array_equal(mask.values[:, 0], expected)
        assert mask.delta is not None
        assert not mask.delta[1:].any()

    def test_alignment_length(self, rng: np.random.Generator) -> None:
        """Test alignment and features must have the same frame count."""
        with pytest.raises(InputValidationError, match="alignment length"):
            predict_mask_state_dependent(mixed_bank(), rng.normal(size=(4, 12)), np.array([0, 1]))

    def test_alignment_state_range(self, rng: np.random.Generator) -> None:
        """Test states beyond the bank are refused."""
        with pytest.raises(InputValidationError, match="out of range"):
            predict_mask_state_dependent(mixed_bank(), rng.normal(size=(2, 12)), np.array([0, 3]))

    def test_pooled_baseline(self, rng: np.random.Generator) -> None:
        """Test the pooled mask ignores states."""
        raw = rng.normal(size=(5, 12))
        mask = pooled_baseline_mask(mixed_bank(), raw)
        assert np.array_equal(mask.values, np.repeat((raw[:, 1] >= 0.0)[:, None], 2, axis=1))
        assert label_agreement(mask, mask) == 1.0
