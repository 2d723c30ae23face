"""
MDT Workbench - State-Conditioned Decoding

Decoding without an external state transcription: every HMM state scores
each frame under the mask predicted by its own estimators.
"""

import numpy as np

from mdt_workbench.layer.errors import InputValidationError
from mdt_workbench.mask.oracle import delta_from_static
from mdt_workbench.mask_estimator.bank import predict_state_masks
from mdt_workbench.mdt_hmm.graph import Grammar
from mdt_workbench.mdt_hmm.viterbi import DecodeResult, decode_with_state_masks
from mdt_workbench.models.audio import DeltaConfig
from mdt_workbench.models.estimator import EstimatorBank
from mdt_workbench.models.hmm import HmmConfig, HmmSet
from mdt_workbench.models.masks import DeltaRule


def state_mask_stack(
    bank: EstimatorBank, raw_features: np.ndarray, d: DeltaConfig, rule: DeltaRule = DeltaRule.AND
) -> np.ndarray:
    """(S, T, 2K) static + delta masks of every state."""
    static = predict_state_masks(bank, raw_features)
    return np.concatenate([static, delta_from_static(static, d, rule)], axis=-1)


def decode_state_conditioned(
    hmm: HmmSet,
    obs: np.ndarray,
    bank: EstimatorBank,
    raw_features: np.ndarray,
    grammar: Grammar | None = None,
    cfg: HmmConfig | None = None,
    d: DeltaConfig | None = None,
    rule: DeltaRule = DeltaRule.AND,
) -> DecodeResult:
    """Viterbi where state s at frame t uses the mask of estimator row s.

    ``mask_evaluations`` on the result is T x S_total, the number of mask
    vectors scored, against the 2^K vectors a free search would face.

    Raises:
        InputValidationError: Bank and model set disagree in S or K, or T mismatch
    """
    if bank.n_states != hmm.n_states or bank.n_bands != hmm.n_bands:
        raise InputValidationError(
            f"bank ({bank.n_states} states, {bank.n_bands} bands) does not match "
            f"model set ({hmm.n_states} states, {hmm.n_bands} bands)"
        )
    masks = state_mask_stack(bank, raw_features, d or DeltaConfig(), rule)
    return decode_with_state_masks(hmm, obs, masks, grammar, cfg)
