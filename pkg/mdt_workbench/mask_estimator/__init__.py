"""Mask estimation features, linear SVMs and the per-state estimator bank."""

from mdt_workbench.mask_estimator.bank import (
    BankTrainingUtterance,
    label_agreement,
    pooled_baseline_mask,
    predict_mask_state_dependent,
    predict_state_masks,
    train_estimator_bank,
)
from mdt_workbench.mask_estimator.features import (
    Standardizer,
    build_feature_matrix,
    flatness_feature,
    mask_features,
    noise_floor_estimate,
    subband_snr_feature,
)
from mdt_workbench.mask_estimator.harmonic import harmonic_decomposition, pitch_track
from mdt_workbench.mask_estimator.io import decode_bank, encode_bank, read_bank, write_bank
from mdt_workbench.mask_estimator.svm import svm_objective, train_svm
