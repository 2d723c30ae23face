"""Log-mel frontend: waveforms to spectro-temporal feature matrices."""

from mdt_workbench.frontend.features import (
    delta_coefficients,
    linear_mel_spectrogram,
    log_mel_spectrogram,
    mel_filterbank,
    observation_matrix,
    power_spectrum,
)
