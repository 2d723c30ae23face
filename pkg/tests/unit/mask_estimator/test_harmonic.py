"""Unit tests for pitch tracking and the harmonic/random split."""

import numpy as np
import pytest

from mdt_workbench.frontend.features import log_mel_spectrogram
from mdt_workbench.mask_estimator.harmonic import harmonic_bins, harmonic_decomposition, pitch_track
from mdt_workbench.models.audio import FrontendConfig
from mdt_workbench.models.estimator import HarmonicConfig
from tests.fixtures.signals import pulse_train, white_noise


@pytest.mark.unit
class TestPitchTrack:
    """Test autocorrelation pitch tracking."""

    @pytest.mark.parametrize("f0", [100.0, 200.0])
    def test_pulse_train(self, frontend_cfg: FrontendConfig, f0: float) -> None:
        """Test every frame of a periodic pulse train is voiced at its f0."""
        track = pitch_track(pulse_train(f0), frontend_cfg, HarmonicConfig())
        assert track.shape == (frontend_cfg.n_frames(3200),)
        assert np.allclose(track, f0)

    def test_white_noise_mostly_unvoiced(self, frontend_cfg: FrontendConfig) -> None:
        """Test noise rarely passes the voicing threshold."""
        track = pitch_track(white_noise(seed=3), frontend_cfg, HarmonicConfig())
        assert np.mean(track > 0.0) < 0.1

    def test_silence_unvoiced(self, frontend_cfg: FrontendConfig) -> None:
        """Test an all-zero signal has no pitch."""
        silent = white_noise(std=0.0)
        assert not np.any(pitch_track(silent, frontend_cfg, HarmonicConfig()))

    def test_window_must_hold_two_periods(self) -> None:
        """Test the pitch window check against the lowest f0."""
        with pytest.raises(ValueError, match="two periods"):
            HarmonicConfig(pitch_window=200).check_window(8000)
        HarmonicConfig().check_window(8000)


@pytest.mark.unit
class TestHarmonicSplit:
    """Test bin selection and the log-mel components."""

    def test_harmonic_bins(self, frontend_cfg: FrontendConfig) -> None:
        """Test bins within one of every multiple of 250 Hz (8 bins apart)."""
        selected = harmonic_bins(250.0, frontend_cfg, half_width=1)
        assert selected.shape == (frontend_cfg.n_bins,)
        assert selected[[7, 8, 9, 15, 16, 17, 127, 128]].all()
        assert not selected[[0, 5, 12, 20]].any()
        assert selected.sum() == 15 * 3 + 2

    def test_unvoiced_bins_empty(self, frontend_cfg: FrontendConfig) -> None:
        """Test f0 = 0 selects nothing."""
        assert not harmonic_bins(0.0, frontend_cfg, 1).any()

    def test_unvoiced_frames_are_all_random(self, frontend_cfg: FrontendConfig) -> None:
        """Test unvoiced frames put their whole spectrum in the random part."""
        wave = white_noise(seed=5)
        harmonic, random = harmonic_decomposition(wave, frontend_cfg)
        unvoiced = pitch_track(wave, frontend_cfg, HarmonicConfig()) == 0.0
        assert unvoiced.any()
        assert np.all(harmonic.values[unvoiced] == np.log(frontend_cfg.energy_floor))
        assert np.allclose(random.values[unvoiced], log_mel_spectrogram(wave, frontend_cfg).values[unvoiced])

    def test_pulse_train_energy_is_harmonic(self, frontend_cfg: FrontendConfig) -> None:
        """Test a pulse train's energy lands mostly in the harmonic part."""
        harmonic, random = harmonic_decomposition(pulse_train(100.0), frontend_cfg)
        assert np.exp(harmonic.values).sum() > np.exp(random.values).sum()
