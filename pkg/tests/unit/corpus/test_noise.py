"""Unit tests for noise generators and SNR mixing."""

import math

import numpy as np
import pytest
from pydantic import ValidationError

from mdt_workbench.corpus.noise import achieved_snr_db, make_noise, mix_at_snr
from mdt_workbench.layer.errors import InputValidationError
from mdt_workbench.models.audio import Waveform
from mdt_workbench.models.corpus import NoiseSpec
from tests.fixtures.signals import tone

N_SAMPLES = 8000


@pytest.mark.unit
class TestMakeNoise:
    """Test the seeded noise generators."""

    @pytest.mark.parametrize("kind", ["white", "lowpass", "amplitude_modulated", "harmonic_hum"])
    def test_deterministic(self, kind: str) -> None:
        """Test the same seed gives the same noise and another seed does not."""
        a = make_noise(NoiseSpec(kind=kind, seed=11), N_SAMPLES, 8000)
        b = make_noise(NoiseSpec(kind=kind, seed=11), N_SAMPLES, 8000)
        c = make_noise(NoiseSpec(kind=kind, seed=12), N_SAMPLES, 8000)
        np.testing.assert_array_equal(a.samples, b.samples)
        assert not np.array_equal(a.samples, c.samples)
        assert a.n_samples == N_SAMPLES

    def test_lowpass_spectrum(self) -> None:
        """Test lowpass noise keeps little power above twice the cutoff."""
        noise = make_noise(NoiseSpec(kind="lowpass", seed=3, cutoff_hz=1000.0), N_SAMPLES, 8000)
        power = np.abs(np.fft.rfft(noise.samples)) ** 2
        freqs = np.fft.rfftfreq(N_SAMPLES, 1.0 / 8000)
        assert power[freqs > 2000.0].sum() / power.sum() < 0.05

    def test_cutoff_above_nyquist(self) -> None:
        """Test a lowpass cutoff at Nyquist is refused."""
        with pytest.raises(InputValidationError, match="Nyquist"):
            make_noise(NoiseSpec(kind="lowpass", seed=0, cutoff_hz=4000.0), 100, 8000)

    def test_unknown_kind(self) -> None:
        """Test noise kinds are validated by NoiseSpec."""
        with pytest.raises(ValidationError):
            NoiseSpec(kind="brown", seed=0)


@pytest.mark.unit
class TestMixAtSnr:
    """Test utterance-level SNR mixing."""

    @pytest.mark.parametrize("kind", ["white", "lowpass", "amplitude_modulated", "harmonic_hum"])
    @pytest.mark.parametrize("snr_db", [20.0, 5.0, 0.0, -5.0])
    def test_achieves_target(self, kind: str, snr_db: float) -> None:
        """Test the global SNR lands within 0.01 dB of the target."""
        clean = tone(440.0, n_samples=N_SAMPLES)
        raw = make_noise(NoiseSpec(kind=kind, seed=5), N_SAMPLES, 8000)
        noisy, scaled = mix_at_snr(clean, raw, snr_db)
        assert achieved_snr_db(clean.samples, scaled.samples) == pytest.approx(snr_db, abs=0.01)
        np.testing.assert_array_equal(noisy.samples, clean.samples + scaled.samples)

    def test_clean_condition(self) -> None:
        """Test +inf dB returns the clean signal and zero noise."""
        clean = tone(440.0)
        raw = make_noise(NoiseSpec(kind="white", seed=1), clean.n_samples, 8000)
        noisy, scaled = mix_at_snr(clean, raw, math.inf)
        np.testing.assert_array_equal(noisy.samples, clean.samples)
        assert not np.any(scaled.samples)

    def test_silent_clean(self) -> None:
        """Test zero-power speech cannot be mixed."""
        silent = Waveform(samples=np.zeros(100), sample_rate=8000)
        raw = make_noise(NoiseSpec(kind="white", seed=1), 100, 8000)
        with pytest.raises(InputValidationError, match="zero power"):
            mix_at_snr(silent, raw, 10.0)

    def test_silent_noise(self) -> None:
        """Test zero-power noise with a finite SNR."""
        silent = Waveform(samples=np.zeros(1600), sample_rate=8000)
        with pytest.raises(InputValidationError, match="zero power"):
            mix_at_snr(tone(440.0), silent, 10.0)

    def test_length_mismatch(self) -> None:
        """Test clean and noise must have equal length."""
        raw = make_noise(NoiseSpec(kind="white", seed=1), 100, 8000)
        with pytest.raises(InputValidationError, match="length mismatch"):
            mix_at_snr(tone(440.0), raw, 10.0)

    def test_nan_snr(self) -> None:
        """Test NaN is not an SNR."""
        clean = tone(440.0)
        with pytest.raises(InputValidationError):
            mix_at_snr(clean, clean, math.nan)
