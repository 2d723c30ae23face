"""
MDT Workbench - Noise Generators and SNR Mixing

Four seeded noise kinds and exact utterance-level SNR mixing.
"""

import math

import numpy as np
from scipy.signal import butter, sosfilt

from mdt_workbench.layer.errors import InputValidationError
from mdt_workbench.models.audio import Waveform
from mdt_workbench.models.corpus import NoiseSpec

HUM_NOISE_STD = 0.05


def make_noise(spec: NoiseSpec, n_samples: int, sample_rate: int) -> Waveform:
    """Generate ``n_samples`` of noise of the given kind.

    Raises:
        InputValidationError: A frequency parameter at or above Nyquist
    """
    nyquist = sample_rate / 2
    rng = np.random.default_rng(spec.seed)
    t = np.arange(n_samples) / sample_rate

    match spec.kind:
        case "white":
            samples = rng.standard_normal(n_samples)
        case "lowpass":
            if spec.cutoff_hz >= nyquist:
                raise InputValidationError(f"cutoff {spec.cutoff_hz} Hz is not below Nyquist")
            sos = butter(4, spec.cutoff_hz / nyquist, btype="low", output="sos")
            samples = sosfilt(sos, rng.standard_normal(n_samples))
        case "amplitude_modulated":
            if spec.modulation_hz >= nyquist:
                raise InputValidationError(f"modulation {spec.modulation_hz} Hz is not below Nyquist")
            phase = rng.uniform(0.0, 2.0 * np.pi)
            envelope = 1.0 + spec.modulation_depth * np.sin(2.0 * np.pi * spec.modulation_hz * t + phase)
            samples = rng.standard_normal(n_samples) * envelope
        case "harmonic_hum":
            if spec.hum_f0_hz >= nyquist:
                raise InputValidationError(f"hum f0 {spec.hum_f0_hz} Hz is not below Nyquist")
            n_harmonics = max(1, int(0.9 * nyquist // spec.hum_f0_hz))
            phases = rng.uniform(0.0, 2.0 * np.pi, size=n_harmonics)
            samples = HUM_NOISE_STD * rng.standard_normal(n_samples)
            for h in range(1, n_harmonics + 1):
                samples += np.sin(2.0 * np.pi * h * spec.hum_f0_hz * t + phases[h - 1]) / h
        case _:
            raise InputValidationError(f"unknown noise kind: {spec.kind}")

    return Waveform(samples=samples, sample_rate=sample_rate)


def mean_power(samples: np.ndarray) -> float:
    """Mean squared amplitude over the whole signal."""
    arr = np.asarray(samples, dtype=np.float64)
    return float(np.mean(arr * arr)) if arr.size else 0.0


def snr_gain(clean_power: float, noise_power: float, snr_db: float) -> float:
    """Noise gain g with 10*log10(P_clean / (g^2 P_noise)) = snr_db (0 for +inf)."""
    if math.isinf(snr_db):
        return 0.0
    return math.sqrt(clean_power / (noise_power * 10.0 ** (snr_db / 10.0)))


def mix_at_snr(clean: Waveform, noise_raw: Waveform, snr_db: float) -> tuple[Waveform, Waveform]:
    """Scale noise to the requested global SNR and add it to the clean signal.

    Args:
        clean: Clean speech (nonzero power)
        noise_raw: Unscaled noise of the same length
        snr_db: Target SNR in dB, or +inf for clean

    Returns:
        (noisy, scaled_noise) with noisy = clean + scaled_noise

    Raises:
        InputValidationError: Length mismatch, silent clean speech, or
            zero-power noise with a finite SNR
    """
    if math.isnan(snr_db) or snr_db == -math.inf:
        raise InputValidationError(f"SNR must be finite or +inf, got {snr_db}")
    if clean.n_samples != noise_raw.n_samples:
        raise InputValidationError(
            f"length mismatch: clean {clean.n_samples}, noise {noise_raw.n_samples}"
        )
    if clean.sample_rate != noise_raw.sample_rate:
        raise InputValidationError("sample rate mismatch between clean and noise")
    clean_power = mean_power(clean.samples)
    if clean_power == 0.0:
        raise InputValidationError("clean signal has zero power")

    if math.isinf(snr_db):
        scaled = np.zeros(clean.n_samples)
        noisy = clean.samples.copy()
    else:
        noise_power = mean_power(noise_raw.samples)
        if noise_power == 0.0:
            raise InputValidationError("noise has zero power but a finite SNR was requested")
        scaled = snr_gain(clean_power, noise_power, snr_db) * noise_raw.samples
        noisy = clean.samples + scaled

    return (
        Waveform(samples=noisy, sample_rate=clean.sample_rate),
        Waveform(samples=scaled, sample_rate=clean.sample_rate),
    )


def achieved_snr_db(clean: np.ndarray, noise: np.ndarray) -> float:
    """10*log10(P_clean / P_noise); +inf for silent noise."""
    noise_power = mean_power(noise)
    if noise_power == 0.0:
        return math.inf
    return 10.0 * math.log10(mean_power(clean) / noise_power)
