"""
MDT Workbench - Log-Mel Frontend

Pre-emphasis, Hamming framing, power spectrum, triangular mel filterbank
and regression deltas. Every function is pure and deterministic.
"""

from functools import lru_cache

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from mdt_workbench.layer.errors import InputValidationError
from mdt_workbench.models.audio import (
    DeltaConfig,
    Domain,
    FrontendConfig,
    SpectroTemporal,
    Waveform,
)


def hz_to_mel(freq_hz: np.ndarray | float) -> np.ndarray:
    """Convert Hz to mel: 2595 * log10(1 + f / 700)."""
    return 2595.0 * np.log10(1.0 + np.asarray(freq_hz, dtype=np.float64) / 700.0)


def mel_to_hz(mel: np.ndarray | float) -> np.ndarray:
    """Inverse of :func:`hz_to_mel`."""
    return 700.0 * (10.0 ** (np.asarray(mel, dtype=np.float64) / 2595.0) - 1.0)


@lru_cache(maxsize=16)
def mel_filterbank(cfg: FrontendConfig) -> np.ndarray:
    """Triangular mel filterbank, shape (n_mel, n_fft // 2 + 1).

    Triangle edges are spaced linearly on the mel scale between ``f_min``
    and ``f_max``; every triangle peaks at 1. A band too narrow to contain
    any DFT bin gets a single unit weight at the bin nearest its centre, so
    no band is ever empty.

    Args:
        cfg: Frontend configuration

    Returns:
        Read-only weight matrix (nonnegative)
    """
    edges_hz = mel_to_hz(np.linspace(hz_to_mel(cfg.f_min), hz_to_mel(cfg.f_max), cfg.n_mel + 2))
    bin_hz = np.arange(cfg.n_bins) * cfg.sample_rate / cfg.n_fft

    lower = edges_hz[:-2, None]
    center = edges_hz[1:-1, None]
    upper = edges_hz[2:, None]
    rising = (bin_hz[None, :] - lower) / (center - lower)
    falling = (upper - bin_hz[None, :]) / (upper - center)
    weights = np.maximum(0.0, np.minimum(rising, falling))

    for k in np.flatnonzero(weights.sum(axis=1) == 0.0):
        weights[k, int(np.argmin(np.abs(bin_hz - edges_hz[k + 1])))] = 1.0

    weights.flags.writeable = False
    return weights


def band_centers_hz(cfg: FrontendConfig) -> np.ndarray:
    """Centre frequency of every mel band in Hz."""
    edges_hz = mel_to_hz(np.linspace(hz_to_mel(cfg.f_min), hz_to_mel(cfg.f_max), cfg.n_mel + 2))
    return np.asarray(edges_hz[1:-1])


def _check_waveform(wave: Waveform, cfg: FrontendConfig) -> None:
    if wave.sample_rate != cfg.sample_rate:
        raise InputValidationError(
            f"sample rate mismatch: waveform {wave.sample_rate} Hz, frontend {cfg.sample_rate} Hz"
        )
    if wave.n_samples < cfg.frame_len:
        raise InputValidationError(
            f"input too short: {wave.n_samples} samples < frame_len {cfg.frame_len}"
        )
    if not np.all(np.isfinite(wave.samples)):
        raise InputValidationError("invalid audio: non-finite sample")


def frame_signal(samples: np.ndarray, cfg: FrontendConfig, preemphasis: bool = True) -> np.ndarray:
    """Cut a signal into Hamming-windowed frames, shape (T, frame_len)."""
    signal = np.asarray(samples, dtype=np.float64)
    if preemphasis and cfg.preemphasis > 0.0:
        emphasized = np.empty_like(signal)
        emphasized[0] = signal[0]
        emphasized[1:] = signal[1:] - cfg.preemphasis * signal[:-1]
        signal = emphasized
    frames = sliding_window_view(signal, cfg.frame_len)[:: cfg.frame_shift]
    return frames * np.hamming(cfg.frame_len)


def power_spectrum(wave: Waveform, cfg: FrontendConfig) -> np.ndarray:
    """Magnitude-squared DFT of every frame, shape (T, n_fft // 2 + 1).

    Raises:
        InputValidationError: "input too short" or "invalid audio"
    """
    _check_waveform(wave, cfg)
    spectrum = np.fft.rfft(frame_signal(wave.samples, cfg), n=cfg.n_fft, axis=1)
    return spectrum.real**2 + spectrum.imag**2


def mel_energies(power: np.ndarray, cfg: FrontendConfig) -> np.ndarray:
    """Apply the filterbank and the energy floor to a power spectrum."""
    return np.maximum(power @ mel_filterbank(cfg).T, cfg.energy_floor)


def linear_mel_spectrogram(wave: Waveform, cfg: FrontendConfig) -> SpectroTemporal:
    """Floored mel filterbank energies (linear power domain)."""
    values = mel_energies(power_spectrum(wave, cfg), cfg)
    return SpectroTemporal.from_config(values, Domain.LINEAR_POWER, cfg)


def log_mel_spectrogram(wave: Waveform, cfg: FrontendConfig) -> SpectroTemporal:
    """Natural log of :func:`linear_mel_spectrogram`."""
    return to_log(linear_mel_spectrogram(wave, cfg))


def to_log(linear: SpectroTemporal) -> SpectroTemporal:
    """Log of a linear-power matrix; values are already floored."""
    if linear.domain is not Domain.LINEAR_POWER:
        raise InputValidationError(f"expected linear_power input, got {linear.domain}")
    return linear.with_values(np.log(linear.values), Domain.LOG)


def delta_coefficients(static: SpectroTemporal, d: DeltaConfig) -> SpectroTemporal:
    """Regression deltas over +/-W frames with edge-frame replication.

    d_t = sum_w w * (c_{t+w} - c_{t-w}) / (2 * sum_w w^2)
    """
    if static.n_frames < 1:
        raise InputValidationError("delta_coefficients needs at least one frame")
    width = d.window_half_width
    n_frames = static.n_frames
    padded = np.pad(static.values, ((width, width), (0, 0)), mode="edge")
    numerator = np.zeros_like(static.values)
    for w in range(1, width + 1):
        numerator += w * (padded[width + w : width + w + n_frames] - padded[width - w : width - w + n_frames])
    denominator = 2.0 * sum(w * w for w in range(1, width + 1))
    return static.with_values(numerator / denominator)


def observation_matrix(static_log: SpectroTemporal, d: DeltaConfig) -> np.ndarray:
    """Decoder observations: [static log-mel | delta], shape (T, 2K)."""
    if static_log.domain is not Domain.LOG:
        raise InputValidationError(f"observations need log features, got {static_log.domain}")
    delta = delta_coefficients(static_log, d)
    return np.hstack([static_log.values, delta.values])
