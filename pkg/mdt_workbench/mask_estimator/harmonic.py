"""
MDT Workbench - Harmonic / Random Decomposition

Autocorrelation pitch tracking per frame and a split of each voiced
frame's power spectrum into bins near pitch harmonics and the remainder.
"""

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from mdt_workbench.frontend.features import mel_energies, power_spectrum
from mdt_workbench.models.audio import Domain, FrontendConfig, SpectroTemporal, Waveform
from mdt_workbench.models.estimator import HarmonicConfig


def pitch_track(wave: Waveform, frontend: FrontendConfig, cfg: HarmonicConfig) -> np.ndarray:
    """f0 in Hz per frontend frame, 0 for unvoiced frames.

    Each frame is analysed over ``cfg.pitch_window`` samples centred on the
    frame centre (zero-padded at the edges). The lag with the largest
    normalized autocorrelation in [sr / f0_max, sr / f0_min] wins; the frame
    is voiced when that peak reaches ``voicing_threshold``.
    """
    sr = frontend.sample_rate
    n_frames = frontend.n_frames(wave.n_samples)
    size = cfg.pitch_window
    half = size // 2
    padded = np.pad(wave.samples, (half, size))
    centers = np.arange(n_frames) * frontend.frame_shift + frontend.frame_len // 2
    windows = sliding_window_view(padded, size)[centers]  # centre c starts at c - half + half
    windows = windows - windows.mean(axis=1, keepdims=True)

    spectrum = np.fft.rfft(windows, n=2 * size, axis=1)
    acf = np.fft.irfft(spectrum.real**2 + spectrum.imag**2, n=2 * size, axis=1)[:, :size]
    min_lag = max(1, int(np.floor(sr / cfg.f0_max_hz)))
    max_lag = min(size - 1, int(np.ceil(sr / cfg.f0_min_hz)))

    energy = acf[:, 0]
    f0 = np.zeros(n_frames)
    active = energy > 0.0
    if not np.any(active):
        return f0
    ratios = acf[active, min_lag : max_lag + 1] / energy[active, None]
    best = np.argmax(ratios, axis=1)
    voiced = ratios[np.arange(best.shape[0]), best] >= cfg.voicing_threshold
    lags = (best + min_lag).astype(np.float64)
    f0[np.flatnonzero(active)[voiced]] = sr / lags[voiced]
    return f0


def harmonic_bins(f0_hz: float, frontend: FrontendConfig, half_width: int) -> np.ndarray:
    """Boolean (n_bins,) selecting DFT bins within +/- half_width of each f0 multiple."""
    selected = np.zeros(frontend.n_bins, dtype=bool)
    if f0_hz <= 0.0:
        return selected
    nyquist = frontend.sample_rate / 2
    harmonics = np.arange(1, int(nyquist // f0_hz) + 1) * f0_hz
    centres = np.round(harmonics * frontend.n_fft / frontend.sample_rate).astype(int)
    for offset in range(-half_width, half_width + 1):
        idx = centres + offset
        selected[idx[(idx >= 0) & (idx < frontend.n_bins)]] = True
    return selected


def harmonic_decomposition(
    noisy: Waveform, frontend: FrontendConfig, cfg: HarmonicConfig | None = None
) -> tuple[SpectroTemporal, SpectroTemporal]:
    """Harmonic and random log-mel components of a (noisy) waveform.

    Voiced frames split their power spectrum into harmonic bins and the
    rest; unvoiced frames put everything in the random part. Both parts go
    through the mel filterbank, the energy floor and the log.

    Raises:
        InputValidationError: "input too short" or "invalid audio"
    """
    cfg = cfg or HarmonicConfig()
    power = power_spectrum(noisy, frontend)
    f0 = pitch_track(noisy, frontend, cfg)

    selection = np.zeros(power.shape, dtype=bool)
    for t in np.flatnonzero(f0 > 0.0):
        selection[t] = harmonic_bins(float(f0[t]), frontend, cfg.harmonic_half_width)

    harmonic = np.log(mel_energies(np.where(selection, power, 0.0), frontend))
    random = np.log(mel_energies(np.where(selection, 0.0, power), frontend))
    return (
        SpectroTemporal.from_config(harmonic, Domain.LOG, frontend),
        SpectroTemporal.from_config(random, Domain.LOG, frontend),
    )
