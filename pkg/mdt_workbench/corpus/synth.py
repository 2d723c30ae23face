"""
MDT Workbench - Speech Surrogate Synthesizer

Source-filter synthesis of lexicon words: a pulse train (voiced) or white
noise (unvoiced) excites a cascade of formant resonators whose targets are
linearly interpolated across phone boundaries.
"""

from collections.abc import Sequence

import numpy as np
from scipy.signal import lfilter

from mdt_workbench.layer.errors import InputValidationError
from mdt_workbench.models.audio import Waveform
from mdt_workbench.models.corpus import CorpusConfig, Lexicon, PhoneSegment, SynthAnnotation

PEAK_AMPLITUDE = 0.5
UNVOICED_SOURCE_STD = 0.1
N_RESONATORS = 3
# Stand-in third formant for phones specified with only two
_PAD_FORMANT_HZ = 3000.0
_PAD_BANDWIDTH_HZ = 1000.0


def resonator_coefficients(freq_hz: float, bandwidth_hz: float, sample_rate: int) -> tuple[np.ndarray, np.ndarray]:
    """Second-order resonator with unit DC gain, as (b, a) for lfilter."""
    c = -np.exp(-2.0 * np.pi * bandwidth_hz / sample_rate)
    b = 2.0 * np.exp(-np.pi * bandwidth_hz / sample_rate) * np.cos(2.0 * np.pi * freq_hz / sample_rate)
    a0 = 1.0 - b - c
    return np.array([a0]), np.array([1.0, -b, -c])


def _padded(values: list[float], pad: float) -> list[float]:
    return values + [pad] * (N_RESONATORS - len(values))


def _plan_phones(
    words: Sequence[str], lexicon: Lexicon, rng: np.random.Generator, lead: int, pauses: tuple[int, int]
) -> tuple[list[tuple[str, int, int]], list[PhoneSegment]]:
    phones: list[tuple[str, int, int]] = []
    word_segments: list[PhoneSegment] = []
    frame = lead
    for position, word in enumerate(words):
        if position:
            frame += int(rng.integers(pauses[0], pauses[1] + 1))
        start = frame
        for phone in lexicon.words[word]:
            spec = lexicon.phones[phone]
            duration = int(rng.integers(spec.min_frames, spec.max_frames + 1))
            phones.append((phone, frame, frame + duration))
            frame += duration
        word_segments.append(PhoneSegment(label=word, start_frame=start, end_frame=frame))
    return phones, word_segments


def _formant_tracks(
    phones: list[tuple[str, int, int]], lexicon: Lexicon, n_frames: int, transition: int
) -> tuple[np.ndarray, np.ndarray]:
    """Per-frame formant and bandwidth tracks, shape (n_frames, 3)."""
    freqs = np.empty((n_frames, N_RESONATORS))
    bands = np.empty((n_frames, N_RESONATORS))
    if not phones:
        freqs[:] = _PAD_FORMANT_HZ
        bands[:] = _PAD_BANDWIDTH_HZ
        return freqs, bands

    # silence and pauses take the following phone's targets (the source is zero there)
    targets = []
    covered = 0
    for phone, start, end in phones:
        spec = lexicon.phones[phone]
        f = np.array(_padded(list(spec.formants_hz), _PAD_FORMANT_HZ))
        b = np.array(_padded(list(spec.bandwidths_hz), _PAD_BANDWIDTH_HZ))
        freqs[covered:end] = f
        bands[covered:end] = b
        covered = end
        targets.append((f, b, start, end))
    freqs[covered:] = targets[-1][0]
    bands[covered:] = targets[-1][1]

    if transition > 0:
        for (prev_f, prev_b, _, prev_end), (next_f, next_b, boundary, next_end) in zip(
            targets[:-1], targets[1:], strict=True
        ):
            # no coarticulation across a pause
            if prev_end != boundary:
                continue
            lo = max(boundary - transition, 0)
            hi = min(boundary + transition, next_end)
            span = 2 * transition
            for frame in range(lo, hi):
                alpha = (frame - (boundary - transition) + 0.5) / span
                freqs[frame] = prev_f + alpha * (next_f - prev_f)
                bands[frame] = prev_b + alpha * (next_b - prev_b)
    return freqs, bands


def synth_utterance(
    words: Sequence[str],
    lexicon: Lexicon,
    seed: int,
    cfg: CorpusConfig | None = None,
    f0_hz: float | None = None,
) -> tuple[Waveform, SynthAnnotation]:
    """Synthesize a word sequence.

    Words are separated by a seeded pause. Every word starts from a silent
    vocal tract and the output is gated to the word spans, so leading,
    inter-word and trailing silence are exactly zero.

    Args:
        words: Word ids, all present in ``lexicon``
        lexicon: Phone inventory and pronunciations
        seed: Seed for pitch, durations, pauses and unvoiced excitation
        cfg: Corpus settings (rate, frame shift, silences, f0 range)
        f0_hz: Fixed pitch instead of a seeded draw

    Returns:
        Peak-normalized waveform (peak 0.5) and frame-level annotations

    Raises:
        InputValidationError: Unknown word id
    """
    cfg = cfg or CorpusConfig()
    unknown = [w for w in words if w not in lexicon.words]
    if unknown:
        raise InputValidationError(f"unknown word id(s): {unknown}")

    rng = np.random.default_rng(seed)
    f0 = float(f0_hz) if f0_hz is not None else float(rng.uniform(cfg.f0_min_hz, cfg.f0_max_hz))
    shift = cfg.frame_shift
    sr = cfg.sample_rate

    phones, word_segments = _plan_phones(
        words, lexicon, rng, cfg.leading_silence_frames, (cfg.pause_min_frames, cfg.pause_max_frames)
    )
    speech_end = phones[-1][2] if phones else cfg.leading_silence_frames
    n_frames = speech_end + cfg.trailing_silence_frames
    n_samples = n_frames * shift

    source = np.zeros(n_samples)
    period = sr / f0
    for phone, start, end in phones:
        spec = lexicon.phones[phone]
        s0, s1 = start * shift, end * shift
        if spec.voiced:
            first = int(np.ceil(s0 / period))
            positions = np.round(np.arange(first, s1 / period) * period).astype(int)
            positions = positions[(positions >= s0) & (positions < s1)]
            source[positions] = spec.gain
        else:
            source[s0:s1] = rng.standard_normal(s1 - s0) * UNVOICED_SOURCE_STD * spec.gain

    freqs, bands = _formant_tracks(phones, lexicon, n_frames, cfg.transition_frames)
    word_starts = {seg.start_frame for seg in word_segments}
    signal = source
    for r in range(N_RESONATORS):
        filtered = np.empty_like(signal)
        state = np.zeros(2)
        for frame in range(n_frames):
            if frame in word_starts:
                state = np.zeros(2)
            b, a = resonator_coefficients(freqs[frame, r], bands[frame, r], sr)
            block = slice(frame * shift, (frame + 1) * shift)
            filtered[block], state = lfilter(b, a, signal[block], zi=state)
        signal = filtered

    gate = np.zeros(n_samples, dtype=bool)
    for seg in word_segments:
        gate[seg.start_frame * shift : seg.end_frame * shift] = True
    signal = np.where(gate, signal, 0.0)

    peak = float(np.max(np.abs(signal))) if n_samples else 0.0
    if peak > 0.0:
        signal = signal * (PEAK_AMPLITUDE / peak)

    annotation = SynthAnnotation(
        f0_hz=f0,
        words=word_segments,
        phones=[PhoneSegment(label=p, start_frame=s, end_frame=e) for p, s, e in phones],
    )
    return Waveform(samples=signal, sample_rate=sr), annotation
