"""
MDT Workbench - Corpus Generation

Enumerates base utterances per split, synthesizes them, mixes every
(noise kind x SNR) cell and writes raw float32 audio plus a manifest.
"""

from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np
import orjson
from pydantic import BaseModel, ConfigDict

from mdt_workbench.corpus.lexicon import load_lexicon
from mdt_workbench.corpus.noise import make_noise, mix_at_snr
from mdt_workbench.corpus.synth import synth_utterance
from mdt_workbench.frontend.io import read_raw_samples, write_raw_audio
from mdt_workbench.layer.errors import FormatError
from mdt_workbench.layer.logger import get_logger
from mdt_workbench.models.audio import FrontendConfig, Waveform
from mdt_workbench.models.corpus import (
    CLEAN_NOISE_KIND,
    CorpusConfig,
    Lexicon,
    ManifestEntry,
    MixSpec,
    PhoneSegment,
    Split,
    SynthAnnotation,
    UtteranceRecord,
)
from mdt_workbench.models.validators import snr_label
from mdt_workbench.seeding import split_seed

logger = get_logger(__name__)

MANIFEST_NAME = "manifest.tsv"
ANNOTATIONS_NAME = "annotations.jsonl"


class UtterancePlan(BaseModel):
    """Positional description of one base (clean) utterance."""

    model_config = ConfigDict(frozen=True)

    split: Split
    base_index: int
    base_id: str
    words: tuple[str, ...]
    synth_seed: int


def plan_utterances(cfg: CorpusConfig, lexicon: Lexicon) -> list[UtterancePlan]:
    """Base utterances of both splits, in manifest order.

    Every draw is keyed by (split, base index), so the plan does not
    depend on how generation is scheduled.
    """
    plans: list[UtterancePlan] = []
    word_ids = lexicon.word_ids
    for split in Split:
        for w, word in enumerate(word_ids):
            for rep in range(cfg.per_word(split)):
                base_index = w * cfg.per_word(split) + rep
                rng = np.random.default_rng(split_seed(cfg.seed, split.seed_bit, base_index, 0))
                words = [word]
                if rng.random() < cfg.multiword_fraction:
                    extra = int(rng.integers(1, cfg.max_sequence_len))
                    words.extend(word_ids[i] for i in rng.integers(0, len(word_ids), size=extra))
                plans.append(
                    UtterancePlan(
                        split=split,
                        base_index=base_index,
                        base_id=f"{split.value}_{word}_{rep:03d}",
                        words=tuple(words),
                        synth_seed=split_seed(cfg.seed, split.seed_bit, base_index, 1),
                    )
                )
    return plans


def _cell_tag(snr_db: float, kind: str) -> str:
    return "clean" if kind == CLEAN_NOISE_KIND else f"{kind}_snr{snr_label(snr_db)}"


def _render(
    plan: UtterancePlan, cfg: CorpusConfig, lexicon: Lexicon, out_dir: Path
) -> tuple[list[ManifestEntry], SynthAnnotation]:
    clean, annotation = synth_utterance(plan.words, lexicon, plan.synth_seed, cfg)
    clean32 = clean.samples.astype(np.float32)
    audio_dir = Path("audio") / plan.split.value
    clean_rel = audio_dir / f"{plan.base_id}.clean.f32"
    write_raw_audio(out_dir / clean_rel, clean32)

    entries = []
    for cell_index, (snr_db, kind) in enumerate(cfg.cells(plan.split)):
        utt_id = f"{plan.base_id}_{_cell_tag(snr_db, kind)}"
        mix = MixSpec(snr_db=snr_db, seed=split_seed(cfg.seed, plan.split.seed_bit, plan.base_index, 2 + cell_index))
        if mix.is_clean:
            noise32 = np.zeros_like(clean32)
        else:
            raw = make_noise(cfg.noise_spec(kind, mix.seed), clean.n_samples, cfg.sample_rate)
            _, scaled = mix_at_snr(clean, raw, mix.snr_db)
            noise32 = scaled.samples.astype(np.float32)
        # mixing is redone in float32 so the stored files satisfy noisy == clean + noise exactly
        noisy32 = clean32 + noise32
        noise_rel = audio_dir / f"{utt_id}.noise.f32"
        noisy_rel = audio_dir / f"{utt_id}.noisy.f32"
        write_raw_audio(out_dir / noise_rel, noise32)
        write_raw_audio(out_dir / noisy_rel, noisy32)
        entries.append(
            ManifestEntry(
                utt_id=utt_id,
                split=plan.split,
                words=plan.words,
                snr_db=snr_db,
                noise_kind=kind,
                clean_path=clean_rel.as_posix(),
                noise_path=noise_rel.as_posix(),
                noisy_path=noisy_rel.as_posix(),
            )
        )
    return entries, annotation


def _render_job(job: tuple[UtterancePlan, CorpusConfig, Lexicon, Path]) -> tuple[list[ManifestEntry], SynthAnnotation]:
    return _render(*job)


def generate_corpus(cfg: CorpusConfig, out_dir: Path, workers: int = 1) -> list[ManifestEntry]:
    """Generate audio and manifest under ``out_dir``.

    Args:
        cfg: Corpus configuration (master seed included)
        out_dir: Output directory (created if missing)
        workers: Worker processes; output is identical for any value

    Returns:
        Manifest entries in file order
    """
    lexicon = load_lexicon(cfg.lexicon_path, cfg.n_words)
    out_dir.mkdir(parents=True, exist_ok=True)
    plans = plan_utterances(cfg, lexicon)
    logger.info(
        "Generating corpus",
        out_dir=str(out_dir),
        base_utterances=len(plans),
        expected_entries=cfg.expected_entries(),
        workers=workers,
    )

    jobs = [(plan, cfg, lexicon, out_dir) for plan in plans]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_render_job, jobs, chunksize=8))
    else:
        results = [_render_job(job) for job in jobs]

    entries = [entry for rendered, _ in results for entry in rendered]
    write_manifest(out_dir / MANIFEST_NAME, entries)
    with (out_dir / ANNOTATIONS_NAME).open("wb") as f:
        for plan, (_, annotation) in zip(plans, results, strict=True):
            record = {"base_id": plan.base_id, **annotation.model_dump()}
            f.write(orjson.dumps(record) + b"\n")

    logger.info("Corpus written", entries=len(entries))
    return entries


def write_manifest(path: Path, entries: list[ManifestEntry]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("".join(entry.to_line() + "\n" for entry in entries), encoding="utf-8")


def read_manifest(path: Path) -> list[ManifestEntry]:
    """Parse a manifest file.

    Raises:
        FormatError: A line does not have the 8 expected fields
    """
    entries = []
    for line_no, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            entries.append(ManifestEntry.from_line(line))
        except ValueError as e:
            raise FormatError(f"{path}:{line_no}: {e}")
    return entries


def read_annotations(path: Path) -> dict[str, SynthAnnotation]:
    """Ground-truth segmentations keyed by base utterance id."""
    out = {}
    for line in path.read_bytes().splitlines():
        if line.strip():
            record = orjson.loads(line)
            out[record.pop("base_id")] = SynthAnnotation.model_validate(record)
    return out


def base_id_of(entry: ManifestEntry) -> str:
    """Base (clean) utterance id shared by every cell of an utterance."""
    return Path(entry.clean_path).name.removesuffix(".clean.f32")


def load_utterance(entry: ManifestEntry, root: Path, sample_rate: int) -> UtteranceRecord:
    """Reload the three components of a manifest entry."""
    clean = read_raw_samples(root / entry.clean_path)
    noise = read_raw_samples(root / entry.noise_path)
    noisy = read_raw_samples(root / entry.noisy_path)
    return UtteranceRecord(
        utt_id=entry.utt_id,
        words=entry.words,
        clean=Waveform(samples=clean, sample_rate=sample_rate),
        noise=Waveform(samples=noise, sample_rate=sample_rate),
        noisy=Waveform(samples=noisy, sample_rate=sample_rate),
        snr_db=entry.snr_db,
        noise_kind=entry.noise_kind,
        split=entry.split,
    )


def feature_span(segment: PhoneSegment, frame_shift: int, frontend: FrontendConfig) -> tuple[int, int]:
    """Feature frames [start, end) whose analysis window overlaps a segment.

    Annotation frame a starts at sample ``a * frame_shift``; feature frame t
    covers samples ``[t * frontend.frame_shift, t * frontend.frame_shift + frame_len)``.
    """
    first_sample = segment.start_frame * frame_shift
    stop_sample = segment.end_frame * frame_shift
    hop = frontend.frame_shift
    start = max(0, (first_sample - frontend.frame_len) // hop + 1)
    end = -(-stop_sample // hop)
    return start, max(start, end)


def word_feature_spans(
    annotation: SynthAnnotation, frame_shift: int, frontend: FrontendConfig
) -> list[tuple[str, int, int]]:
    """(word, start, end) of every annotated word on the feature-frame grid."""
    return [(seg.label, *feature_span(seg, frame_shift, frontend)) for seg in annotation.words]
