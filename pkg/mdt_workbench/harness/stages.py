"""
MDT Workbench - Pipeline Stages

Each stage reads the artifacts of the stages it depends on, writes its
own under the experiment output directory and is skipped when its stamp
is current. Stage names double as CLI subcommands.
"""

import math
from collections import Counter
from collections.abc import Callable
from pathlib import Path
from typing import Any

import numpy as np
import orjson
from pydantic import BaseModel, ConfigDict

from mdt_workbench.corpus.generate import (
    ANNOTATIONS_NAME,
    MANIFEST_NAME,
    base_id_of,
    generate_corpus,
    read_annotations,
    read_manifest,
    word_feature_spans,
)
from mdt_workbench.corpus.lexicon import load_lexicon
from mdt_workbench.frontend.features import linear_mel_spectrogram, observation_matrix, to_log
from mdt_workbench.frontend.io import read_feature_matrix, read_raw_audio, write_feature_matrix
from mdt_workbench.harness.artifacts import ArtifactStore, compute_digest
from mdt_workbench.harness.parallel import ordered_map
from mdt_workbench.harness.report import emit_report
from mdt_workbench.layer.errors import (
    ConfigError,
    InfeasibleAlignmentError,
    MissingArtifactError,
    StageError,
)
from mdt_workbench.layer.logger import get_logger
from mdt_workbench.mask.io import read_mask, write_mask
from mdt_workbench.mask.oracle import count_isolated_reliable, oracle_mask, reliable_fraction, with_delta
from mdt_workbench.mask_estimator.bank import (
    BankTrainingUtterance,
    label_agreement,
    pooled_baseline_mask,
    predict_mask_state_dependent,
    train_estimator_bank,
)
from mdt_workbench.mask_estimator.features import build_feature_matrix
from mdt_workbench.mask_estimator.harmonic import harmonic_decomposition
from mdt_workbench.mask_estimator.io import read_bank, write_bank
from mdt_workbench.mdt_hmm.io import read_alignment, read_hmm, write_alignment, write_hmm
from mdt_workbench.mdt_hmm.scoring import boundary_offsets, score_utterance
from mdt_workbench.mdt_hmm.state_conditioned import decode_state_conditioned
from mdt_workbench.mdt_hmm.training import HmmTrainer, TrainingUtterance
from mdt_workbench.mdt_hmm.viterbi import DecodeResult, forced_align, viterbi_decode
from mdt_workbench.models.corpus import ManifestEntry, Split
from mdt_workbench.models.experiment import (
    ALL_NOISE,
    ExperimentConfig,
    ExperimentReport,
    HypothesisStats,
    Method,
    MethodResult,
)
from mdt_workbench.models.hmm import EvalReport, HmmSet
from mdt_workbench.models.validators import format_snr, parse_snr
from mdt_workbench.seeding import derive_seed, name_key

logger = get_logger(__name__)

STATE_METHODS = {Method.STATE_DEPENDENT_ORACLE, Method.STATE_CONDITIONED_DECODE}

# artifact paths relative to the output directory
CORPUS_DIR = "corpus"
MANIFEST = f"{CORPUS_DIR}/{MANIFEST_NAME}"
FEATURE_INDEX = "features/frames.json"
HMM_FILE = "hmm/models.hmm"
MASK_INDEX = "masks/index.json"
ALIGN_INDEX = "align/index.json"
BANK_FILE = "bank/bank.svmb"
HYPOTHESES = "decode/hypotheses.jsonl"
DECODE_META = "decode/meta.json"
SUMMARY = "evaluate/summary.json"
REPORT_FILES = ("report.txt", "report.csv", "curves.dat", "report.json")
# frames a forced-aligned word boundary may sit from its annotated position
BOUNDARY_TOLERANCE = 3


class StageContext:
    """Configuration, artifact store and parallelism shared by every stage."""

    def __init__(self, cfg: ExperimentConfig, workers: int = 1) -> None:
        self.cfg = cfg
        self.store = ArtifactStore(cfg.experiment.output_dir)
        self.workers = workers
        self.runtime: dict[str, Any] = {}


class StageOutcome(BaseModel):
    model_config = ConfigDict(frozen=True)

    stage: str
    ran: bool
    elapsed_s: float
    digest: str


def feature_path(entry: ManifestEntry, kind: str) -> str:
    if kind == "clean":
        return f"features/{entry.split.value}/{base_id_of(entry)}.clean.stfm"
    if kind == "mask":
        return f"features/{entry.split.value}/{entry.utt_id}.mfeat.npy"
    return f"features/{entry.split.value}/{entry.utt_id}.{kind}.stfm"


def mask_path(entry: ManifestEntry) -> str:
    return f"masks/{entry.split.value}/{entry.utt_id}.mask"


def alignment_path(entry: ManifestEntry) -> str:
    return f"align/{entry.split.value}/{entry.utt_id}.ali"


def _write_json(path: Path, data: Any) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(orjson.dumps(data, option=orjson.OPT_INDENT_2))


def _read_json(store: ArtifactStore, rel: str, producer: str) -> Any:
    path = store.path(rel)
    if not path.exists():
        raise MissingArtifactError(rel, producer)
    return orjson.loads(path.read_bytes())


def _manifest(store: ArtifactStore) -> list[ManifestEntry]:
    path = store.path(MANIFEST)
    if not path.exists():
        raise MissingArtifactError(MANIFEST, "gen-corpus")
    return read_manifest(path)


def _by_base(entries: list[ManifestEntry]) -> list[list[ManifestEntry]]:
    groups: dict[str, list[ManifestEntry]] = {}
    for entry in entries:
        groups.setdefault(base_id_of(entry), []).append(entry)
    return list(groups.values())


def _words(cfg: ExperimentConfig) -> list[str]:
    return load_lexicon(cfg.corpus.lexicon_path, cfg.corpus.n_words).word_ids


def _observations(store: ArtifactStore, entry: ManifestEntry, cfg: ExperimentConfig, kind: str = "noisy") -> np.ndarray:
    linear = read_feature_matrix(store.path(feature_path(entry, kind)), cfg.frontend)
    return observation_matrix(to_log(linear), cfg.delta)


# Per-process state installed by the pool initializer
_WORKER: dict[str, Any] = {}


def _init_worker(state: dict[str, Any]) -> None:
    _WORKER.clear()
    _WORKER.update(state)


# gen-corpus


def run_gen_corpus(ctx: StageContext) -> list[str]:
    generate_corpus(ctx.cfg.corpus, ctx.store.path(CORPUS_DIR), ctx.workers)
    return [MANIFEST, f"{CORPUS_DIR}/{ANNOTATIONS_NAME}"]


# features


def _features_job(group: list[ManifestEntry]) -> list[tuple[str, int]]:
    cfg: ExperimentConfig = _WORKER["cfg"]
    store: ArtifactStore = _WORKER["store"]
    corpus = store.path(CORPUS_DIR)
    sr = cfg.frontend.sample_rate

    clean = read_raw_audio(corpus / group[0].clean_path, sr)
    write_feature_matrix(store.path(feature_path(group[0], "clean")), linear_mel_spectrogram(clean, cfg.frontend))

    frames = []
    for entry in group:
        noisy = read_raw_audio(corpus / entry.noisy_path, sr)
        noise = read_raw_audio(corpus / entry.noise_path, sr)
        noisy_lin = linear_mel_spectrogram(noisy, cfg.frontend)
        write_feature_matrix(store.path(feature_path(entry, "noisy")), noisy_lin)
        write_feature_matrix(store.path(feature_path(entry, "noise")), linear_mel_spectrogram(noise, cfg.frontend))

        harmonic, random = harmonic_decomposition(noisy, cfg.frontend, cfg.estimator.harmonic)
        matrix = build_feature_matrix(
            noisy_lin, harmonic, random, cfg.delta, cfg.estimator, cfg.frontend.energy_floor
        )
        np.save(store.path(feature_path(entry, "mask")), matrix)
        frames.append((entry.utt_id, noisy_lin.n_frames))
    return frames


def run_features(ctx: StageContext) -> list[str]:
    entries = _manifest(ctx.store)
    results = ordered_map(
        _features_job,
        _by_base(entries),
        ctx.workers,
        _init_worker,
        ({"cfg": ctx.cfg, "store": ctx.store},),
        chunksize=4,
    )
    frames = {utt_id: n for group in results for utt_id, n in group}
    _write_json(ctx.store.path(FEATURE_INDEX), frames)
    logger.info("Features written", utterances=len(frames), frames=sum(frames.values()))
    return [FEATURE_INDEX]


# train-hmm


def run_train_hmm(ctx: StageContext) -> list[str]:
    cfg = ctx.cfg
    train = [e for e in _manifest(ctx.store) if e.split is Split.TRAIN]
    utterances = [
        TrainingUtterance(utt_id=e.utt_id, words=e.words, obs=_observations(ctx.store, e, cfg)) for e in train
    ]
    trainer = HmmTrainer(_words(cfg), cfg.hmm, derive_seed(cfg.seed, name_key("train-hmm")), ctx.workers)
    hmm = trainer.fit(utterances)
    write_hmm(ctx.store.path(HMM_FILE), hmm)
    logger.info("HMM set written", states=hmm.n_states, mixtures=hmm.n_mixtures, dims=hmm.n_dims)
    return [HMM_FILE]


def _load_hmm(store: ArtifactStore) -> HmmSet:
    path = store.path(HMM_FILE)
    if not path.exists():
        raise MissingArtifactError(HMM_FILE, "train-hmm")
    return read_hmm(path)


# oracle-masks


def _oracle_job(entry: ManifestEntry) -> float:
    cfg: ExperimentConfig = _WORKER["cfg"]
    store: ArtifactStore = _WORKER["store"]
    clean = read_feature_matrix(store.path(feature_path(entry, "clean")), cfg.frontend)
    noise = read_feature_matrix(store.path(feature_path(entry, "noise")), cfg.frontend)
    mask = with_delta(oracle_mask(clean, noise, cfg.mask.threshold), cfg.delta, cfg.mask.delta_rule)
    write_mask(store.path(mask_path(entry)), mask)
    return reliable_fraction(mask)


def run_oracle_masks(ctx: StageContext) -> list[str]:
    entries = _manifest(ctx.store)
    fractions = ordered_map(_oracle_job, entries, ctx.workers, _init_worker, ({"cfg": ctx.cfg, "store": ctx.store},))
    _write_json(ctx.store.path(MASK_INDEX), {e.utt_id: f for e, f in zip(entries, fractions, strict=True)})
    logger.info("Oracle masks written", masks=len(entries), mean_reliable=float(np.mean(fractions)))
    return [MASK_INDEX]


# align


def _align_job(group: list[ManifestEntry]) -> tuple[list[tuple[str, bool]], list[list[int]]]:
    """Oracle state transcription of every entry in a base-utterance group.

    Also returns the (start, end) offsets of the clean alignment's word
    boundaries from the synthesizer's annotation, on the feature grid.
    """
    cfg: ExperimentConfig = _WORKER["cfg"]
    store: ArtifactStore = _WORKER["store"]
    hmm = _WORKER["hmm"]
    annotation = _WORKER["annotations"].get(base_id_of(group[0]))

    def align(entry: ManifestEntry, kind: str, mask: Any) -> DecodeResult | None:
        try:
            return forced_align(hmm, _observations(store, entry, cfg, kind), mask, entry.words, cfg.hmm)
        except InfeasibleAlignmentError as e:
            logger.warning("Forced alignment infeasible", utt_id=entry.utt_id, error=str(e))
            return None

    def offsets(result: DecodeResult | None) -> list[list[int]]:
        if result is None or annotation is None:
            return []
        reference = word_feature_spans(annotation, cfg.corpus.frame_shift, cfg.frontend)
        aligned = [(seg.word, seg.start_frame, seg.end_frame) for seg in result.segments]
        return boundary_offsets(reference, aligned).tolist()

    out = []
    if cfg.mask.align_on_noisy:
        clean_result = None
        for entry in group:
            result = align(entry, "noisy", read_mask(store.path(mask_path(entry))))
            if result is not None:
                write_alignment(store.path(alignment_path(entry)), result.alignment)
            if entry.is_clean:
                clean_result = result
            out.append((entry.utt_id, result is not None))
        return out, offsets(clean_result)

    result = align(group[0], "clean", None)
    for entry in group:
        if result is not None:
            write_alignment(store.path(alignment_path(entry)), result.alignment)
        out.append((entry.utt_id, result is not None))
    return out, offsets(result)


def boundary_summary(per_utterance: list[list[list[int]]], tolerance: int = BOUNDARY_TOLERANCE) -> dict[str, Any]:
    """Median boundary offsets and the share of utterances whose every boundary is within ``tolerance``."""
    rows = [row for offsets in per_utterance for row in offsets]
    if not rows:
        return {"utterances": 0, "words": 0, "tolerance": tolerance}
    table = np.asarray(rows, dtype=np.int64)
    within = [bool(np.all(np.abs(np.asarray(offsets)) <= tolerance)) for offsets in per_utterance]
    return {
        "utterances": len(per_utterance),
        "words": int(table.shape[0]),
        "median_start": float(np.median(table[:, 0])),
        "median_end": float(np.median(table[:, 1])),
        "max_abs": int(np.abs(table).max()),
        "tolerance": tolerance,
        "utterances_within_tolerance": float(np.mean(within)),
    }


def run_align(ctx: StageContext) -> list[str]:
    hmm = _load_hmm(ctx.store)
    entries = _manifest(ctx.store)
    annotations_path = ctx.store.path(CORPUS_DIR, ANNOTATIONS_NAME)
    annotations = read_annotations(annotations_path) if annotations_path.exists() else {}
    state = {"cfg": ctx.cfg, "store": ctx.store, "hmm": hmm, "annotations": annotations}
    results = ordered_map(_align_job, _by_base(entries), ctx.workers, _init_worker, (state,), chunksize=4)
    flat = [item for group, _ in results for item in group]
    index = {
        "aligned": [u for u, ok in flat if ok],
        "infeasible": [u for u, ok in flat if not ok],
        "boundaries": boundary_summary([rows for _, rows in results if rows]),
    }
    _write_json(ctx.store.path(ALIGN_INDEX), index)
    logger.info(
        "Oracle alignments written",
        aligned=len(index["aligned"]),
        infeasible=len(index["infeasible"]),
        on_noisy=ctx.cfg.mask.align_on_noisy,
        boundaries=index["boundaries"],
    )
    return [ALIGN_INDEX]


def _aligned_ids(store: ArtifactStore) -> set[str]:
    return set(_read_json(store, ALIGN_INDEX, "align")["aligned"])


# train-estimators


def run_train_estimators(ctx: StageContext) -> list[str]:
    cfg = ctx.cfg
    hmm = _load_hmm(ctx.store)
    aligned = _aligned_ids(ctx.store)
    train = [e for e in _manifest(ctx.store) if e.split is Split.TRAIN and e.utt_id in aligned]
    utterances = [
        BankTrainingUtterance(
            utt_id=e.utt_id,
            features=np.load(ctx.store.path(feature_path(e, "mask"))),
            oracle=read_mask(ctx.store.path(mask_path(e))),
            states=read_alignment(ctx.store.path(alignment_path(e))),
        )
        for e in train
    ]
    svm = cfg.estimator.svm
    svm = svm.model_copy(update={"seed": derive_seed(cfg.seed, name_key("train-estimators"), svm.seed)})
    bank = train_estimator_bank(utterances, hmm.n_states, svm, ctx.workers)
    write_bank(ctx.store.path(BANK_FILE), bank)
    return [BANK_FILE]


# decode


def _decode_job(entry: ManifestEntry) -> list[dict[str, Any]]:
    cfg: ExperimentConfig = _WORKER["cfg"]
    store: ArtifactStore = _WORKER["store"]
    hmm = _WORKER["hmm"]
    bank = _WORKER["bank"]
    rule = cfg.mask.delta_rule

    obs = _observations(store, entry, cfg)
    oracle = read_mask(store.path(mask_path(entry)))
    features = np.load(store.path(feature_path(entry, "mask"))) if bank is not None else None
    transcription = None
    pooled = None
    if bank is not None:
        pooled = label_agreement(pooled_baseline_mask(bank, features, cfg.delta, rule), oracle)
        if entry.utt_id in _WORKER["aligned"]:
            transcription = read_alignment(store.path(alignment_path(entry)))

    records = []
    classical = None
    for method in cfg.methods:
        evaluations = 0
        fallback = False
        if method is Method.CLASSICAL_ORACLE:
            mask = oracle
            result = classical = viterbi_decode(hmm, obs, oracle, cfg=cfg.hmm)
        elif method is Method.STATE_DEPENDENT_ORACLE:
            if transcription is None:
                fallback = True
                classical = classical or viterbi_decode(hmm, obs, oracle, cfg=cfg.hmm)
                transcription = classical.alignment
                logger.warning(
                    "No oracle alignment; using the classical decode path",
                    utt_id=entry.utt_id,
                    snr=format_snr(entry.snr_db),
                )
            mask = predict_mask_state_dependent(bank, features, transcription, cfg.delta, rule)
            result = viterbi_decode(hmm, obs, mask, cfg=cfg.hmm)
        else:
            result = decode_state_conditioned(hmm, obs, bank, features, None, cfg.hmm, cfg.delta, rule)
            mask = predict_mask_state_dependent(bank, features, result.alignment, cfg.delta, rule)
            evaluations = result.mask_evaluations
        records.append(
            {
                "utt_id": entry.utt_id,
                "method": method.value,
                "snr": format_snr(entry.snr_db),
                "noise_kind": entry.noise_kind,
                "ref": list(entry.words),
                "hyp": list(result.words),
                "frames": int(obs.shape[0]),
                "isolated_reliable": count_isolated_reliable(mask),
                "reliable_fraction": reliable_fraction(mask),
                "label_agreement": label_agreement(mask, oracle),
                "pooled_agreement": pooled if method in STATE_METHODS else None,
                "oracle_fallback": fallback,
                "mask_evaluations": evaluations,
            }
        )
    return records


def fallbacks_per_snr(records: list[dict[str, Any]]) -> dict[str, int]:
    """Count of oracle-alignment fallbacks by SNR label."""
    counts = Counter(r["snr"] for r in records if r["oracle_fallback"])
    return dict(sorted(counts.items()))


def run_decode(ctx: StageContext) -> list[str]:
    cfg = ctx.cfg
    hmm = _load_hmm(ctx.store)
    needs_bank = bool(STATE_METHODS & set(cfg.methods))
    bank = None
    aligned: set[str] = set()
    if needs_bank:
        if not ctx.store.path(BANK_FILE).exists():
            raise MissingArtifactError(BANK_FILE, "train-estimators")
        bank = read_bank(ctx.store.path(BANK_FILE))
        aligned = _aligned_ids(ctx.store)
        if bank.n_states != hmm.n_states or bank.n_bands != hmm.n_bands:
            raise ConfigError("estimator bank does not match the HMM set; rerun train-estimators")

    test = [e for e in _manifest(ctx.store) if e.split is Split.TEST]
    state = {"cfg": cfg, "store": ctx.store, "hmm": hmm, "bank": bank, "aligned": aligned}
    results = ordered_map(_decode_job, test, ctx.workers, _init_worker, (state,), chunksize=4)

    path = ctx.store.path(HYPOTHESES)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("wb") as f:
        for records in results:
            for record in records:
                f.write(orjson.dumps(record) + b"\n")
    meta = {
        "n_states": hmm.n_states,
        "n_bands": hmm.n_bands,
        "bank": bank.stats().model_dump() if bank is not None else None,
    }
    _write_json(ctx.store.path(DECODE_META), meta)
    fallbacks = fallbacks_per_snr([record for records in results for record in records])
    if fallbacks:
        logger.warning("Oracle alignment fallbacks", per_snr=fallbacks, total=sum(fallbacks.values()))
    logger.info("Test set decoded", utterances=len(test), methods=[m.value for m in cfg.methods])
    return [HYPOTHESES, DECODE_META]


# evaluate


def _method_result(method: Method, snr_db: float, kind: str, records: list[dict[str, Any]]) -> MethodResult:
    counts = EvalReport(n_words=0)
    for record in records:
        counts = counts + score_utterance(record["ref"], record["hyp"])
    pooled = [r["pooled_agreement"] for r in records if r["pooled_agreement"] is not None]
    return MethodResult(
        method=method,
        snr_db=snr_db,
        noise_kind=kind,
        counts=counts,
        isolated_reliable=float(np.mean([r["isolated_reliable"] for r in records])),
        reliable_fraction=float(np.mean([r["reliable_fraction"] for r in records])),
        label_agreement=float(np.mean([r["label_agreement"] for r in records])),
        pooled_agreement=float(np.mean(pooled)) if pooled else None,
        oracle_fallbacks=sum(bool(r["oracle_fallback"]) for r in records),
    )


def summarize(cfg: ExperimentConfig, records: list[dict[str, Any]], meta: dict[str, Any]) -> ExperimentReport:
    """Aggregate per-utterance decode records into the experiment report."""
    cells: dict[tuple[Method, float, str], list[dict[str, Any]]] = {}
    for record in records:
        method, snr = Method(record["method"]), parse_snr(record["snr"])
        cells.setdefault((method, snr, ALL_NOISE), []).append(record)
        if not math.isinf(snr):
            cells.setdefault((method, snr, record["noise_kind"]), []).append(record)

    results = []
    for method in cfg.methods:
        for kind in [ALL_NOISE, *cfg.corpus.noise_kinds]:
            for snr in cfg.snrs:
                group = cells.get((method, snr, kind))
                if group:
                    results.append(_method_result(method, snr, kind, group))

    first = cfg.methods[0].value
    frames = sum(r["frames"] for r in records if r["method"] == first)
    conditioned = [r for r in records if r["method"] == Method.STATE_CONDITIONED_DECODE.value]
    evaluations = sum(r["mask_evaluations"] for r in conditioned) if conditioned else frames * meta["n_states"]
    return ExperimentReport(
        seed=cfg.seed,
        snrs=cfg.snrs,
        methods=cfg.methods,
        noise_kinds=cfg.corpus.noise_kinds,
        results=results,
        hypothesis=HypothesisStats(
            n_bands=meta["n_bands"], n_states=meta["n_states"], frames=frames, mask_evaluations=evaluations
        ),
        bank=meta["bank"],
    )


def run_evaluate(ctx: StageContext) -> list[str]:
    path = ctx.store.path(HYPOTHESES)
    if not path.exists():
        raise MissingArtifactError(HYPOTHESES, "decode")
    records = [orjson.loads(line) for line in path.read_bytes().splitlines() if line.strip()]
    meta = _read_json(ctx.store, DECODE_META, "decode")
    report = summarize(ctx.cfg, records, meta)
    out = ctx.store.path(SUMMARY)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(report.model_dump_json(indent=2), encoding="utf-8")
    return [SUMMARY]


def load_summary(store: ArtifactStore) -> ExperimentReport:
    path = store.path(SUMMARY)
    if not path.exists():
        raise MissingArtifactError(SUMMARY, "evaluate")
    return ExperimentReport.model_validate_json(path.read_text(encoding="utf-8"))


# report


def run_report(ctx: StageContext) -> list[str]:
    report = load_summary(ctx.store).model_copy(update={"runtime": dict(ctx.runtime)})
    emit_report(report, ctx.store.root, ctx.cfg.experiment.per_noise_tables)
    return list(REPORT_FILES)


# registry


class Stage(BaseModel):
    """A named pipeline step, its inputs and its parameter fingerprint."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    name: str
    needs: Callable[[ExperimentConfig], dict[str, str]]
    params: Callable[[ExperimentConfig], Any]
    run: Callable[[StageContext], list[str]]


def _decode_needs(cfg: ExperimentConfig) -> dict[str, str]:
    needs = {"train-hmm": HMM_FILE, "oracle-masks": MASK_INDEX, "features": FEATURE_INDEX}
    if STATE_METHODS & set(cfg.methods):
        needs.update({"align": ALIGN_INDEX, "train-estimators": BANK_FILE})
    return needs


def _dump(*models: BaseModel) -> list[Any]:
    return [m.model_dump(mode="json") for m in models]


STAGES: dict[str, Stage] = {
    stage.name: stage
    for stage in (
        Stage(
            name="gen-corpus",
            needs=lambda cfg: {},
            params=lambda cfg: _dump(cfg.corpus),
            run=run_gen_corpus,
        ),
        Stage(
            name="features",
            needs=lambda cfg: {"gen-corpus": MANIFEST},
            params=lambda cfg: [*_dump(cfg.frontend, cfg.delta), cfg.estimator.model_dump(mode="json", exclude={"svm"})],
            run=run_features,
        ),
        Stage(
            name="train-hmm",
            needs=lambda cfg: {"features": FEATURE_INDEX},
            params=lambda cfg: [cfg.seed, *_dump(cfg.hmm)],
            run=run_train_hmm,
        ),
        Stage(
            name="oracle-masks",
            needs=lambda cfg: {"features": FEATURE_INDEX},
            params=lambda cfg: [cfg.mask.theta_db, cfg.mask.delta_rule.value, *_dump(cfg.delta)],
            run=run_oracle_masks,
        ),
        Stage(
            name="align",
            needs=lambda cfg: {"train-hmm": HMM_FILE, "oracle-masks": MASK_INDEX},
            params=lambda cfg: [cfg.mask.align_on_noisy],
            run=run_align,
        ),
        Stage(
            name="train-estimators",
            needs=lambda cfg: {"align": ALIGN_INDEX, "train-hmm": HMM_FILE, "oracle-masks": MASK_INDEX},
            params=lambda cfg: [cfg.seed, *_dump(cfg.estimator.svm)],
            run=run_train_estimators,
        ),
        Stage(
            name="decode",
            needs=_decode_needs,
            params=lambda cfg: [[m.value for m in cfg.methods], cfg.mask.delta_rule.value],
            run=run_decode,
        ),
        Stage(
            name="evaluate",
            needs=lambda cfg: {"decode": HYPOTHESES},
            params=lambda cfg: [cfg.seed, cfg.corpus.noise_kinds, [format_snr(s) for s in cfg.snrs]],
            run=run_evaluate,
        ),
        Stage(
            name="report",
            needs=lambda cfg: {"evaluate": SUMMARY},
            params=lambda cfg: [cfg.experiment.per_noise_tables],
            run=run_report,
        ),
    )
}


def required_stages(cfg: ExperimentConfig) -> list[str]:
    """Stages run-all executes; alignment and the bank only serve state-based methods."""
    if STATE_METHODS & set(cfg.methods):
        return list(STAGES)
    return [name for name in STAGES if name not in ("align", "train-estimators")]


def run_stage(name: str, ctx: StageContext, force: bool = False) -> StageOutcome:
    """Run one stage unless its stamp is current.

    Raises:
        MissingArtifactError: An upstream stage has not run
        StageError: The stage itself failed (partial artifacts are kept)
    """
    stage = STAGES[name]
    upstream = {dep: ctx.store.digest_of(dep, artifact) for dep, artifact in stage.needs(ctx.cfg).items()}
    digest = compute_digest(name, stage.params(ctx.cfg), upstream)
    if not force and ctx.store.is_current(name, digest):
        logger.info("Stage up to date", stage=name)
        return StageOutcome(stage=name, ran=False, elapsed_s=0.0, digest=digest)

    stage_log = logger.bind(stage=name)
    stage_log.info("Stage started", workers=ctx.workers)
    ctx.store.invalidate(name)
    with stage_log.timed("Stage finished") as finished:
        try:
            outputs = stage.run(ctx)
        except (MissingArtifactError, ConfigError):
            raise
        except Exception as e:
            raise StageError(name, e) from e
        ctx.store.record(name, digest, upstream, outputs)
        finished["outputs"] = len(outputs)
    return StageOutcome(stage=name, ran=True, elapsed_s=finished["elapsed_s"], digest=digest)
