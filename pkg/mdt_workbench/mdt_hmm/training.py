"""
MDT Workbench - HMM Training

Flat start, segmental k-means (Viterbi training) and per-state EM
refinement of diagonal GMMs.
"""

import warnings
from collections.abc import Sequence
from concurrent.futures import ProcessPoolExecutor
from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator
from scipy.cluster.vq import kmeans2
from scipy.special import logsumexp

from mdt_workbench.layer.errors import InfeasibleAlignmentError, InputValidationError
from mdt_workbench.layer.logger import get_logger
from mdt_workbench.mdt_hmm.likelihood import LOG_2PI, emission_logliks
from mdt_workbench.mdt_hmm.viterbi import forced_align
from mdt_workbench.models.hmm import GaussianMixture, HmmConfig, HmmSet, StateAlignment
from mdt_workbench.seeding import rng_for

logger = get_logger(__name__)

MIN_WEIGHT = 1e-6
MIN_VARIANCE = 1e-8


class TrainingUtterance(BaseModel):
    """Observations (T, 2K) of one training utterance and its transcription."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    utt_id: str
    words: tuple[str, ...]
    obs: np.ndarray

    @field_validator("obs", mode="before")
    @classmethod
    def _obs(cls, v: Any) -> np.ndarray:
        arr = np.array(v, dtype=np.float64, copy=True)
        if arr.ndim != 2 or arr.shape[0] == 0:
            msg = f"observations must be a non-empty (T, 2K) matrix, got {arr.shape}"
            raise ValueError(msg)
        arr.flags.writeable = False
        return arr


def component_logliks(frames: np.ndarray, gmm: GaussianMixture) -> np.ndarray:
    """log w_m + log N(x; mu_m, var_m) for every frame and component, shape (N, M)."""
    diff = frames[:, None, :] - gmm.means[None, :, :]
    quad = np.sum(diff * diff / gmm.variances[None, :, :], axis=2)
    log_norm = np.sum(np.log(gmm.variances), axis=1) + frames.shape[1] * LOG_2PI
    return np.log(gmm.weights)[None, :] - 0.5 * (quad + log_norm[None, :])


def fit_gmm_em(
    frames: np.ndarray, init: GaussianMixture, n_iter: int, var_floor: np.ndarray
) -> tuple[GaussianMixture, list[float]]:
    """EM for a diagonal GMM with a variance floor.

    Args:
        frames: Training vectors (N, D)
        init: Starting mixture
        n_iter: EM iterations
        var_floor: Per-dimension variance floor (D,)

    Returns:
        Refined mixture and the total log-likelihood before each iteration
        and after the last one (n_iter + 1 values, nondecreasing)
    """
    frames = np.asarray(frames, dtype=np.float64)
    gmm = init
    history = []
    for _ in range(n_iter):
        joint = component_logliks(frames, gmm)
        total = logsumexp(joint, axis=1)
        history.append(float(total.sum()))
        resp = np.exp(joint - total[:, None])
        occupancy = resp.sum(axis=0)

        means = np.array(gmm.means)
        variances = np.array(gmm.variances)
        alive = occupancy > 0.0
        means[alive] = (resp[:, alive].T @ frames) / occupancy[alive, None]
        for m in np.flatnonzero(alive):
            diff = frames - means[m]
            variances[m] = np.maximum(resp[:, m] @ (diff * diff) / occupancy[m], var_floor)
        weights = np.maximum(occupancy / occupancy.sum(), MIN_WEIGHT)
        gmm = GaussianMixture(weights=weights / weights.sum(), means=means, variances=variances)

    history.append(float(logsumexp(component_logliks(frames, gmm), axis=1).sum()))
    return gmm, history


def single_gaussian(frames: np.ndarray, n_mix: int, var_floor: np.ndarray) -> GaussianMixture:
    """One Gaussian fitted to all frames, replicated ``n_mix`` times."""
    mean = frames.mean(axis=0)
    var = np.maximum(frames.var(axis=0), var_floor)
    return GaussianMixture(
        weights=np.full(n_mix, 1.0 / n_mix),
        means=np.tile(mean, (n_mix, 1)),
        variances=np.tile(var, (n_mix, 1)),
    )


def init_gmm(
    frames: np.ndarray, n_mix: int, var_floor: np.ndarray, rng: np.random.Generator, iterations: int = 10
) -> GaussianMixture:
    """k-means initialization; too few frames fall back to a single Gaussian."""
    if frames.shape[0] == 0:
        raise InputValidationError("cannot initialize a mixture without frames")
    if n_mix == 1 or frames.shape[0] < 2 * n_mix:
        return single_gaussian(frames, n_mix, var_floor)

    with warnings.catch_warnings():
        # empty clusters are handled below
        warnings.simplefilter("ignore")
        centroids, labels = kmeans2(frames, n_mix, iter=iterations, minit="points", seed=rng)

    fallback = single_gaussian(frames, 1, var_floor)
    weights = np.empty(n_mix)
    means = np.empty((n_mix, frames.shape[1]))
    variances = np.empty_like(means)
    for m in range(n_mix):
        members = frames[labels == m]
        if members.shape[0] == 0:
            weights[m] = MIN_WEIGHT
            means[m] = centroids[m]
            variances[m] = fallback.variances[0]
        else:
            weights[m] = members.shape[0] / frames.shape[0]
            means[m] = members.mean(axis=0)
            variances[m] = np.maximum(members.var(axis=0), var_floor)
    return GaussianMixture(weights=weights / weights.sum(), means=means, variances=variances)


def flat_start_states(hmm_words: Sequence[str], words: Sequence[str], cfg: HmmConfig, n_frames: int) -> np.ndarray:
    """Uniform segmentation of T frames over [silence] + word states + [silence]."""
    word_states = []
    for word in words:
        w = list(hmm_words).index(word)
        word_states.extend(range(w * cfg.states_per_word, (w + 1) * cfg.states_per_word))
    silence = list(range(len(hmm_words) * cfg.states_per_word, cfg.total_states(len(hmm_words))))
    sequence = silence + word_states + silence
    if n_frames < len(sequence):
        sequence = word_states
    if n_frames < len(sequence):
        raise InfeasibleAlignmentError(f"{n_frames} frames cannot hold {len(sequence)} states")
    bounds = (np.arange(len(sequence) + 1) * n_frames) // len(sequence)
    return np.repeat(np.array(sequence), np.diff(bounds))


def estimate_self_loops(alignments: Sequence[np.ndarray], n_states: int, prior: float) -> np.ndarray:
    """Self-loop probabilities from state sequences with a Beta prior of mean ``prior``."""
    stays = np.zeros(n_states)
    exits = np.zeros(n_states)
    for states in alignments:
        same = states[1:] == states[:-1]
        np.add.at(stays, states[:-1][same], 1.0)
        np.add.at(exits, states[:-1][~same], 1.0)
    return (stays + 2.0 * prior) / (stays + exits + 2.0)


_WORKER_STATE: dict[str, Any] = {}


def _init_align_worker(hmm: HmmSet, cfg: HmmConfig) -> None:
    _WORKER_STATE["hmm"] = hmm
    _WORKER_STATE["cfg"] = cfg


def _align_job(job: tuple[np.ndarray, tuple[str, ...]]) -> np.ndarray | None:
    obs, words = job
    try:
        result = forced_align(_WORKER_STATE["hmm"], obs, None, words, _WORKER_STATE["cfg"], optional_silence=True)
    except InfeasibleAlignmentError:
        return None
    return np.array(result.alignment.states)


class HmmTrainer:
    """Segmental k-means trainer.

    After :meth:`fit`, ``alignments`` holds the state sequences the final
    parameters were estimated from and ``pass_scores`` the total forced
    alignment score of every pass.
    """

    def __init__(self, words: Sequence[str], cfg: HmmConfig, seed: int, workers: int = 1) -> None:
        self.words = tuple(words)
        self.cfg = cfg
        self.seed = seed
        self.workers = workers
        self.n_states = cfg.total_states(len(self.words))
        self.alignments: dict[str, StateAlignment] = {}
        self.pass_scores: list[float] = []
        self.var_floor = np.empty(0)

    def _check_coverage(self, utterances: Sequence[TrainingUtterance]) -> None:
        if not utterances:
            raise InputValidationError("training set is empty")
        counts = dict.fromkeys(self.words, 0)
        for utt in utterances:
            for word in utt.words:
                if word not in counts:
                    raise InputValidationError(f"{utt.utt_id}: word not in lexicon: {word}")
                counts[word] += 1
        missing = [w for w, n in counts.items() if n < self.cfg.min_word_count]
        if missing:
            raise InputValidationError(f"word(s) with no training data: {', '.join(missing)}")

    def _fit_states(
        self,
        utterances: Sequence[TrainingUtterance],
        assignment: Sequence[np.ndarray],
        previous: HmmSet | None,
        pass_index: int,
    ) -> HmmSet:
        n_dims = utterances[0].obs.shape[1]
        n_mix = self.cfg.n_mixtures
        all_obs = np.concatenate([u.obs for u in utterances])
        all_states = np.concatenate(assignment)

        weights = np.empty((self.n_states, n_mix))
        means = np.empty((self.n_states, n_mix, n_dims))
        variances = np.empty_like(means)
        for s in range(self.n_states):
            frames = all_obs[all_states == s]
            if frames.shape[0] == 0:
                if previous is None:
                    raise InputValidationError(f"state {s} received no frames at flat start")
                logger.debug("State kept from previous pass", state=s, pass_index=pass_index)
                weights[s], means[s], variances[s] = previous.weights[s], previous.means[s], previous.variances[s]
                continue
            rng = rng_for(self.seed, pass_index, s)
            gmm = init_gmm(frames, n_mix, self.var_floor, rng, self.cfg.kmeans_iterations)
            gmm, _ = fit_gmm_em(frames, gmm, self.cfg.em_iterations, self.var_floor)
            weights[s], means[s], variances[s] = gmm.weights, gmm.means, gmm.variances

        return HmmSet(
            words=self.words,
            states_per_word=self.cfg.states_per_word,
            silence_states=self.cfg.silence_states,
            weights=weights,
            means=means,
            variances=variances,
            self_loop=estimate_self_loops(assignment, self.n_states, self.cfg.self_loop_prob),
            variance_floor=self.var_floor,
        )

    def _align(
        self, hmm: HmmSet, utterances: Sequence[TrainingUtterance], assignment: list[np.ndarray]
    ) -> list[np.ndarray]:
        jobs = [(u.obs, u.words) for u in utterances]
        if self.workers > 1:
            with ProcessPoolExecutor(
                max_workers=self.workers, initializer=_init_align_worker, initargs=(hmm, self.cfg)
            ) as pool:
                aligned = list(pool.map(_align_job, jobs, chunksize=16))
        else:
            _init_align_worker(hmm, self.cfg)
            aligned = [_align_job(job) for job in jobs]

        result = []
        for utt, previous, states in zip(utterances, assignment, aligned, strict=True):
            if states is None:
                logger.warning("Alignment infeasible; keeping previous segmentation", utt_id=utt.utt_id)
                states = previous
            result.append(states)
        return result

    def _total_score(self, hmm: HmmSet, utterances: Sequence[TrainingUtterance], assignment: Sequence[np.ndarray]) -> float:
        total = 0.0
        for utt, states in zip(utterances, assignment, strict=True):
            emissions = emission_logliks(hmm, utt.obs)
            total += float(emissions[np.arange(states.shape[0]), states].sum())
        return total

    def fit(self, utterances: Sequence[TrainingUtterance]) -> HmmSet:
        """Train on (noisy, all-reliable) observations.

        Raises:
            InputValidationError: Empty training set or a word without data
        """
        self._check_coverage(utterances)
        all_obs = np.concatenate([u.obs for u in utterances])
        self.var_floor = np.maximum(self.cfg.variance_floor_ratio * all_obs.var(axis=0), MIN_VARIANCE)

        assignment = []
        kept = []
        for utt in utterances:
            try:
                assignment.append(flat_start_states(self.words, utt.words, self.cfg, utt.obs.shape[0]))
                kept.append(utt)
            except InfeasibleAlignmentError:
                logger.warning("Utterance too short for flat start; skipped", utt_id=utt.utt_id)
        utterances = kept
        logger.info(
            "Flat start",
            utterances=len(utterances),
            frames=int(all_obs.shape[0]),
            states=self.n_states,
            mixtures=self.cfg.n_mixtures,
        )

        hmm: HmmSet | None = None
        for pass_index in range(self.cfg.training_passes):
            hmm = self._fit_states(utterances, assignment, hmm, pass_index)
            assignment = self._align(hmm, utterances, assignment)
            score = self._total_score(hmm, utterances, assignment)
            self.pass_scores.append(score)
            logger.info("Training pass", pass_index=pass_index, frame_loglik=score)

        hmm = self._fit_states(utterances, assignment, hmm, self.cfg.training_passes)
        self.alignments = {
            utt.utt_id: StateAlignment(states=states) for utt, states in zip(utterances, assignment, strict=True)
        }
        return hmm


def train_hmm(
    utterances: Sequence[TrainingUtterance],
    words: Sequence[str],
    cfg: HmmConfig,
    seed: int,
    workers: int = 1,
) -> HmmSet:
    """Train word HMMs on multi-condition features; see :class:`HmmTrainer`."""
    return HmmTrainer(words, cfg, seed, workers).fit(utterances)
