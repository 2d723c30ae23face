"""
MDT Workbench - Viterbi Decoding

Max-product dynamic programming over a DecodingGraph, and the decoders
built on it: free decoding, forced alignment and state-conditioned
decoding with per-state masks.
"""

from collections.abc import Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict

from mdt_workbench.layer.errors import InfeasibleAlignmentError, InputValidationError
from mdt_workbench.mdt_hmm.graph import NO_WORD, DecodingGraph, Grammar, build_graph, min_path_frames
from mdt_workbench.mdt_hmm.likelihood import emission_logliks
from mdt_workbench.models.hmm import HmmConfig, HmmSet, StateAlignment
from mdt_workbench.models.masks import BinaryMask


class WordSegment(BaseModel):
    """Recognized word and its frame span [start, end)."""

    model_config = ConfigDict(frozen=True)

    word: str
    start_frame: int
    end_frame: int


class ViterbiPath(BaseModel):
    """Best node path through a graph."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    nodes: np.ndarray
    states: np.ndarray
    word_ids: tuple[int, ...]
    word_starts: tuple[int, ...]
    score: float


class DecodeResult(BaseModel):
    """Decoder output."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    words: tuple[str, ...]
    alignment: StateAlignment
    score: float
    segments: tuple[WordSegment, ...] = ()
    mask_evaluations: int = 0


def viterbi(graph: DecodingGraph, emissions: np.ndarray) -> ViterbiPath:
    """Exact max-product DP.

    Ties prefer the arc from the lower source global state index; among
    final nodes, the lower global state index wins.

    Args:
        graph: Decoding graph
        emissions: (T, S) emission log-likelihoods per global state

    Returns:
        Best path, its per-frame global states and score

    Raises:
        InputValidationError: T = 0
        InfeasibleAlignmentError: No path reaches a final node
    """
    emissions = np.asarray(emissions, dtype=np.float64)
    if emissions.ndim != 2 or emissions.shape[0] == 0:
        raise InputValidationError(f"emissions must be (T, S) with T >= 1, got {emissions.shape}")
    node_emissions = emissions[:, graph.node_state]  # (T, N)
    n_frames, n_nodes = node_emissions.shape
    arc_index = np.arange(graph.n_arcs)
    starts = graph.segment_starts

    score = graph.init_logp + node_emissions[0]
    backptr = np.zeros((n_frames, n_nodes), dtype=np.int64)
    for t in range(1, n_frames):
        candidates = score[graph.arc_src] + graph.arc_logp
        best = np.maximum.reduceat(candidates, starts)
        is_best = candidates == np.repeat(best, np.diff(np.r_[starts, graph.n_arcs]))
        backptr[t] = np.minimum.reduceat(np.where(is_best, arc_index, graph.n_arcs), starts)
        score = best + node_emissions[t]

    final_scores = np.where(graph.final, score, -np.inf)
    best_score = float(final_scores.max())
    if not np.isfinite(best_score):
        raise InfeasibleAlignmentError(f"no complete path over {n_frames} frames")
    tied = np.flatnonzero(final_scores == best_score)
    node = int(tied[np.lexsort((tied, graph.node_state[tied]))[0]])

    nodes = np.empty(n_frames, dtype=np.int64)
    word_ids: list[int] = []
    word_starts: list[int] = []
    for t in range(n_frames - 1, 0, -1):
        nodes[t] = node
        arc = backptr[t, node]
        if graph.arc_word[arc] != NO_WORD:
            word_ids.append(int(graph.arc_word[arc]))
            word_starts.append(t)
        node = int(graph.arc_src[arc])
    nodes[0] = node
    if graph.init_word[node] != NO_WORD:
        word_ids.append(int(graph.init_word[node]))
        word_starts.append(0)

    return ViterbiPath(
        nodes=nodes,
        states=graph.node_state[nodes],
        word_ids=tuple(reversed(word_ids)),
        word_starts=tuple(reversed(word_starts)),
        score=best_score,
    )


def _segments(hmm: HmmSet, path: ViterbiPath) -> tuple[WordSegment, ...]:
    """Word spans: from a word's entry frame to the last frame in its states."""
    segments = []
    limits = (*path.word_starts[1:], int(path.states.shape[0]))
    for word_id, start, limit in zip(path.word_ids, path.word_starts, limits, strict=True):
        word = hmm.words[word_id]
        owned = set(hmm.word_states(word))
        end = start
        while end < limit and int(path.states[end]) in owned:
            end += 1
        segments.append(WordSegment(word=word, start_frame=start, end_frame=end))
    return tuple(segments)


def _result(hmm: HmmSet, path: ViterbiPath, mask_evaluations: int = 0) -> DecodeResult:
    return DecodeResult(
        words=tuple(hmm.words[w] for w in path.word_ids),
        alignment=StateAlignment(states=path.states),
        score=path.score,
        segments=_segments(hmm, path),
        mask_evaluations=mask_evaluations,
    )


def _stacked_mask(mask: BinaryMask | np.ndarray | None, n_frames: int, n_dims: int) -> np.ndarray | None:
    if mask is None:
        return None
    stacked = mask.stacked() if isinstance(mask, BinaryMask) else np.asarray(mask, dtype=bool)
    if stacked.shape != (n_frames, n_dims):
        raise InputValidationError(
            f"obs/mask shape mismatch: mask {stacked.shape}, expected ({n_frames}, {n_dims})"
        )
    return stacked


def viterbi_decode(
    hmm: HmmSet,
    obs: np.ndarray,
    mask: BinaryMask | np.ndarray | None = None,
    grammar: Grammar | None = None,
    cfg: HmmConfig | None = None,
) -> DecodeResult:
    """Decode one utterance with a shared (T, 2K) mask.

    Args:
        hmm: Model set
        obs: Observations (T, 2K)
        mask: BinaryMask (static + delta), raw (T, 2K) booleans, or None
            for all-reliable
        grammar: Word loop (default) or single-word grammar
        cfg: Decoding settings (silence, insertion penalty, delta rule)

    Raises:
        InputValidationError: T = 0 or obs/mask shape mismatch
    """
    cfg = cfg or HmmConfig()
    obs = np.asarray(obs, dtype=np.float64)
    if obs.ndim != 2 or obs.shape[0] == 0:
        raise InputValidationError(f"cannot decode {obs.shape} observations (T = 0)")
    stacked = _stacked_mask(mask, obs.shape[0], hmm.n_dims)
    emissions = emission_logliks(hmm, obs, stacked, cfg.delta_marginalization)
    graph = build_graph(
        hmm, grammar or Grammar.word_loop(), cfg.optional_silence, cfg.word_insertion_penalty
    )
    return _result(hmm, viterbi(graph, emissions))


def forced_align(
    hmm: HmmSet,
    obs: np.ndarray,
    mask: BinaryMask | np.ndarray | None,
    words: Sequence[str],
    cfg: HmmConfig | None = None,
    optional_silence: bool | None = None,
) -> DecodeResult:
    """Viterbi restricted to the linear state graph of a transcription.

    Raises:
        InputValidationError: Empty transcription or unknown word
        InfeasibleAlignmentError: T shorter than the shortest path
    """
    cfg = cfg or HmmConfig()
    if not words:
        raise InputValidationError("forced alignment needs a non-empty word sequence")
    for word in words:
        if word not in hmm.words:
            raise InputValidationError(f"word not in model set: {word}")
    obs = np.asarray(obs, dtype=np.float64)
    if obs.ndim != 2 or obs.shape[0] == 0:
        raise InputValidationError(f"cannot align {obs.shape} observations (T = 0)")
    needed = min_path_frames(hmm, words)
    if obs.shape[0] < needed:
        raise InfeasibleAlignmentError(
            f"{obs.shape[0]} frames cannot hold {len(words)} word(s) needing {needed} frames"
        )
    silence = cfg.optional_silence if optional_silence is None else optional_silence
    stacked = _stacked_mask(mask, obs.shape[0], hmm.n_dims)
    emissions = emission_logliks(hmm, obs, stacked, cfg.delta_marginalization)
    graph = build_graph(hmm, Grammar.transcription(words), silence, cfg.word_insertion_penalty)
    return _result(hmm, viterbi(graph, emissions))


def decode_with_state_masks(
    hmm: HmmSet,
    obs: np.ndarray,
    state_masks: np.ndarray,
    grammar: Grammar | None = None,
    cfg: HmmConfig | None = None,
) -> DecodeResult:
    """Decode where state s scores frame t under its own mask ``state_masks[s, t]``.

    Args:
        state_masks: (S, T, 2K) booleans
    """
    cfg = cfg or HmmConfig()
    obs = np.asarray(obs, dtype=np.float64)
    if obs.ndim != 2 or obs.shape[0] == 0:
        raise InputValidationError(f"cannot decode {obs.shape} observations (T = 0)")
    state_masks = np.asarray(state_masks, dtype=bool)
    expected = (hmm.n_states, obs.shape[0], hmm.n_dims)
    if state_masks.shape != expected:
        raise InputValidationError(f"state mask shape {state_masks.shape} != {expected}")
    emissions = emission_logliks(hmm, obs, state_masks, cfg.delta_marginalization)
    graph = build_graph(
        hmm, grammar or Grammar.word_loop(), cfg.optional_silence, cfg.word_insertion_penalty
    )
    return _result(hmm, viterbi(graph, emissions), mask_evaluations=obs.shape[0] * hmm.n_states)
