"""
MDT Workbench - Decoding Graphs

Node/arc graphs over global HMM states: the connected-word loop, a
single-word grammar and the linear graph of a transcription. Several
nodes may share a global state (e.g. leading and inter-word silence).
"""

from collections.abc import Sequence
from enum import StrEnum

import numpy as np
from pydantic import BaseModel, ConfigDict

from mdt_workbench.layer.errors import InputValidationError
from mdt_workbench.models.hmm import HmmSet

NO_WORD = -1


class GrammarKind(StrEnum):
    WORD_LOOP = "word_loop"
    SINGLE_WORD = "single_word"
    TRANSCRIPTION = "transcription"


class Grammar(BaseModel):
    """What the decoder may recognize."""

    model_config = ConfigDict(frozen=True)

    kind: GrammarKind
    words: tuple[str, ...] = ()

    @classmethod
    def word_loop(cls) -> "Grammar":
        return cls(kind=GrammarKind.WORD_LOOP)

    @classmethod
    def single_word(cls, word: str) -> "Grammar":
        return cls(kind=GrammarKind.SINGLE_WORD, words=(word,))

    @classmethod
    def transcription(cls, words: Sequence[str]) -> "Grammar":
        if not words:
            raise InputValidationError("transcription must contain at least one word")
        return cls(kind=GrammarKind.TRANSCRIPTION, words=tuple(words))


class DecodingGraph:
    """Arc-list graph consumed by :func:`mdt_workbench.mdt_hmm.viterbi.viterbi`.

    Arcs are sorted by (destination node, source global state, source node)
    so that the first maximizing arc of each destination has the lowest
    source state index.
    """

    def __init__(
        self,
        node_state: np.ndarray,
        arc_src: np.ndarray,
        arc_dst: np.ndarray,
        arc_logp: np.ndarray,
        arc_word: np.ndarray,
        init_logp: np.ndarray,
        init_word: np.ndarray,
        final: np.ndarray,
    ) -> None:
        self.node_state = np.asarray(node_state, dtype=np.int64)
        n_nodes = self.node_state.shape[0]
        src = np.asarray(arc_src, dtype=np.int64)
        dst = np.asarray(arc_dst, dtype=np.int64)
        if n_nodes == 0:
            raise InputValidationError("graph has no nodes")
        if np.any(np.bincount(dst, minlength=n_nodes) == 0):
            raise InputValidationError("every node needs at least one incoming arc")

        order = np.lexsort((src, self.node_state[src], dst))
        self.arc_src = src[order]
        self.arc_dst = dst[order]
        self.arc_logp = np.asarray(arc_logp, dtype=np.float64)[order]
        self.arc_word = np.asarray(arc_word, dtype=np.int64)[order]
        self.init_logp = np.asarray(init_logp, dtype=np.float64)
        self.init_word = np.asarray(init_word, dtype=np.int64)
        self.final = np.asarray(final, dtype=bool)
        self.segment_starts = np.flatnonzero(np.r_[True, self.arc_dst[1:] != self.arc_dst[:-1]])

    @property
    def n_nodes(self) -> int:
        return int(self.node_state.shape[0])

    @property
    def n_arcs(self) -> int:
        return int(self.arc_src.shape[0])


class _Builder:
    def __init__(self) -> None:
        self.node_state: list[int] = []
        self.arcs: list[tuple[int, int, float, int]] = []
        self.init: dict[int, tuple[float, int]] = {}
        self.final: set[int] = set()

    def chain(self, states: Sequence[int], log_self: np.ndarray, log_exit: np.ndarray) -> list[int]:
        """Left-to-right node chain with self-loops and forward arcs."""
        nodes = []
        for state in states:
            node = len(self.node_state)
            self.node_state.append(state)
            self.arcs.append((node, node, float(log_self[state]), NO_WORD))
            if nodes:
                prev = nodes[-1]
                self.arcs.append((prev, node, float(log_exit[self.node_state[prev]]), NO_WORD))
            nodes.append(node)
        return nodes

    def link(self, src: int, dst: int, log_exit: np.ndarray, extra: float = 0.0, word: int = NO_WORD) -> None:
        self.arcs.append((src, dst, float(log_exit[self.node_state[src]]) + extra, word))

    def build(self) -> DecodingGraph:
        n_nodes = len(self.node_state)
        init_logp = np.full(n_nodes, -np.inf)
        init_word = np.full(n_nodes, NO_WORD)
        for node, (logp, word) in self.init.items():
            init_logp[node] = logp
            init_word[node] = word
        final = np.zeros(n_nodes, dtype=bool)
        final[sorted(self.final)] = True
        src, dst, logp, word = zip(*self.arcs, strict=True)
        return DecodingGraph(
            node_state=np.array(self.node_state),
            arc_src=np.array(src),
            arc_dst=np.array(dst),
            arc_logp=np.array(logp),
            arc_word=np.array(word),
            init_logp=init_logp,
            init_word=init_word,
            final=final,
        )


def word_entry_logp(hmm: HmmSet, word_insertion_penalty: float = 0.0) -> float:
    """Log-score paid on entering any word: uniform loop probability plus penalty."""
    return float(-np.log(len(hmm.words)) + word_insertion_penalty)


def build_graph(
    hmm: HmmSet,
    grammar: Grammar,
    optional_silence: bool = True,
    word_insertion_penalty: float = 0.0,
) -> DecodingGraph:
    """Compose the HMM topology with a grammar.

    Every word entry pays the same constant in every grammar, so a path
    through a transcription graph scores exactly as the same path through
    the word loop.
    """
    for word in grammar.words:
        hmm.word_index(word)

    log_self = hmm.log_self_loop()
    log_exit = hmm.log_exit()
    entry = word_entry_logp(hmm, word_insertion_penalty)
    silence = list(hmm.silence_range())
    b = _Builder()

    lead = b.chain(silence, log_self, log_exit) if optional_silence else []
    if lead:
        b.init[lead[0]] = (0.0, NO_WORD)

    if grammar.kind is GrammarKind.WORD_LOOP:
        word_chains = [
            (hmm.word_index(word), b.chain(hmm.word_states(word), log_self, log_exit))
            for word in hmm.words
        ]
        gap = b.chain(silence, log_self, log_exit) if optional_silence else []
        predecessors = [chain[-1] for _, chain in word_chains]
        if lead:
            predecessors.append(lead[-1])
        if gap:
            predecessors.append(gap[-1])
        for w, chain in word_chains:
            b.init[chain[0]] = (entry, w)
            b.final.add(chain[-1])
            for pred in predecessors:
                b.link(pred, chain[0], log_exit, entry, w)
            if gap:
                b.link(chain[-1], gap[0], log_exit)
        if gap:
            b.final.add(gap[-1])
        return b.build()

    # single word and transcription: a linear sequence with optional silences
    prev_tails: list[int] = [lead[-1]] if lead else []
    first = True
    for position, word in enumerate(grammar.words):
        w = hmm.word_index(word)
        chain = b.chain(hmm.word_states(word), log_self, log_exit)
        if first:
            b.init[chain[0]] = (entry, w)
            first = False
        for pred in prev_tails:
            b.link(pred, chain[0], log_exit, entry, w)
        last = position == len(grammar.words) - 1
        tails = [chain[-1]]
        if optional_silence:
            gap = b.chain(silence, log_self, log_exit)
            b.link(chain[-1], gap[0], log_exit)
            tails.append(gap[-1])
            if last:
                b.final.add(gap[-1])
        if last:
            b.final.add(chain[-1])
        prev_tails = tails
    return b.build()


def min_path_frames(hmm: HmmSet, words: Sequence[str]) -> int:
    """Shortest utterance a transcription can align to (silences skipped)."""
    return len(words) * hmm.states_per_word
