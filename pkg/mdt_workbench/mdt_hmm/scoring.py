"""
MDT Workbench - Word Accuracy Scoring

Levenshtein alignment of word strings with unit substitution, deletion
and insertion costs, and frame offsets of aligned word boundaries.
"""

from collections.abc import Sequence

import numpy as np

from mdt_workbench.layer.errors import InputValidationError
from mdt_workbench.models.hmm import EvalReport


def edit_counts(ref: Sequence[str], hyp: Sequence[str]) -> tuple[int, int, int]:
    """(substitutions, deletions, insertions) of a minimum-edit alignment.

    Among equal-cost alignments the backtrace prefers matches and
    substitutions, then deletions, then insertions.
    """
    n, m = len(ref), len(hyp)
    cost = np.zeros((n + 1, m + 1), dtype=np.int64)
    cost[:, 0] = np.arange(n + 1)
    cost[0, :] = np.arange(m + 1)
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            diag = cost[i - 1, j - 1] + (ref[i - 1] != hyp[j - 1])
            cost[i, j] = min(diag, cost[i - 1, j] + 1, cost[i, j - 1] + 1)

    subs = dels = ins = 0
    i, j = n, m
    while i > 0 or j > 0:
        if i > 0 and j > 0 and cost[i, j] == cost[i - 1, j - 1] + (ref[i - 1] != hyp[j - 1]):
            subs += int(ref[i - 1] != hyp[j - 1])
            i, j = i - 1, j - 1
        elif i > 0 and cost[i, j] == cost[i - 1, j] + 1:
            dels += 1
            i -= 1
        else:
            ins += 1
            j -= 1
    return subs, dels, ins


def score_utterance(ref: Sequence[str], hyp: Sequence[str]) -> EvalReport:
    subs, dels, ins = edit_counts(ref, hyp)
    return EvalReport(n_words=len(ref), substitutions=subs, deletions=dels, insertions=ins, n_utterances=1)


def word_accuracy(refs: Sequence[Sequence[str]], hyps: Sequence[Sequence[str]]) -> EvalReport:
    """Aggregate counts over parallel reference/hypothesis lists.

    Raises:
        InputValidationError: Lists differ in length or hold no reference words
    """
    if len(refs) != len(hyps):
        raise InputValidationError(f"{len(refs)} references but {len(hyps)} hypotheses")
    report = EvalReport(n_words=0)
    for ref, hyp in zip(refs, hyps, strict=True):
        report = report + score_utterance(ref, hyp)
    if report.n_words == 0:
        raise InputValidationError("reference set has no words")
    return report


def boundary_offsets(
    reference: Sequence[tuple[str, int, int]], aligned: Sequence[tuple[str, int, int]]
) -> np.ndarray:
    """Signed frame offsets (aligned - reference) of word starts and ends.

    Both arguments are (word, start, end) spans on the same frame grid.

    Returns:
        Integer array of shape (n_words, 2): start offset, end offset

    Raises:
        InputValidationError: The word sequences differ
    """
    ref_words = [w for w, _, _ in reference]
    ali_words = [w for w, _, _ in aligned]
    if ref_words != ali_words:
        raise InputValidationError(f"aligned words {ali_words} differ from reference {ref_words}")
    offsets = [
        (a_start - r_start, a_end - r_end)
        for (_, r_start, r_end), (_, a_start, a_end) in zip(reference, aligned, strict=True)
    ]
    return np.array(offsets, dtype=np.int64).reshape(-1, 2)
