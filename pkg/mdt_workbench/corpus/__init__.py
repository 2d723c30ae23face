"""Deterministic synthetic small-vocabulary corpus with exact SNR mixing."""

from mdt_workbench.corpus.generate import (
    generate_corpus,
    load_utterance,
    read_manifest,
    write_manifest,
)
from mdt_workbench.corpus.lexicon import load_lexicon
from mdt_workbench.corpus.noise import make_noise, mix_at_snr
from mdt_workbench.corpus.synth import synth_utterance
