"""Word-level GMM-HMM recognizer with missing-data likelihoods."""

from mdt_workbench.mdt_hmm.graph import DecodingGraph, Grammar, build_graph
from mdt_workbench.mdt_hmm.io import read_alignment, read_hmm, write_alignment, write_hmm
from mdt_workbench.mdt_hmm.likelihood import emission_logliks, gaussian_marginal_loglik, state_loglik
from mdt_workbench.mdt_hmm.scoring import word_accuracy
from mdt_workbench.mdt_hmm.training import HmmTrainer, TrainingUtterance, fit_gmm_em, train_hmm
from mdt_workbench.mdt_hmm.viterbi import DecodeResult, forced_align, viterbi, viterbi_decode
from mdt_workbench.mdt_hmm.state_conditioned import decode_state_conditioned
