"""
MDT Workbench

Missing-data speech recognition workbench: synthetic corpus, log-mel
frontend, oracle masks, bounded-marginalisation GMM-HMM decoding and
per-state SVM mask estimators.
"""

__version__ = "0.1.0"
