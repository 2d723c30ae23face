"""
MDT Workbench - Missing-Data Likelihoods

Diagonal-Gaussian log-densities with bounded marginalization of
unreliable dimensions. Observations and masks are [static | delta]
vectors of length 2K.
"""

import numpy as np
from scipy.special import log_ndtr, logsumexp

from mdt_workbench.layer.errors import InputValidationError
from mdt_workbench.models.hmm import DeltaMarginalization, HmmSet

LOG_2PI = float(np.log(2.0 * np.pi))


def _unreliable_term(z: np.ndarray, n_static: int, delta_marg: DeltaMarginalization) -> np.ndarray:
    """log Phi(z) for static dims; 0 or log Phi(z) for delta dims (last axis)."""
    term = log_ndtr(z)
    if delta_marg is DeltaMarginalization.FULL:
        term[..., n_static:] = 0.0
    return term


def gaussian_marginal_loglik(
    mean: np.ndarray,
    var: np.ndarray,
    obs: np.ndarray,
    mask: np.ndarray,
    delta_marginalization: DeltaMarginalization = DeltaMarginalization.FULL,
) -> float:
    """Log-likelihood of one diagonal Gaussian component.

    Reliable dimensions contribute log N(o; mu, var). Unreliable static
    dimensions contribute log Phi((o - mu) / sigma): the clean value is
    integrated up to the observed noisy value. Unreliable delta dimensions
    are marginalized out (contribute 0) unless ``delta_marginalization`` is
    bounded.

    Args:
        mean: Component mean (2K,)
        var: Diagonal variance (2K,)
        obs: Observation (2K,)
        mask: Reliability (2K,), True = reliable
        delta_marginalization: Treatment of unreliable delta dims

    Returns:
        Log-likelihood

    Raises:
        InputValidationError: Shape mismatch, odd dimension, non-finite
            observation or nonpositive variance
    """
    mean = np.asarray(mean, dtype=np.float64)
    var = np.asarray(var, dtype=np.float64)
    obs = np.asarray(obs, dtype=np.float64)
    mask = np.asarray(mask, dtype=bool)
    if not mean.shape == var.shape == obs.shape == mask.shape or mean.ndim != 1:
        raise InputValidationError("mean, var, obs and mask must be vectors of equal length")
    if mean.shape[0] % 2:
        raise InputValidationError(f"observation length must be 2K, got {mean.shape[0]}")
    if not np.all(np.isfinite(obs)):
        raise InputValidationError("observation has a non-finite value")
    if np.any(var <= 0.0):
        raise InputValidationError("variance must be positive")

    z = (obs - mean) / np.sqrt(var)
    reliable = -0.5 * (LOG_2PI + np.log(var) + z * z)
    unreliable = _unreliable_term(z, mean.shape[0] // 2, delta_marginalization)
    return float(np.sum(np.where(mask, reliable, unreliable)))


def state_loglik(
    hmm: HmmSet,
    state: int,
    obs: np.ndarray,
    mask: np.ndarray,
    delta_marginalization: DeltaMarginalization = DeltaMarginalization.FULL,
) -> float:
    """Log-sum-exp over the state's mixture of log weight + component loglik."""
    if hmm.n_mixtures == 0:
        raise InputValidationError("state has an empty mixture")
    terms = [
        np.log(hmm.weights[state, m])
        + gaussian_marginal_loglik(
            hmm.means[state, m], hmm.variances[state, m], obs, mask, delta_marginalization
        )
        for m in range(hmm.n_mixtures)
    ]
    return float(logsumexp(terms))


def emission_logliks(
    hmm: HmmSet,
    obs: np.ndarray,
    mask: np.ndarray | None = None,
    delta_marginalization: DeltaMarginalization = DeltaMarginalization.FULL,
) -> np.ndarray:
    """Emission log-likelihoods of every state at every frame, shape (T, S).

    Args:
        hmm: Model set
        obs: Observations (T, 2K)
        mask: (T, 2K) shared by all states, (S, T, 2K) per state, or None
            for all-reliable
        delta_marginalization: Treatment of unreliable delta dims

    Raises:
        InputValidationError: Empty or non-finite observations, shape mismatch
    """
    obs = np.asarray(obs, dtype=np.float64)
    if obs.ndim != 2 or obs.shape[0] == 0:
        raise InputValidationError(f"observations must be a non-empty (T, 2K) matrix, got {obs.shape}")
    if obs.shape[1] != hmm.n_dims:
        raise InputValidationError(f"observation width {obs.shape[1]} != model dimension {hmm.n_dims}")
    if not np.all(np.isfinite(obs)):
        raise InputValidationError("observations contain non-finite values")

    n_frames = obs.shape[0]
    sd = np.sqrt(hmm.variances)[:, :, None, :]
    z = (obs[None, None, :, :] - hmm.means[:, :, None, :]) / sd  # (S, M, T, D)
    reliable = -0.5 * (LOG_2PI + np.log(hmm.variances)[:, :, None, :] + z * z)

    if mask is None or bool(np.all(mask)):
        if mask is not None:
            _check_mask_shape(np.asarray(mask), hmm, n_frames)
        per_dim = reliable
    else:
        mask = np.asarray(mask, dtype=bool)
        _check_mask_shape(mask, hmm, n_frames)
        unreliable = _unreliable_term(z, hmm.n_bands, delta_marginalization)
        state_mask = mask[None, None, :, :] if mask.ndim == 2 else mask[:, None, :, :]
        per_dim = np.where(state_mask, reliable, unreliable)

    component = per_dim.sum(axis=3) + np.log(hmm.weights)[:, :, None]  # (S, M, T)
    return logsumexp(component, axis=1).T


def _check_mask_shape(mask: np.ndarray, hmm: HmmSet, n_frames: int) -> None:
    allowed = {(n_frames, hmm.n_dims), (hmm.n_states, n_frames, hmm.n_dims)}
    if mask.shape not in allowed:
        raise InputValidationError(
            f"mask shape {mask.shape} must be (T, 2K) or (S, T, 2K) with T={n_frames}, "
            f"2K={hmm.n_dims}, S={hmm.n_states}"
        )
