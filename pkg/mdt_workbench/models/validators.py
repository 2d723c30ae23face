"""
MDT Workbench - Data Validators

Common validation functions for SNR values, arrays and name sets.
"""

import math
from typing import Any

import numpy as np


# Noise generators understood by the corpus module
VALID_NOISE_KINDS = {"white", "lowpass", "amplitude_modulated", "harmonic_hum"}

# Decoding methods compared by the harness
VALID_METHODS = {"classical_oracle", "state_dependent_oracle", "state_conditioned_decode"}

# Spellings accepted for the clean (+inf dB) condition
CLEAN_SNR_TOKENS = {"clean", "inf", "+inf", "infinity"}


def parse_snr(value: Any) -> float:
    """Parse an SNR value in dB; ``clean``/``inf`` map to +inf.

    Args:
        value: Number or string

    Returns:
        SNR in dB (float, possibly +inf)

    Raises:
        ValueError: If the value is NaN, -inf or not a number
    """
    if isinstance(value, str):
        token = value.strip().lower()
        if token in CLEAN_SNR_TOKENS:
            return math.inf
        value = float(token)
    snr = float(value)
    if math.isnan(snr) or snr == -math.inf:
        msg = f"SNR must be finite or +inf, got: {value}"
        raise ValueError(msg)
    return snr


def format_snr(snr_db: float) -> str:
    """Render an SNR for manifests and reports (``inf`` for clean)."""
    if math.isinf(snr_db):
        return "inf"
    return f"{snr_db:g}"


def snr_label(snr_db: float) -> str:
    """Column label used in report tables."""
    return "clean" if math.isinf(snr_db) else f"{snr_db:g}"


def validate_noise_kind(kind: str) -> str:
    """Validate a noise generator name.

    Raises:
        ValueError: If the kind is unknown
    """
    if kind not in VALID_NOISE_KINDS:
        valid_list = ", ".join(sorted(VALID_NOISE_KINDS))
        msg = f"Invalid noise kind: {kind}. Must be one of: {valid_list}"
        raise ValueError(msg)
    return kind


def validate_method(method: str) -> str:
    """Validate a decoding method name.

    Raises:
        ValueError: If the method is unknown
    """
    if method not in VALID_METHODS:
        valid_list = ", ".join(sorted(VALID_METHODS))
        msg = f"Invalid method: {method}. Must be one of: {valid_list}"
        raise ValueError(msg)
    return method


def split_list(value: Any) -> list[str]:
    """Split a comma-separated config value into stripped items."""
    if isinstance(value, str):
        return [item.strip() for item in value.split(",") if item.strip()]
    return list(value)


def as_matrix(values: Any, dtype: Any = np.float64) -> np.ndarray:
    """Copy into a read-only 2-D array.

    Raises:
        ValueError: If the input is not two-dimensional
    """
    arr = np.array(values, dtype=dtype, copy=True)
    if arr.ndim != 2:
        msg = f"Expected a 2-D matrix, got shape {arr.shape}"
        raise ValueError(msg)
    arr.flags.writeable = False
    return arr
