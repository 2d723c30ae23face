"""
MDT Workbench - Oracle Masks

Classical SNR-based oracle masks, delta masks derived from static masks,
and the mask granularity diagnostics.
"""

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from mdt_workbench.layer.errors import InputValidationError
from mdt_workbench.models.audio import DeltaConfig, Domain, SpectroTemporal
from mdt_workbench.models.masks import BinaryMask, DeltaRule, OracleThreshold


def local_snr_db(speech: SpectroTemporal, noise: SpectroTemporal) -> np.ndarray:
    """10 log10(speech / noise) per cell; both inputs linear power.

    Raises:
        InputValidationError: Shape mismatch or log-domain input
    """
    for name, spec in (("speech", speech), ("noise", noise)):
        if spec.domain is not Domain.LINEAR_POWER:
            raise InputValidationError(f"{name} must be linear_power, got {spec.domain}")
    if speech.values.shape != noise.values.shape:
        raise InputValidationError(
            f"speech/noise shape mismatch: {speech.values.shape} vs {noise.values.shape}"
        )
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(speech.values / noise.values)


def oracle_mask(
    speech: SpectroTemporal, noise: SpectroTemporal, thr: OracleThreshold | None = None
) -> BinaryMask:
    """Cell (t, k) is reliable iff its local SNR is >= theta_db (ties reliable)."""
    thr = thr or OracleThreshold()
    return BinaryMask(values=local_snr_db(speech, noise) >= thr.theta_db)


def delta_mask(static_mask: BinaryMask, d: DeltaConfig, rule: DeltaRule = DeltaRule.AND) -> np.ndarray:
    """Delta reliability from the static cells t-W..t+W of each band.

    AND: reliable only if every static cell in the window is reliable.
    OR: reliable if any is. Edge frames replicate the boundary cells.
    """
    return delta_from_static(static_mask.values, d, rule)


def delta_from_static(values: np.ndarray, d: DeltaConfig, rule: DeltaRule = DeltaRule.AND) -> np.ndarray:
    """:func:`delta_mask` on raw booleans whose last two axes are (T, K)."""
    values = np.asarray(values, dtype=bool)
    width = d.window_half_width
    pad = [(0, 0)] * (values.ndim - 2) + [(width, width), (0, 0)]
    padded = np.pad(values, pad, mode="edge")
    windows = sliding_window_view(padded, 2 * width + 1, axis=-2)
    if rule is DeltaRule.AND:
        return np.all(windows, axis=-1)
    return np.any(windows, axis=-1)


def with_delta(static_mask: BinaryMask, d: DeltaConfig, rule: DeltaRule = DeltaRule.AND) -> BinaryMask:
    """The static mask plus its derived delta companion."""
    return BinaryMask(values=static_mask.values, delta=delta_mask(static_mask, d, rule))


def isolated_reliable_cells(mask: BinaryMask) -> np.ndarray:
    """Reliable cells with no reliable 4-neighbour (t +/- 1 or k +/- 1)."""
    values = mask.values
    padded = np.pad(values, 1, constant_values=False)
    neighbours = padded[:-2, 1:-1] | padded[2:, 1:-1] | padded[1:-1, :-2] | padded[1:-1, 2:]
    return values & ~neighbours


def count_isolated_reliable(mask: BinaryMask) -> int:
    return int(np.count_nonzero(isolated_reliable_cells(mask)))


def reliable_fraction(mask: BinaryMask) -> float:
    """Share of reliable static cells (0 for an empty mask)."""
    values = mask.values
    return float(values.mean()) if values.size else 0.0
