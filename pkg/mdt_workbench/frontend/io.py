"""
MDT Workbench - Audio and Feature File I/O

Raw audio: little-endian float32 samples, no header.
Feature matrices ("STFM"): magic, u32 T, u32 K, u8 domain tag, then
T*K little-endian float64 values, row-major.
"""

import struct
from pathlib import Path

import numpy as np

from mdt_workbench.layer.errors import FormatError
from mdt_workbench.models.audio import Domain, FrontendConfig, SpectroTemporal, Waveform

STFM_MAGIC = b"STFM"
_STFM_HEADER = struct.Struct("<4sIIB")


def write_raw_audio(path: Path, samples: np.ndarray) -> None:
    """Write samples as raw little-endian float32."""
    path.parent.mkdir(parents=True, exist_ok=True)
    np.asarray(samples, dtype="<f4").tofile(path)


def read_raw_audio(path: Path, sample_rate: int) -> Waveform:
    """Read a raw float32 file; the rate comes from the manifest."""
    if path.stat().st_size % 4:
        raise FormatError(f"{path}: size is not a multiple of 4 bytes")
    return Waveform(samples=np.fromfile(path, dtype="<f4"), sample_rate=sample_rate)


def read_raw_samples(path: Path) -> np.ndarray:
    """Raw float32 samples without wrapping (exact-mix checks compare in float32)."""
    return np.fromfile(path, dtype="<f4")


def encode_feature_matrix(features: SpectroTemporal) -> bytes:
    """Serialize a matrix to STFM bytes."""
    header = _STFM_HEADER.pack(
        STFM_MAGIC, features.n_frames, features.n_bands, features.domain.tag
    )
    return header + np.ascontiguousarray(features.values, dtype="<f8").tobytes()


def decode_feature_matrix(payload: bytes, cfg: FrontendConfig) -> SpectroTemporal:
    """Parse STFM bytes; provenance metadata is taken from ``cfg``.

    Raises:
        FormatError: Bad magic, unknown domain tag or truncated payload
    """
    if len(payload) < _STFM_HEADER.size:
        raise FormatError("STFM payload shorter than its header")
    magic, n_frames, n_bands, tag = _STFM_HEADER.unpack_from(payload)
    if magic != STFM_MAGIC:
        raise FormatError(f"bad STFM magic: {magic!r}")
    try:
        domain = Domain.from_tag(tag)
    except ValueError as e:
        raise FormatError(str(e))
    expected = _STFM_HEADER.size + 8 * n_frames * n_bands
    if len(payload) != expected:
        raise FormatError(f"STFM size mismatch: {len(payload)} bytes, header implies {expected}")
    values = np.frombuffer(payload, dtype="<f8", offset=_STFM_HEADER.size)
    return SpectroTemporal.from_config(values.reshape(n_frames, n_bands), domain, cfg)


def write_feature_matrix(path: Path, features: SpectroTemporal) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_feature_matrix(features))


def read_feature_matrix(path: Path, cfg: FrontendConfig) -> SpectroTemporal:
    return decode_feature_matrix(path.read_bytes(), cfg)
