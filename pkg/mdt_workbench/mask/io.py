"""
MDT Workbench - Mask File I/O

Format: magic "MASK", u32 T, u32 K, u8 has_delta, then the T*K static
bits row-major, packed little-endian (bit 0 of each byte first) and padded
to a whole byte, then the delta bits in the same layout when present.
"""

import struct
from pathlib import Path

import numpy as np

from mdt_workbench.layer.errors import FormatError, InputValidationError
from mdt_workbench.models.masks import BinaryMask

MASK_MAGIC = b"MASK"
_HEADER = struct.Struct("<4sIIB")


def _packed_size(n_bits: int) -> int:
    return (n_bits + 7) // 8


def encode_mask(mask: BinaryMask) -> bytes:
    """Serialize a mask.

    Raises:
        InputValidationError: The mask has no frames
    """
    n_frames, n_bands = mask.shape
    if n_frames == 0 or n_bands == 0:
        raise InputValidationError(f"cannot write an empty mask (shape {mask.shape})")
    has_delta = mask.delta is not None
    parts = [
        _HEADER.pack(MASK_MAGIC, n_frames, n_bands, int(has_delta)),
        np.packbits(mask.values.ravel(), bitorder="little").tobytes(),
    ]
    if mask.delta is not None:
        parts.append(np.packbits(mask.delta.ravel(), bitorder="little").tobytes())
    return b"".join(parts)


def _unpack(payload: bytes, offset: int, n_bits: int, shape: tuple[int, int]) -> np.ndarray:
    raw = np.frombuffer(payload, dtype=np.uint8, count=_packed_size(n_bits), offset=offset)
    return np.unpackbits(raw, count=n_bits, bitorder="little").astype(bool).reshape(shape)


def decode_mask(payload: bytes) -> BinaryMask:
    """Parse mask bytes.

    Raises:
        FormatError: Bad magic, bad flag, empty shape or size mismatch vs. header
    """
    if len(payload) < _HEADER.size:
        raise FormatError("mask payload shorter than its header")
    magic, n_frames, n_bands, has_delta = _HEADER.unpack_from(payload)
    if magic != MASK_MAGIC:
        raise FormatError(f"bad mask magic: {magic!r}")
    if has_delta not in (0, 1):
        raise FormatError(f"bad has_delta flag: {has_delta}")
    if n_frames == 0 or n_bands == 0:
        raise FormatError(f"mask header declares an empty shape ({n_frames}, {n_bands})")

    n_bits = n_frames * n_bands
    section = _packed_size(n_bits)
    expected = _HEADER.size + section * (1 + has_delta)
    if len(payload) != expected:
        raise FormatError(f"mask size mismatch: {len(payload)} bytes, header implies {expected}")

    shape = (n_frames, n_bands)
    values = _unpack(payload, _HEADER.size, n_bits, shape)
    delta = _unpack(payload, _HEADER.size + section, n_bits, shape) if has_delta else None
    return BinaryMask(values=values, delta=delta)


def write_mask(path: Path, mask: BinaryMask) -> None:
    payload = encode_mask(mask)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(payload)


def read_mask(path: Path) -> BinaryMask:
    return decode_mask(path.read_bytes())
