"""
MDT Workbench - Estimator Bank File I/O

Format (little-endian): magic "SVMB", u32 S, u32 K, u32 D, mean (D f64),
scale (D f64), K pooled records (D weights + bias, f64), then S*K slot
records in state-major order, each a u8 tag followed by
  trained  (0): D weights + bias as f64
  constant (1): u8 label
  fallback (2): nothing (the band's pooled record applies)
"""

import struct
from pathlib import Path

import numpy as np

from mdt_workbench.layer.errors import FormatError
from mdt_workbench.models.estimator import EstimatorBank, SlotKind

BANK_MAGIC = b"SVMB"
_HEADER = struct.Struct("<4sIII")
_F64 = np.dtype("<f8")


def encode_bank(bank: EstimatorBank) -> bytes:
    s, k, d = bank.n_states, bank.n_bands, bank.feature_dim
    parts = [
        _HEADER.pack(BANK_MAGIC, s, k, d),
        bank.mean.astype(_F64).tobytes(),
        bank.scale.astype(_F64).tobytes(),
        np.hstack([bank.pooled_weights, bank.pooled_biases[:, None]]).astype(_F64).tobytes(),
    ]
    for state in range(s):
        for band in range(k):
            kind = SlotKind(int(bank.kinds[state, band]))
            parts.append(bytes([kind]))
            if kind is SlotKind.TRAINED:
                record = np.append(bank.weights[state, band], bank.biases[state, band])
                parts.append(record.astype(_F64).tobytes())
            elif kind is SlotKind.CONSTANT:
                parts.append(bytes([int(bank.labels[state, band])]))
    return b"".join(parts)


class _Reader:
    def __init__(self, payload: bytes) -> None:
        self.payload = payload
        self.offset = 0

    def take(self, n_bytes: int) -> bytes:
        end = self.offset + n_bytes
        if end > len(self.payload):
            raise FormatError(f"bank payload truncated at byte {self.offset} (needs {n_bytes} more)")
        chunk = self.payload[self.offset : end]
        self.offset = end
        return chunk

    def floats(self, count: int) -> np.ndarray:
        return np.frombuffer(self.take(count * _F64.itemsize), dtype=_F64).astype(np.float64)

    def byte(self) -> int:
        return self.take(1)[0]


def decode_bank(payload: bytes) -> EstimatorBank:
    """Parse bank bytes.

    Raises:
        FormatError: Bad magic, unknown slot tag, truncation or trailing bytes
    """
    if len(payload) < _HEADER.size:
        raise FormatError("bank payload shorter than its header")
    magic, s, k, d = _HEADER.unpack_from(payload)
    if magic != BANK_MAGIC:
        raise FormatError(f"bad bank magic: {magic!r}")
    if 0 in (s, k, d):
        raise FormatError(f"bank header declares an empty shape ({s}, {k}, {d})")

    reader = _Reader(payload)
    reader.take(_HEADER.size)
    mean = reader.floats(d)
    scale = reader.floats(d)
    pooled = reader.floats(k * (d + 1)).reshape(k, d + 1)

    kinds = np.empty((s, k), dtype=np.uint8)
    labels = np.zeros((s, k), dtype=bool)
    weights = np.zeros((s, k, d))
    biases = np.zeros((s, k))
    for state in range(s):
        for band in range(k):
            tag = reader.byte()
            if tag == SlotKind.TRAINED:
                record = reader.floats(d + 1)
                weights[state, band], biases[state, band] = record[:d], record[d]
            elif tag == SlotKind.CONSTANT:
                label = reader.byte()
                if label not in (0, 1):
                    raise FormatError(f"bad constant label {label} at slot ({state}, {band})")
                labels[state, band] = bool(label)
            elif tag != SlotKind.FALLBACK:
                raise FormatError(f"unknown slot tag {tag} at slot ({state}, {band})")
            kinds[state, band] = tag
    if reader.offset != len(payload):
        raise FormatError(f"{len(payload) - reader.offset} trailing bytes after bank records")

    try:
        return EstimatorBank(
            n_states=s,
            n_bands=k,
            feature_dim=d,
            mean=mean,
            scale=scale,
            kinds=kinds,
            labels=labels,
            weights=weights,
            biases=biases,
            pooled_weights=pooled[:, :d],
            pooled_biases=pooled[:, d],
        )
    except ValueError as e:
        raise FormatError(f"invalid bank contents: {e}") from e


def write_bank(path: Path, bank: EstimatorBank) -> None:
    payload = encode_bank(bank)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(payload)


def read_bank(path: Path) -> EstimatorBank:
    return decode_bank(path.read_bytes())
