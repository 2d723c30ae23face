"""
MDT Workbench - Model and Alignment Files

Model file ("HMM1"): magic, u32 format version, u32 n_words,
u32 states_per_word, u32 silence_states, u32 n_mixtures, u32 n_dims,
then each word as u16 length + UTF-8 bytes, then little-endian f64
arrays: self_loop (S), variance_floor (D), weights (S*M), means (S*M*D),
variances (S*M*D).

Alignment file: one ``frame_index<TAB>global_state_index`` line per frame.
"""

import struct
from pathlib import Path

import numpy as np

from mdt_workbench.layer.errors import FormatError
from mdt_workbench.models.hmm import HmmSet, StateAlignment

HMM_MAGIC = b"HMM1"
HMM_FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sIIIIII")
_WORD_LEN = struct.Struct("<H")


def encode_hmm(hmm: HmmSet) -> bytes:
    parts = [
        _HEADER.pack(
            HMM_MAGIC,
            HMM_FORMAT_VERSION,
            len(hmm.words),
            hmm.states_per_word,
            hmm.silence_states,
            hmm.n_mixtures,
            hmm.n_dims,
        )
    ]
    for word in hmm.words:
        raw = word.encode("utf-8")
        parts.append(_WORD_LEN.pack(len(raw)) + raw)
    for array in (hmm.self_loop, hmm.variance_floor, hmm.weights, hmm.means, hmm.variances):
        parts.append(np.ascontiguousarray(array, dtype="<f8").tobytes())
    return b"".join(parts)


def decode_hmm(payload: bytes) -> HmmSet:
    """Parse an HMM1 payload.

    Raises:
        FormatError: Bad magic, unsupported version or size mismatch
    """
    if len(payload) < _HEADER.size:
        raise FormatError("model payload shorter than its header")
    magic, version, n_words, spw, n_sil, n_mix, n_dims = _HEADER.unpack_from(payload)
    if magic != HMM_MAGIC:
        raise FormatError(f"bad model magic: {magic!r}")
    if version != HMM_FORMAT_VERSION:
        raise FormatError(f"unsupported model format version {version}")

    offset = _HEADER.size
    words = []
    for _ in range(n_words):
        if offset + _WORD_LEN.size > len(payload):
            raise FormatError("model payload truncated in word list")
        (length,) = _WORD_LEN.unpack_from(payload, offset)
        offset += _WORD_LEN.size
        words.append(payload[offset : offset + length].decode("utf-8"))
        offset += length

    n_states = n_words * spw + n_sil
    shapes = {
        "self_loop": (n_states,),
        "variance_floor": (n_dims,),
        "weights": (n_states, n_mix),
        "means": (n_states, n_mix, n_dims),
        "variances": (n_states, n_mix, n_dims),
    }
    expected = offset + 8 * sum(int(np.prod(shape)) for shape in shapes.values())
    if len(payload) != expected:
        raise FormatError(f"model size mismatch: {len(payload)} bytes, header implies {expected}")

    arrays = {}
    for name, shape in shapes.items():
        count = int(np.prod(shape))
        arrays[name] = np.frombuffer(payload, dtype="<f8", count=count, offset=offset).reshape(shape)
        offset += 8 * count
    try:
        return HmmSet(words=tuple(words), states_per_word=spw, silence_states=n_sil, **arrays)
    except ValueError as e:
        raise FormatError(f"invalid model parameters: {e}") from e


def write_hmm(path: Path, hmm: HmmSet) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_hmm(hmm))


def read_hmm(path: Path) -> HmmSet:
    return decode_hmm(path.read_bytes())


def write_alignment(path: Path, alignment: StateAlignment) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = (f"{t}\t{int(s)}\n" for t, s in enumerate(alignment.states))
    path.write_text("".join(lines), encoding="utf-8")


def read_alignment(path: Path) -> StateAlignment:
    """Parse an alignment file; frame indices must run 0, 1, 2, ...

    Raises:
        FormatError: Malformed line or out-of-order frame index
    """
    states = []
    for line_no, line in enumerate(path.read_text(encoding="utf-8").splitlines()):
        fields = line.split("\t")
        if len(fields) != 2 or not all(f.strip().isdigit() for f in fields):
            raise FormatError(f"{path}:{line_no + 1}: expected 'frame<TAB>state'")
        frame, state = int(fields[0]), int(fields[1])
        if frame != line_no:
            raise FormatError(f"{path}:{line_no + 1}: frame index {frame}, expected {line_no}")
        states.append(state)
    return StateAlignment(states=np.array(states, dtype=np.int64))
