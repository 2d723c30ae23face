"""
MDT Workbench - Seed Derivation

All randomness flows from one master seed. Child seeds are derived from
positional keys (split, utterance index, state, band ...), never from
execution order, so parallel and sequential runs draw identical numbers.
"""

import zlib

import numpy as np


def name_key(name: str) -> int:
    """Stable integer key for a string (stage or component name)."""
    return zlib.crc32(name.encode("utf-8"))


def derive_seed(master: int, *keys: int) -> int:
    """64-bit seed derived from the master seed and positional keys."""
    state = np.random.SeedSequence([int(master), *(int(k) for k in keys)]).generate_state(
        2, dtype=np.uint32
    )
    return (int(state[0]) << 32) | int(state[1])


def split_seed(master: int, seed_bit: int, *keys: int) -> int:
    """Seed whose low bit is ``seed_bit``; train (0) and test (1) seeds never collide."""
    return (derive_seed(master, 1 + seed_bit, *keys) & ~1) | (seed_bit & 1)


def rng_for(master: int, *keys: int) -> np.random.Generator:
    return np.random.default_rng(derive_seed(master, *keys))
