"""Reproducible random streams keyed by (master seed, purpose, ids...).

Every sampled quantity is drawn from a stream identified by the master seed
and a tuple of non-negative integers (``spawn_key`` of a numpy SeedSequence).
Streams with distinct keys are independent, and a given key always yields the
same draws, so results never depend on how work is split across workers.
"""
from __future__ import annotations

import hashlib
import secrets
from typing import Sequence

import numpy as np

KERNEL = 0
EFFECT = 1
BOOTSTRAP = 2
DERIVED = 3

SEED_MASK = (1 << 64) - 1


def entropy_seed() -> int:
    return secrets.randbits(63)


def text_key(text: str) -> int:
    """Stable 64-bit key of a string (used to tie streams to atom/term identities)."""
    return int.from_bytes(hashlib.sha256(text.encode("utf-8")).digest()[:8], "little")


def _seq(seed: int, key: Sequence[int]) -> np.random.SeedSequence:
    if seed < 0:
        raise ValueError("seed must be non-negative")
    return np.random.SeedSequence(entropy=seed & SEED_MASK, spawn_key=tuple(int(k) for k in key))


def stream(seed: int, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(_seq(seed, key)))


def derive_seed(seed: int, *key: int) -> int:
    """A fresh 63-bit master seed for a sub-computation."""
    hi, lo = _seq(seed, (DERIVED,) + tuple(key)).generate_state(2, np.uint32)
    return ((int(hi) << 32) | int(lo)) >> 1


def slot_draws(seed: int, purpose: int, slots: Sequence[int], rows: int, cols: int) -> np.ndarray:
    """Uniform [0, 1) draws of shape (len(slots), rows, cols), one stream per slot.

    Row ``i`` of a slot's matrix holds the draws for time step ``i``, so a prefix of
    the horizon always sees the same numbers regardless of the total length.
    """
    out = np.empty((len(slots), rows, cols))
    if rows == 0 or cols == 0:
        return out
    for n, s in enumerate(slots):
        out[n] = stream(seed, purpose, s).random((rows, cols))
    return out
