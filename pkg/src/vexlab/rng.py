"""Seed derivation for reproducible experiments.

Streams are Philox counter-based generators keyed by a SHA-256 hash of
(seed_base, *path), so any (cell, trial) reaches its seed independently of
execution order, and the same path always produces the same stream.
"""

from __future__ import annotations

import hashlib

import numpy as np

GENERATOR_NAME = "philox-sha256"


def derive_seed(seed_base: int, *path: object) -> int:
    """64-bit seed for a named substream."""
    h = hashlib.sha256(repr((int(seed_base),) + tuple(path)).encode())
    return int.from_bytes(h.digest()[:8], "little")


def stream(seed_base: int, *path: object) -> np.random.Generator:
    h = hashlib.sha256(repr((int(seed_base),) + tuple(path)).encode())
    key = np.frombuffer(h.digest(), dtype=np.uint64)[:2]
    return np.random.Generator(np.random.Philox(key=key))
