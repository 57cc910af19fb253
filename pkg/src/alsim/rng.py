"""Deterministic seed derivation.

All randomness in the workbench flows through explicit integer seeds. Sub-seeds
are derived from a master seed plus a string key, so results never depend on
execution order and parallel workers share no RNG state.
"""

from __future__ import annotations

import hashlib

import numpy as np

_U32 = 2**32


def _key_words(key: str) -> tuple[int, ...]:
    digest = hashlib.blake2b(key.encode("utf-8"), digest_size=16).digest()
    return tuple(int.from_bytes(digest[i : i + 4], "little") for i in range(0, 16, 4))


def subseed(master_seed: int, *key_parts: object) -> int:
    """Derive a child seed from a master seed and a structured key.

    The key is the string join of ``key_parts``; the same parts always yield
    the same child seed, and distinct keys yield statistically independent
    streams (via SeedSequence spawn keys).
    """
    key = "/".join(str(p) for p in key_parts)
    seq = np.random.SeedSequence(entropy=int(master_seed) % 2**63, spawn_key=_key_words(key))
    state = seq.generate_state(2, dtype=np.uint32)
    return int(state[0]) + int(state[1]) * _U32


def generator(seed: int) -> np.random.Generator:
    """PCG64 generator for an explicit integer seed."""
    return np.random.Generator(np.random.PCG64(int(seed)))


def spawn(master_seed: int, *key_parts: object) -> np.random.Generator:
    """Generator for the sub-stream named by ``key_parts``."""
    return generator(subseed(master_seed, *key_parts))
