"""Deterministic seed derivation.

Every random draw in the package comes from ``numpy.random.default_rng`` seeded
with ``[seed, stream, index]``; the stream tag keeps the transition, innovation,
mask and sampler draws of one seed independent of each other.
"""

import hashlib
from enum import IntEnum

import numpy as np


class Stream(IntEnum):
    """Stream tags for independent random sub-streams of one seed."""

    TRANSITION = 1
    INNOVATIONS = 2
    MASK = 3
    RE_SAMPLER = 4
    TRIAL = 5
    CHECK = 6


def derive_rng(seed: int, stream: Stream, index: int = 0) -> np.random.Generator:
    """Return the generator for ``(seed, stream, index)``.

    Args:
        seed: Non-negative base seed
        stream: Sub-stream tag
        index: Trial or replication index inside the stream

    Returns:
        Independent numpy generator
    """
    if seed < 0 or index < 0:
        raise ValueError(f"Seeds and indices must be non-negative, got {seed}, {index}")
    return np.random.default_rng([int(seed), int(stream), int(index)])


def hash64(*parts: int) -> int:
    """Hash integers to an unsigned 64-bit seed with blake2b."""
    payload = ":".join(str(int(part)) for part in parts).encode("ascii")
    return int.from_bytes(hashlib.blake2b(payload, digest_size=8).digest(), "big")


def cell_seed(master_seed: int, cell_index: int, replication: int) -> int:
    """Seed of one (cell, replication) pair of an experiment sweep."""
    return hash64(master_seed, cell_index, replication)
