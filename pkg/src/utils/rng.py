# File: src/utils/rng.py

"""Seed fan-out. All randomness flows from one user seed; no global RNG state."""

import zlib
from typing import List

import numpy as np


def derive_seed(seed: int, purpose: str) -> int:
    """Stable per-purpose seed, independent of call order."""
    sequence = np.random.SeedSequence([int(seed), zlib.crc32(purpose.encode("utf-8"))])
    return int(sequence.generate_state(1, dtype=np.uint32)[0])


def stream(seed: int, index: int) -> np.random.Generator:
    """Generator for item `index` (node, sample, ...) of a seeded family."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(index)]))


def streams(seed: int, count: int) -> List[np.random.Generator]:
    return [stream(seed, i) for i in range(count)]
