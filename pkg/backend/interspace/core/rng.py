"""Counter-based Gaussian streams.

Every draw is addressed by (seed, stream tag, chunk index): the Philox key
holds the seed and the tag, the top counter word holds the chunk index.
A chunk is a (rows x cols) block of standard normals where row r is
replicate ``chunk * chunk_size + r`` and column j is coefficient j + 1.
Chunks are independent of one another, so they can be generated in any
order, on any worker, with identical results.
"""

from __future__ import annotations

from enum import IntEnum

import numpy as np

_MASK64 = (1 << 64) - 1


class StreamTag(IntEnum):
    """Independent stream per purpose so experiments never share draws."""

    SAMPLE = 0
    TAIL = 1
    RECERTIFY = 2
    KEY_INEQUALITY = 3
    ZN = 4
    FERNIQUE = 5
    TIGHTNESS = 6
    CONCENTRATION_FULL = 7
    CONCENTRATION_SUB = 8
    VARIANCE_PATH = 9
    VARIANCE_MAX = 10
    THETA = 11
    BOREL_CANTELLI = 12
    LINE = 13
    CIESIELSKI = 14
    KFUNCTIONAL = 15


def validate_seed(seed: int) -> int:
    if not 0 <= int(seed) <= _MASK64:
        raise ValueError(f"seed={seed!r} must be a non-negative 64-bit integer")
    return int(seed)


class GaussianStream:
    """Deterministic source of standard normal blocks."""

    def __init__(self, seed: int, tag: int = StreamTag.SAMPLE, pinned_zero: bool = False) -> None:
        self.seed = validate_seed(seed)
        self.tag = int(tag)
        self.pinned_zero = pinned_zero

    def generator(self, chunk: int) -> np.random.Generator:
        key = self.seed | (self.tag << 64)
        return np.random.Generator(np.random.Philox(key=key, counter=int(chunk) << 192))

    def chunk(self, index: int, rows: int, cols: int) -> np.ndarray:
        if self.pinned_zero:
            return np.zeros((rows, cols))
        return self.generator(index).standard_normal((rows, cols))

    def __repr__(self) -> str:
        return f"GaussianStream(seed={self.seed}, tag={self.tag})"
