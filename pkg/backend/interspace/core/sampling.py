"""Replicate-parallel Monte Carlo driver."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, TypeVar

import numpy as np

from interspace.core.rng import GaussianStream, StreamTag

logger = logging.getLogger(__name__)

T = TypeVar("T")

DEFAULT_CHUNK_SIZE = 1024


class ReplicateSampler:
    """Maps a kernel over fixed-size replicate chunks.

    The chunk layout depends only on ``chunk_size``, never on ``workers``;
    results are returned in chunk order so any reduction over them is
    independent of the worker count.

    Example:
        >>> sampler = ReplicateSampler(seed=7, workers=4)
        >>> sums = sampler.map(lambda g, idx: g.sum(axis=1), 10_000, 8, StreamTag.SAMPLE)
        >>> total = np.concatenate(sums)
    """

    def __init__(
        self,
        seed: int,
        workers: int = 1,
        chunk_size: int = DEFAULT_CHUNK_SIZE,
        pinned_zero: bool = False,
    ) -> None:
        if workers < 1:
            raise ValueError(f"workers must be >= 1, got {workers}")
        if chunk_size < 1:
            raise ValueError(f"chunk_size must be >= 1, got {chunk_size}")
        self.seed = seed
        self.workers = workers
        self.chunk_size = chunk_size
        self.pinned_zero = pinned_zero

    def stream(self, tag: int) -> GaussianStream:
        return GaussianStream(self.seed, tag, pinned_zero=self.pinned_zero)

    def chunk_rows(self, replicates: int) -> List[int]:
        full, rest = divmod(replicates, self.chunk_size)
        return [self.chunk_size] * full + ([rest] if rest else [])

    def map(
        self,
        kernel: Callable[[np.ndarray, int], T],
        replicates: int,
        cols: int,
        tag: int = StreamTag.SAMPLE,
    ) -> List[T]:
        """Run ``kernel(gaussians, chunk_index)`` on every chunk, in chunk order."""
        if replicates < 1:
            raise ValueError(f"replicates must be >= 1, got {replicates}")
        stream = self.stream(tag)
        layout = self.chunk_rows(replicates)

        def run(index: int) -> T:
            return kernel(stream.chunk(index, layout[index], cols), index)

        logger.debug(
            "sampling tag=%s replicates=%s chunks=%s workers=%s",
            int(tag),
            replicates,
            len(layout),
            self.workers,
        )
        if self.workers == 1 or len(layout) == 1:
            return [run(i) for i in range(len(layout))]
        with ThreadPoolExecutor(max_workers=self.workers, thread_name_prefix="replicates") as pool:
            return list(pool.map(run, range(len(layout))))

    def gaussians(self, replicates: int, cols: int, tag: int = StreamTag.SAMPLE) -> np.ndarray:
        """All replicates at once (small runs only)."""
        return np.concatenate(self.map(lambda g, _: g, replicates, cols, tag), axis=0)

    def __repr__(self) -> str:
        return (
            f"ReplicateSampler(seed={self.seed}, workers={self.workers}, "
            f"chunk_size={self.chunk_size})"
        )
