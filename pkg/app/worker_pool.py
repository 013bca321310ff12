#!/usr/bin/env python3
"""
Worker pool and reproducible random streams for chunked Monte Carlo
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Sequence, TypeVar

import numpy as np

from tail_config import TailConfig

logger = logging.getLogger(__name__)

T = TypeVar("T")


def chunk_rng(seed: int, chunk: int, stream: int = 0) -> np.random.Generator:
    """Counter-based substream: the chunk index is mixed into the stream key"""
    sequence = np.random.SeedSequence(int(seed), spawn_key=(int(stream), int(chunk)))
    return np.random.Generator(np.random.Philox(sequence))


def chunk_sizes(n: int, chunk_size: Optional[int] = None) -> List[int]:
    """Fixed chunking of n replicates; independent of the worker count"""
    chunk_size = chunk_size or TailConfig.CHUNK_SIZE
    full, rest = divmod(int(n), chunk_size)
    return [chunk_size] * full + ([rest] if rest else [])


class WorkerPool:
    """Runs independent work items and returns results in submission order"""

    def __init__(self, workers: Optional[int] = None):
        self.workers = max(1, int(workers or TailConfig.WORKERS))

    def map(self, fn: Callable[..., T], items: Sequence) -> List[T]:
        if self.workers == 1 or len(items) <= 1:
            return [fn(item) for item in items]
        logger.debug(f"Dispatching {len(items)} work items to {self.workers} workers")
        with ThreadPoolExecutor(max_workers=self.workers) as executor:
            return list(executor.map(fn, items))

    def map_chunks(self, fn: Callable[[int, int], T], n: int, chunk_size: Optional[int] = None) -> List[T]:
        """fn(chunk_index, chunk_length) over the fixed chunking of n"""
        sizes = chunk_sizes(n, chunk_size)
        return self.map(lambda pair: fn(pair[0], pair[1]), list(enumerate(sizes)))
