"""
Document sharding for the per-document steps of an iteration.

Documents are split into one contiguous block per worker.  Block i always
draws from stream i of the stage's Rng and results come back in block order,
so the output depends on (seed, worker count, inputs) only.
"""
import logging
from multiprocessing.pool import ThreadPool
from typing import Callable, List, Optional, Tuple, TypeVar

import numpy as np

from sampling.rng import Rng

logger = logging.getLogger(__name__)

T = TypeVar("T")


class DocumentShards:
    """Contiguous document blocks mapped over a thread pool."""

    def __init__(self, J: int, workers: int = 1):
        self.J = int(J)
        self.workers = max(1, int(workers))
        n_blocks = max(1, min(self.workers, self.J))
        edges = np.linspace(0, self.J, n_blocks + 1).round().astype(int)
        self.blocks: List[Tuple[int, int]] = [(int(lo), int(hi)) for lo, hi in zip(edges[:-1], edges[1:])]
        self._pool: Optional[ThreadPool] = None

    def map(self, fn: Callable[[int, int, Rng], T], rng: Rng) -> List[T]:
        """Apply fn(lo, hi, block_rng) to every block; results in block order."""
        tasks = [(lo, hi, rng.spawn(i)) for i, (lo, hi) in enumerate(self.blocks)]
        if len(tasks) == 1:
            return [fn(*tasks[0])]
        if self._pool is None:
            self._pool = ThreadPool(len(tasks))
            logger.debug(f"Started a pool of {len(tasks)} document workers")
        return self._pool.starmap(fn, tasks)

    def map_columns(self, fn: Callable[[int, int, Rng], np.ndarray], rng: Rng) -> np.ndarray:
        """`map` for blocks that each return a (rows x block width) array."""
        return np.concatenate(self.map(fn, rng), axis=-1)

    def close(self) -> None:
        if self._pool is not None:
            self._pool.close()
            self._pool.join()
            self._pool = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
