"""
Seeded random streams.

An `Rng` is identified by a 64-bit seed and a path of 64-bit stream ids.  The
same (seed, path, call sequence) reproduces the same draws bit for bit, and
`spawn` derives statistically independent child streams for workers or
documents without touching the parent's state.
"""
from typing import Tuple

import numpy as np

from errors import InvalidParameterError

_UINT64_MAX = 2**64 - 1


def _check_u64(name: str, value: int) -> int:
    value = int(value)
    if value < 0 or value > _UINT64_MAX:
        raise InvalidParameterError(f"{name} must be a 64-bit unsigned integer, got {value}")
    return value


class Rng:
    """A reproducible random stream backed by numpy's PCG64."""

    def __init__(self, seed: int, stream_id: int = 0, parent_path: Tuple[int, ...] = ()):
        self.seed = _check_u64("seed", seed)
        self.stream_id = _check_u64("stream_id", stream_id)
        self.path = tuple(parent_path) + (self.stream_id,)
        seq = np.random.SeedSequence(entropy=self.seed, spawn_key=self.path)
        self.generator = np.random.Generator(np.random.PCG64(seq))

    def spawn(self, stream_id: int) -> "Rng":
        """Derive the child stream `stream_id` of this stream."""
        return Rng(self.seed, stream_id, self.path)

    def next_seed(self) -> int:
        """Draw a fresh 64-bit seed from this stream (advances its state)."""
        return int(self.generator.integers(0, _UINT64_MAX, dtype=np.uint64, endpoint=True))

    def uniform(self, size=None):
        return self.generator.random(size)

    def __repr__(self) -> str:
        return f"Rng(seed={self.seed}, path={self.path})"
