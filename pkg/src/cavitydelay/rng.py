"""Counter-based random number streams for reproducible parallel Monte Carlo.

Every batch of work owns an :class:`RngStream` keyed by ``(seed, stream_id)``.
The underlying bit generator is Philox, a counter-based generator, so the
output is a pure function of ``(seed, stream_id, draw index)``: rerunning a
stream reproduces bits exactly, and distinct keys give statistically
independent sequences. Batches can therefore be executed in any order or on
any number of workers and still merge deterministically.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["RngStream"]

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class RngStream:
    """A (seed, stream_id) key addressing one independent Philox stream.

    ``stream_id`` is keyed to the batch index, never to worker identity, so
    the mapping from work item to random numbers is stable under any
    parallel schedule.
    """

    seed: int
    stream_id: int = 0

    def __post_init__(self):
        object.__setattr__(self, "seed", int(self.seed) & _MASK64)
        object.__setattr__(self, "stream_id", int(self.stream_id) & _MASK64)

    def generator(self) -> np.random.Generator:
        """A fresh Generator positioned at draw index 0 of this stream."""
        key = np.array([self.seed, self.stream_id], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))

    def substream(self, stream_id: int) -> "RngStream":
        """The stream with the same seed and a different stream_id."""
        return RngStream(self.seed, stream_id)
