"""Reproducible random streams keyed by ``(master_seed, stream_index)``.

Every stream is a PCG64 generator seeded through :class:`numpy.random.SeedSequence`
with the master seed as entropy and the stream index as spawn key, so a given
key yields the same draws on every platform running the same NumPy generator
algorithm.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_U64 = 2**64


@dataclass(frozen=True)
class SeededRng:
    master_seed: int
    stream_index: tuple[int, ...] = ()

    def __post_init__(self):
        if not 0 <= self.master_seed < _U64:
            raise ValueError("master_seed must be a 64-bit unsigned integer")
        idx = self.stream_index
        if isinstance(idx, int):
            idx = (idx,)
            object.__setattr__(self, "stream_index", idx)
        if any(not 0 <= i < _U64 for i in idx):
            raise ValueError("stream indices must be 64-bit unsigned integers")

    def spawn(self, *index: int) -> SeededRng:
        """Child stream whose key extends this one by ``index``."""
        return SeededRng(self.master_seed, self.stream_index + tuple(index))

    def generator(self) -> np.random.Generator:
        """A fresh generator positioned at the start of this stream."""
        ss = np.random.SeedSequence(self.master_seed, spawn_key=self.stream_index)
        return np.random.Generator(np.random.PCG64(ss))


RngLike = SeededRng | np.random.Generator | int | None


def as_generator(rng: RngLike) -> np.random.Generator:
    """Accept a :class:`SeededRng`, a ready generator, an int seed or None."""
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, SeededRng):
        return rng.generator()
    return np.random.default_rng(rng)
