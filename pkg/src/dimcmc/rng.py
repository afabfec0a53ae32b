"""Reproducible random-number streams.

Every stochastic operation in the package draws from an `RngStream`, a
(seed, stream id) pair optionally extended by an integer path. Identical
streams reproduce identical draw sequences, and disjoint paths give
statistically independent generators, so independent chain components
(proposals, inner samplers, replicate batches) can be derived from one
master seed without sharing state.
"""

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class RngStream:
    """A named, reproducible source of randomness.

    `generator()` always returns a fresh generator positioned at the start
    of the stream; `split(*path)` derives an independent child stream.
    """

    seed: int
    stream: int = 0
    path: tuple = field(default_factory=tuple)

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream, *self.path))
        return np.random.default_rng(ss)

    def split(self, *path: int) -> "RngStream":
        return RngStream(self.seed, self.stream, self.path + tuple(int(p) for p in path))
