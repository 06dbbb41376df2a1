"""Deterministic random streams keyed by (seed, stream id)"""

from __future__ import annotations

from typing import Tuple

import numpy as np

_MASK64 = (1 << 64) - 1


class RngStream:
    """A numpy Generator seeded from (seed, stream id).

    Streams with equal keys produce identical draws on every platform (PCG64 seeded
    through SeedSequence). Substreams extend the key, so a substream per sequence index
    is independent of how work is split between workers.
    """

    def __init__(self, seed: int, stream: int = 0, *, _key: Tuple[int, ...] = ()) -> None:
        self.seed = int(seed) & _MASK64
        self.stream = int(stream) & _MASK64
        self.key = (self.stream, *_key)
        sequence = np.random.SeedSequence(entropy=self.seed, spawn_key=self.key)
        self.generator = np.random.Generator(np.random.PCG64(sequence))

    def __repr__(self) -> str:
        return f"{type(self).__name__}(seed={self.seed}, key={self.key})"

    def substream(self, *index: int) -> RngStream:
        key = tuple(int(i) & _MASK64 for i in index)
        return RngStream(self.seed, self.stream, _key=(*self.key[1:], *key))

    def uniform(self, size=None) -> np.ndarray:
        return self.generator.random(size)

    def integers(self, high: int, size=None) -> np.ndarray:
        return self.generator.integers(0, high, size=size)

    def dirichlet(self, alpha: np.ndarray) -> np.ndarray:
        return self.generator.dirichlet(alpha)

    def categorical(self, probabilities: np.ndarray) -> np.ndarray:
        """One draw per row of a (..., K) array of unnormalised weights"""
        weights = np.atleast_2d(probabilities)
        return categorical(weights, self.generator.random(weights.shape[0]))


def categorical(weights: np.ndarray, uniforms: np.ndarray) -> np.ndarray:
    """Inverse-CDF draw per row of unnormalised non-negative weights"""
    cdf = np.cumsum(weights, axis=1)
    threshold = uniforms * cdf[:, -1]
    draws = (cdf <= threshold[:, None]).sum(axis=1)
    return np.minimum(draws, weights.shape[1] - 1)
