"""Missing-at-random masking mechanisms"""

from __future__ import annotations

import math

import numpy as np

from phmm.core.data import Dataset
from phmm.core.rng import RngStream
from phmm.definitions import MISSING
from phmm.errors import DomainError


def apply_random_missing(dataset: Dataset, p: float, rng: RngStream) -> Dataset:
    """Mask every position independently with probability p"""
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"missing probability must lie in [0, 1], got {p}")
    draws = rng.uniform(dataset.total_positions)
    masked, start = [], 0
    for seq in dataset:
        entries = seq.entries.copy()
        entries[draws[start : start + seq.T] < p] = MISSING
        masked.append(type(seq)(entries))
        start += seq.T
    return dataset.replace(masked)


def block_length(T: int, p: float) -> int:
    """round(T p) with halves rounded up"""
    return int(math.floor(T * p + 0.5))


def apply_blockwise_missing(dataset: Dataset, p: float, rng: RngStream) -> Dataset:
    """Mask one contiguous block of round(T p) positions per sequence, its start uniform on [0, T - j]"""
    if not 0.0 <= p < 1.0:
        raise DomainError(f"block missing fraction must lie in [0, 1), got {p}")
    masked = []
    for index, seq in enumerate(dataset):
        j = block_length(seq.T, p)
        if j >= seq.T:
            raise DomainError(f"block of length {j} would mask all of sequence {index} (T={seq.T})")
        start = int(rng.integers(seq.T - j + 1))
        entries = seq.entries.copy()
        entries[start : start + j] = MISSING
        masked.append(type(seq)(entries))
    return dataset.replace(masked)
