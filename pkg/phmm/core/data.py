"""Observed sequences with missing entries, and datasets of them"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, List, Optional, Sequence, Union

import numpy as np

from phmm.definitions import MISSING
from phmm.errors import DomainError

Entry = Optional[int]


@dataclass(frozen=True)
class ObservedSequence:
    """A length-T sequence of symbol indices, MISSING where unobserved.

    `observed_index` holds the strictly increasing positions t_1 < ... < t_K of the
    observed entries and `gaps` the differences t_{k+1} - t_k.
    """

    entries: np.ndarray
    observed_index: np.ndarray = field(init=False, repr=False)
    gaps: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        entries = np.array(self.entries, dtype=np.int64)
        if entries.ndim != 1:
            raise DomainError(f"a sequence must be one-dimensional, got shape {entries.shape}")
        if entries.size == 0:
            raise DomainError("a sequence must have at least one position")
        if np.any(entries < MISSING):
            raise DomainError(f"invalid symbol index {entries.min()}")
        observed_index = np.flatnonzero(entries != MISSING)
        gaps = np.diff(observed_index)
        for array in (entries, observed_index, gaps):
            array.flags.writeable = False
        super().__setattr__("entries", entries)
        super().__setattr__("observed_index", observed_index)
        super().__setattr__("gaps", gaps)

    @classmethod
    def from_values(cls, values: Iterable[Union[int, float, None]]) -> ObservedSequence:
        """Build from integers with None (or NaN) marking missing entries"""
        entries = []
        for value in values:
            if value is None or (isinstance(value, float) and np.isnan(value)):
                entries.append(MISSING)
            else:
                if int(value) != value or value < 0:
                    raise DomainError(f"symbols must be non-negative integers, got {value!r}")
                entries.append(int(value))
        return cls(np.asarray(entries, dtype=np.int64))

    @classmethod
    def from_index(cls, T: int, observed_index: Sequence[int], symbols: Sequence[int]) -> ObservedSequence:
        entries = np.full(T, MISSING, dtype=np.int64)
        entries[np.asarray(observed_index, dtype=np.int64)] = symbols
        return cls(entries)

    def __len__(self) -> int:
        return self.entries.size

    @property
    def T(self) -> int:
        return self.entries.size

    @property
    def n_observed(self) -> int:
        return self.observed_index.size

    @property
    def n_missing(self) -> int:
        return self.T - self.n_observed

    @property
    def missing_mask(self) -> np.ndarray:
        return self.entries == MISSING

    @property
    def observed_symbols(self) -> np.ndarray:
        return self.entries[self.observed_index]

    @property
    def offset(self) -> int:
        """Number of missing positions before the first observation (T if none observed)"""
        return int(self.observed_index[0]) if self.n_observed else self.T

    def to_values(self) -> List[Entry]:
        return [None if value == MISSING else int(value) for value in self.entries]

    def masked(self, positions: Sequence[int]) -> ObservedSequence:
        entries = self.entries.copy()
        entries[np.asarray(positions, dtype=np.int64)] = MISSING
        return ObservedSequence(entries)


@dataclass(frozen=True)
class Dataset:
    """Sequences over latent alphabet size K and observed alphabet size M"""

    sequences: tuple
    K: int
    M: int

    def __post_init__(self) -> None:
        sequences = tuple(
            seq if isinstance(seq, ObservedSequence) else ObservedSequence.from_values(seq)
            for seq in self.sequences
        )
        if self.K < 1 or self.M < 1:
            raise DomainError(f"alphabet sizes must be positive (K={self.K}, M={self.M})")
        for index, seq in enumerate(sequences):
            if seq.n_observed and seq.entries.max() >= self.M:
                raise DomainError(f"sequence {index} has symbol {seq.entries.max()} >= M={self.M}")
        super().__setattr__("sequences", sequences)

    def __len__(self) -> int:
        return len(self.sequences)

    def __iter__(self) -> Iterator[ObservedSequence]:
        return iter(self.sequences)

    def __getitem__(self, index: int) -> ObservedSequence:
        return self.sequences[index]

    @property
    def n(self) -> int:
        return len(self.sequences)

    @property
    def lengths(self) -> np.ndarray:
        return np.array([seq.T for seq in self.sequences], dtype=np.int64)

    @property
    def total_positions(self) -> int:
        return int(sum(seq.T for seq in self.sequences))

    @property
    def total_observed(self) -> int:
        return int(sum(seq.n_observed for seq in self.sequences))

    @property
    def total_missing(self) -> int:
        return self.total_positions - self.total_observed

    def replace(self, sequences: Iterable[ObservedSequence]) -> Dataset:
        return Dataset(tuple(sequences), self.K, self.M)


def missing_rate(dataset: Dataset) -> float:
    """|y_m| / (|y_m| + |y_o|) pooled over all sequences"""
    total = dataset.total_positions
    if total == 0:
        raise DomainError("missing rate of an empty dataset is undefined")
    return dataset.total_missing / total
