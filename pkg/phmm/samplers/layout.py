"""Rectangular, prefix-sorted views of a dataset for vectorised recursions.

Rows are sequences sorted by decreasing number of steps, so the rows taking part in
step k are always the prefix ``[:active[k]]``. A step is an observed position for the
collapsed recursion and every position for the full-path recursions, hence the total
work of a sweep is ``sum(steps)``: (1 - p) n T for the former and n T for the latter.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Set

import numpy as np

from phmm.core.data import Dataset
from phmm.definitions import MISSING, LatentKind


@dataclass(frozen=True)
class SequenceLayout:
    kind: LatentKind
    order: np.ndarray  # (n,) dataset index of each row
    lengths: np.ndarray  # (n,) sequence length T of each row
    steps: np.ndarray  # (n,) number of steps of each row, non-increasing
    positions: np.ndarray  # (n, L) sequence position of each step, -1 beyond steps
    symbols: np.ndarray  # (n, L) symbol at each step, MISSING if unobserved or beyond steps
    gaps: np.ndarray  # (n, L) positions[k] - positions[k-1]; gaps[:, 0] is the leading offset
    active: np.ndarray  # (L,) number of rows with more than k steps

    @classmethod
    def observed(cls, dataset: Dataset) -> SequenceLayout:
        """Steps are the observed positions t_1 < ... < t_K of each sequence"""
        return cls._build(dataset, LatentKind.OBSERVED, [seq.observed_index for seq in dataset])

    @classmethod
    def complete(cls, dataset: Dataset) -> SequenceLayout:
        """Steps are all positions 0 .. T-1 of each sequence"""
        return cls._build(dataset, LatentKind.FULL, [np.arange(seq.T) for seq in dataset])

    @classmethod
    def _build(cls, dataset: Dataset, kind: LatentKind, step_positions: List[np.ndarray]) -> SequenceLayout:
        n = len(dataset)
        counts = np.array([p.size for p in step_positions], dtype=np.int64)
        order = np.argsort(-counts, kind="stable")
        width = int(counts.max()) if n else 0
        positions = np.full((n, width), -1, dtype=np.int64)
        symbols = np.full((n, width), MISSING, dtype=np.int64)
        gaps = np.zeros((n, width), dtype=np.int64)
        for row, index in enumerate(order):
            pos = step_positions[index]
            if pos.size == 0:
                continue
            positions[row, : pos.size] = pos
            symbols[row, : pos.size] = dataset[index].entries[pos]
            gaps[row, 0] = pos[0]
            gaps[row, 1 : pos.size] = np.diff(pos)
        steps = counts[order]
        active = (steps[None, :] > np.arange(width)[:, None]).sum(axis=1) if n else np.zeros(0, np.int64)
        lengths = dataset.lengths[order] if n else np.zeros(0, np.int64)
        layout = cls(kind, order, lengths, steps, positions, symbols, gaps, active.astype(np.int64))
        for array in (order, lengths, steps, positions, symbols, gaps, layout.active):
            array.flags.writeable = False
        return layout

    @property
    def n_rows(self) -> int:
        return self.order.size

    @property
    def width(self) -> int:
        return self.positions.shape[1]

    @property
    def total_steps(self) -> int:
        return int(self.steps.sum())

    @property
    def valid(self) -> np.ndarray:
        return np.arange(self.width)[None, :] < self.steps[:, None]

    @property
    def offsets(self) -> np.ndarray:
        """Leading offset t_1 of each row with at least one step"""
        return self.gaps[: self.active[0], 0] if self.width else np.zeros(0, np.int64)

    def pair_index(self):
        """(rows, steps) of every step with a predecessor"""
        rows, ks = np.nonzero(self.valid[:, 1:])
        return rows, ks + 1

    def needed_gaps(self) -> Set[int]:
        """Exponents of A used by the recursions and bridges over this layout"""
        needed = {1}
        if self.width:
            rows, ks = self.pair_index()
            needed.update(np.unique(self.gaps[rows, ks]).tolist())
            needed.update(int(o) for o in np.unique(self.offsets) if o > 0)
        return needed

    @property
    def max_power(self) -> int:
        return max(self.needed_gaps())

    @property
    def all_gaps_one(self) -> bool:
        rows, ks = self.pair_index()
        return bool(np.all(self.gaps[rows, ks] == 1))

    @property
    def all_offsets_zero(self) -> bool:
        return bool(np.all(self.offsets == 0))

    def flat_index(self):
        """(rows, steps) of every valid step, ordered by (dataset index, step)"""
        rows, ks = np.nonzero(self.valid)
        key = np.lexsort((ks, self.order[rows]))
        return rows[key], ks[key]

    def flatten(self, values: np.ndarray) -> np.ndarray:
        rows, ks = self.flat_index()
        return values[rows, ks]

    def unflatten(self, flat: np.ndarray, fill: int = -1) -> np.ndarray:
        values = np.full((self.n_rows, self.width), fill, dtype=np.int64)
        rows, ks = self.flat_index()
        values[rows, ks] = flat
        return values

    def per_sequence(self, values: np.ndarray) -> List[np.ndarray]:
        """Split a (n, L) array into one array per sequence, in dataset order"""
        out: List[np.ndarray] = [np.zeros(0, values.dtype)] * self.n_rows
        for row, index in enumerate(self.order):
            out[index] = values[row, : self.steps[row]].copy()
        return out

    def chunk(self, start: int, stop: int) -> SequenceLayout:
        """The rows [start, stop); still prefix-sorted"""
        steps = self.steps[start:stop]
        width = int(steps.max()) if steps.size else 0
        active = np.clip(self.active[:width] - start, 0, stop - start)
        return SequenceLayout(
            self.kind,
            self.order[start:stop],
            self.lengths[start:stop],
            steps,
            self.positions[start:stop, :width],
            self.symbols[start:stop, :width],
            self.gaps[start:stop, :width],
            active,
        )

    def repeat(self, copies: int) -> SequenceLayout:
        """Each row repeated `copies` times, consecutively; rows stay prefix-sorted"""
        take = lambda a: np.repeat(a, copies, axis=0)
        steps = take(self.steps)
        return SequenceLayout(
            self.kind,
            take(self.order),
            take(self.lengths),
            steps,
            take(self.positions),
            take(self.symbols),
            take(self.gaps),
            self.active * copies,
        )


def emission_factors(symbols: np.ndarray, B: np.ndarray) -> np.ndarray:
    """(n, L, K) factors B[z, y] per step; 1 where the symbol is MISSING"""
    missing = symbols == MISSING
    factors = B.T[np.where(missing, 0, symbols)]
    factors[missing] = 1.0
    return factors
