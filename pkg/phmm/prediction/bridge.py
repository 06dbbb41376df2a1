"""Reconstruction of z_m given z_o: Markov bridges between observed anchors, a backward
bridge towards the initial distribution before the first one, and forward simulation
after the last one.

Inside a gap of length D between states i and r, the state following i at distance
d from r is drawn with probability A[i, j] (A^d)[j, r] / (A^(d+1))[i, r].
"""

from __future__ import annotations

import numpy as np

from phmm.core.linalg import PowerCache
from phmm.core.rng import RngStream, categorical
from phmm.errors import CacheMissError, DomainError, ImpossibleBridgeError
from phmm.samplers.layout import SequenceLayout


def bridge_batch(
    left: np.ndarray, right: np.ndarray, gaps: np.ndarray, A: np.ndarray, stack: np.ndarray, generator: np.random.Generator
) -> np.ndarray:
    """Intermediate states of many bridges; row g holds gaps[g] - 1 states then -1 padding"""
    left, right, gaps = (np.asarray(a, dtype=np.int64) for a in (left, right, gaps))
    if left.size == 0:
        return np.zeros((0, 0), dtype=np.int64)
    if np.any(gaps < 1):
        raise DomainError("bridge gaps must be positive")
    joint = stack[gaps, left, right]
    if np.any(joint <= 0):
        bad = int(np.flatnonzero(joint <= 0)[0])
        raise ImpossibleBridgeError(
            f"no path of length {gaps[bad]} from state {left[bad]} to state {right[bad]}"
        )
    states = np.full((left.size, int(gaps.max()) - 1), -1, dtype=np.int64)
    current = left.copy()
    for s in range(states.shape[1]):
        live = np.flatnonzero(gaps - 1 > s)
        remaining = gaps[live] - s - 1
        weights = A[current[live]] * stack[remaining, :, right[live]]
        drawn = categorical(weights, generator.random(live.size))
        states[live, s] = drawn
        current[live] = drawn
    return states


def bridge_fill(z_left: int, z_right: int, gap: int, cache: PowerCache, rng: RngStream) -> np.ndarray:
    """Draw the gap - 1 states strictly between z_left and z_right from the Markov bridge"""
    if gap < 2:
        raise DomainError(f"a bridge needs a gap of at least 2, got {gap}")
    if gap > cache.max_power:
        raise CacheMissError(gap, sorted(cache.declared))
    K = cache.K
    if not (0 <= z_left < K and 0 <= z_right < K):
        raise DomainError(f"bridge endpoints ({z_left}, {z_right}) outside [0, {K})")
    states = bridge_batch(np.array([z_left]), np.array([z_right]), np.array([gap]), cache.base, cache.stack, rng.generator)
    return states[0]


def simulate_forward(A: np.ndarray, start: np.ndarray, steps: int, generator: np.random.Generator) -> np.ndarray:
    """(n, steps) continuation of chains currently in `start`"""
    start = np.asarray(start, dtype=np.int64)
    path = np.empty((start.size, steps), dtype=np.int64)
    current = start
    for s in range(steps):
        current = categorical(A[current], generator.random(start.size))
        path[:, s] = current
    return path


def complete_paths(
    layout: SequenceLayout,
    states: np.ndarray,
    pi: np.ndarray,
    A: np.ndarray,
    stack: np.ndarray,
    generator: np.random.Generator,
) -> np.ndarray:
    """Full latent paths (n, max T) of an observed layout given z at its steps; -1 beyond each T.

    `stack` must hold A^0 .. A^d for every gap and leading offset d of the layout.
    Sequences without observations get a prior draw of the whole path.
    """
    n = layout.n_rows
    width = int(layout.lengths.max()) if n else 0
    paths = np.full((n, width), -1, dtype=np.int64)
    rows, ks = np.nonzero(layout.valid)
    paths[rows, layout.positions[rows, ks]] = states[rows, ks]

    rows, ks = layout.pair_index()
    gaps = layout.gaps[rows, ks]
    inner = gaps >= 2
    rows, ks, gaps = rows[inner], ks[inner], gaps[inner]
    filled = bridge_batch(states[rows, ks - 1], states[rows, ks], gaps, A, stack, generator)
    starts = layout.positions[rows, ks - 1]
    for s in range(filled.shape[1]):
        live = filled[:, s] >= 0
        paths[rows[live], starts[live] + s + 1] = filled[live, s]

    anchored = layout.active[0] if layout.width else 0
    offsets = layout.gaps[:anchored, 0]
    for d in range(1, int(offsets.max(initial=0)) + 1):
        live = np.flatnonzero(offsets >= d)
        position = offsets[live] - d
        weights = (pi @ stack[position]) * A[:, paths[live, position + 1]].T
        paths[live, position] = categorical(weights, generator.random(live.size))

    empty = np.arange(anchored, n)
    paths[empty, 0] = categorical(np.tile(pi, (empty.size, 1)), generator.random(empty.size))
    last = np.zeros(n, dtype=np.int64)
    last[:anchored] = layout.positions[np.arange(anchored), layout.steps[:anchored] - 1]
    tail = layout.lengths - 1 - last
    for d in range(1, int(tail.max(initial=0)) + 1):
        live = np.flatnonzero(tail >= d)
        paths[live, last[live] + d] = categorical(A[paths[live, last[live] + d - 1]], generator.random(live.size))
    return paths
