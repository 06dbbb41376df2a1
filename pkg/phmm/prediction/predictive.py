"""Posterior predictive draws from a ChainTrace.

Each draw picks a retained theta uniformly with replacement, samples z_o by collapsed
forward filtering / backward sampling and, where needed, completes z_m with bridges.
Draws that share a theta share one forward pass.
"""

from __future__ import annotations

from typing import Iterator, List, Tuple, Union

import numpy as np

from phmm.core.data import Dataset, ObservedSequence
from phmm.core.linalg import power_stack
from phmm.core.rng import RngStream, categorical
from phmm.definitions import MISSING
from phmm.errors import DomainError
from phmm.prediction.bridge import complete_paths, simulate_forward
from phmm.samplers.base import ChainTrace
from phmm.samplers.forward import LatentDraw, backward_batch, forward_batch
from phmm.samplers.layout import SequenceLayout


def theta_indices(trace: ChainTrace, draws: int, generator: np.random.Generator) -> np.ndarray:
    if len(trace) == 0:
        raise DomainError("cannot predict from an empty trace")
    if draws < 1:
        raise DomainError(f"draws must be positive, got {draws}")
    return generator.integers(0, len(trace), size=draws)


def _groups(indices: np.ndarray) -> Iterator[Tuple[int, np.ndarray]]:
    for u in np.unique(indices):
        yield int(u), np.flatnonzero(indices == u)


def _single(trace: ChainTrace, seq: ObservedSequence) -> SequenceLayout:
    return SequenceLayout.observed(Dataset((seq,), trace.K, trace.M))


def _posterior_paths(
    trace: ChainTrace, seq: ObservedSequence, draws: int, generator: np.random.Generator, full: bool
) -> Iterator[Tuple[int, np.ndarray, np.ndarray, np.ndarray]]:
    """Yield (theta index, draw slots, z_o draws, full paths or None) per distinct theta"""
    layout = _single(trace, seq)
    for u, slots in _groups(theta_indices(trace, draws, generator)):
        pi, A, B = trace.pi[u], trace.A[u], trace.B[u]
        stack = power_stack(A, layout.max_power)
        alpha, _ = forward_batch(layout, pi, B, stack)
        copies = layout.repeat(slots.size)
        uniforms = generator.random((slots.size, layout.width))
        states = backward_batch(copies, np.repeat(alpha, slots.size, axis=0), stack, uniforms)
        paths = complete_paths(copies, states, pi, A, stack, generator) if full else None
        yield u, slots, states, paths


def forecast(trace: ChainTrace, seq: ObservedSequence, W: int, draws: int, rng: RngStream) -> List[np.ndarray]:
    """Latent paths of length T + W from p(z, z_{T+1..T+W} | y_o)"""
    if W < 1:
        raise DomainError(f"forecast horizon W must be positive, got {W}")
    out = np.zeros((draws, seq.T + W), dtype=np.int64)
    for u, slots, _, paths in _posterior_paths(trace, seq, draws, rng.generator, full=True):
        out[slots, : seq.T] = paths
        out[slots, seq.T :] = simulate_forward(trace.A[u], paths[:, -1], W, rng.generator)
    return list(out)


def decode_new(
    trace: ChainTrace, new_seq: ObservedSequence, draws: int, rng: RngStream, full_path: bool = False
) -> Union[List[LatentDraw], List[np.ndarray]]:
    """Draws of z at the observed positions of a new sequence, or of its whole path"""
    steps = new_seq.n_observed
    observed = np.zeros((draws, steps), dtype=np.int64)
    complete = np.zeros((draws, new_seq.T), dtype=np.int64)
    for _, slots, states, paths in _posterior_paths(trace, new_seq, draws, rng.generator, full=full_path):
        observed[slots] = states[:, :steps]
        if full_path:
            complete[slots] = paths
    if full_path:
        return list(complete)
    return [LatentDraw(new_seq.observed_index, states) for states in observed]


def impute_missing(trace: ChainTrace, seq: ObservedSequence, draws: int, rng: RngStream) -> List[np.ndarray]:
    """Per draw, symbols at the missing positions of seq from p(y_m | y_o)"""
    missing = np.flatnonzero(seq.missing_mask)
    out = np.zeros((draws, missing.size), dtype=np.int64)
    if missing.size == 0:
        theta_indices(trace, draws, rng.generator)
        return list(out)
    for u, slots, _, paths in _posterior_paths(trace, seq, draws, rng.generator, full=True):
        latent = paths[:, missing].ravel()
        drawn = categorical(trace.B[u][latent], rng.generator.random(latent.size))
        out[slots] = drawn.reshape(slots.size, missing.size)
    return list(out)


def imputation_histogram(imputations: List[np.ndarray], M: int) -> np.ndarray:
    """(missing positions, M) counts of imputed symbols over draws"""
    if not imputations:
        return np.zeros((0, M), dtype=np.int64)
    stacked = np.vstack(imputations)
    counts = np.zeros((stacked.shape[1], M), dtype=np.int64)
    for j in range(M):
        counts[:, j] = (stacked == j).sum(axis=0)
    return counts


def impute_dataset(trace: ChainTrace, dataset: Dataset, draws: int, rng: RngStream) -> List[np.ndarray]:
    """Imputation histograms (missing positions, M) for every sequence of a dataset"""
    generator = rng.generator
    layout = SequenceLayout.observed(dataset)
    width = int(layout.lengths.max()) if layout.n_rows else 0
    entries = np.full((layout.n_rows, width), MISSING, dtype=np.int64)
    for row, index in enumerate(layout.order):
        entries[row, : dataset[index].T] = dataset[index].entries
    missing = (entries == MISSING) & (np.arange(width)[None, :] < layout.lengths[:, None])
    counts = np.zeros((int(missing.sum()), dataset.M), dtype=np.int64)
    for u, slots in _groups(theta_indices(trace, draws, generator)):
        pi, A, B = trace.pi[u], trace.A[u], trace.B[u]
        stack = power_stack(A, layout.max_power)
        alpha, _ = forward_batch(layout, pi, B, stack)
        for _ in slots:
            states = backward_batch(layout, alpha, stack, generator.random((layout.n_rows, layout.width)))
            latent = complete_paths(layout, states, pi, A, stack, generator)[missing]
            drawn = categorical(B[latent], generator.random(latent.size))
            counts[np.arange(latent.size), drawn] += 1
    histograms: List[np.ndarray] = [np.zeros((0, dataset.M), dtype=np.int64)] * dataset.n
    bounds = np.cumsum(missing.sum(axis=1))
    for row, index in enumerate(layout.order):
        histograms[index] = counts[bounds[row] - missing[row].sum() : bounds[row]]
    return histograms


def posterior_mode(histogram: np.ndarray) -> np.ndarray:
    """Most frequent symbol per position; ties go to the lowest symbol"""
    return histogram.argmax(axis=1)
