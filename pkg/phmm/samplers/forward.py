"""Collapsed forward filtering and backward sampling over the observed positions.

With y_m and z_m integrated out, consecutive observed positions t_k < t_{k+1} are linked
by (A^{t_{k+1} - t_k})[z_k, z_{k+1}] and the first one by (pi^T A^{t_1})[z_1], t_1 being
the 0-based position of the first observation. Trailing missing positions contribute 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from phmm.core.data import Dataset, ObservedSequence
from phmm.core.linalg import PowerCache, power_stack
from phmm.core.model import HmmParams
from phmm.core.rng import RngStream, categorical
from phmm.errors import DomainError
from phmm.samplers.layout import SequenceLayout, emission_factors


@dataclass(frozen=True)
class ForwardTable:
    """Scaled forward vectors, one row per observed position, and their log normalisers"""

    alpha: np.ndarray
    log_scale: np.ndarray

    def __len__(self) -> int:
        return self.log_scale.size

    @property
    def loglik(self) -> float:
        """log p(y_o | theta) of the sequence"""
        return float(self.log_scale.sum())


@dataclass(frozen=True)
class LatentDraw:
    """z at the observed positions of one sequence"""

    positions: np.ndarray
    states: np.ndarray

    def __len__(self) -> int:
        return self.states.size


def _store(alpha: np.ndarray, log_scale: np.ndarray, k: int, values: np.ndarray) -> None:
    m = values.shape[0]
    total = values.sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_scale[:m, k] = np.log(total)
        alpha[:m, k] = np.where(total[:, None] > 0, values / total[:, None], 0.0)


def forward_batch(layout: SequenceLayout, pi: np.ndarray, B: np.ndarray, stack: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Scaled forward vectors (n, L, K) and log normalisers (n, L) of every row of an observed layout"""
    n, L, K = layout.n_rows, layout.width, pi.size
    alpha = np.zeros((n, L, K))
    log_scale = np.zeros((n, L))
    if L == 0:
        return alpha, log_scale
    emissions = emission_factors(layout.symbols, B)
    m = layout.active[0]
    _store(alpha, log_scale, 0, (pi @ stack[layout.gaps[:m, 0]]) * emissions[:m, 0])
    for k in range(1, L):
        m = layout.active[k]
        carried = np.einsum("nk,nkj->nj", alpha[:m, k - 1], stack[layout.gaps[:m, k]])
        _store(alpha, log_scale, k, carried * emissions[:m, k])
    return alpha, log_scale


def backward_batch(layout: SequenceLayout, alpha: np.ndarray, stack: np.ndarray, uniforms: np.ndarray) -> np.ndarray:
    """Draw z at every step of every row given its forward vectors; -1 beyond each row's steps"""
    n, L = layout.n_rows, layout.width
    states = np.full((n, L), -1, dtype=np.int64)
    for k in range(L - 1, -1, -1):
        m = layout.active[k]
        following = layout.active[k + 1] if k + 1 < L else 0
        weights = alpha[:m, k].copy()
        if following:
            nxt = states[:following, k + 1]
            weights[:following] *= stack[layout.gaps[:following, k + 1], :, nxt]
        if np.any(weights.sum(axis=1) <= 0):
            raise DomainError("observations have zero probability under the given parameters")
        states[:m, k] = categorical(weights, uniforms[:m, k])
    return states


def sample_latents(
    layout: SequenceLayout, pi: np.ndarray, B: np.ndarray, stack: np.ndarray, uniforms: np.ndarray
) -> np.ndarray:
    alpha, _ = forward_batch(layout, pi, B, stack)
    return backward_batch(layout, alpha, stack, uniforms)


def marginal_loglik_layout(layout: SequenceLayout, pi: np.ndarray, A: np.ndarray, B: np.ndarray) -> float:
    _, log_scale = forward_batch(layout, pi, B, power_stack(A, layout.max_power))
    return float(log_scale.sum())


def marginal_loglik(dataset: Dataset, params: HmmParams) -> float:
    """Sum over sequences of log p(y_o | theta)"""
    return marginal_loglik_layout(SequenceLayout.observed(dataset), *params.arrays())


def _single(seq: ObservedSequence, params: HmmParams, cache: PowerCache) -> SequenceLayout:
    layout = SequenceLayout.observed(Dataset((seq,), params.K, params.M))
    for k in layout.needed_gaps():
        cache.power(k)
    return layout


def collapsed_forward(seq: ObservedSequence, params: HmmParams, cache: PowerCache) -> ForwardTable:
    pi, _, B = params.arrays()
    layout = _single(seq, params, cache)
    alpha, log_scale = forward_batch(layout, pi, B, cache.stack)
    steps = seq.n_observed
    return ForwardTable(alpha[0, :steps], log_scale[0, :steps])


def backward_sample(
    table: ForwardTable, seq: ObservedSequence, params: HmmParams, cache: PowerCache, rng: RngStream
) -> LatentDraw:
    """An exact draw of z_o from p(z_o | y_o, theta)"""
    if len(table) != seq.n_observed:
        raise DomainError(f"forward table has {len(table)} steps, sequence has {seq.n_observed} observations")
    if seq.n_observed == 0:
        return LatentDraw(seq.observed_index, np.zeros(0, dtype=np.int64))
    layout = _single(seq, params, cache)
    states = backward_batch(layout, table.alpha[None], cache.stack, rng.uniform((1, layout.width)))
    return LatentDraw(seq.observed_index, states[0])
