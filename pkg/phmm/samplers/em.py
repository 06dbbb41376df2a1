"""Baum-Welch for HMMs with missing observations, and Viterbi decoding.

Missing positions emit with probability 1, so the E-step marginalises y_m exactly.
pi and A are re-estimated from expected counts over all positions, B from expected counts
at observed positions only. Rows with zero expected count get EM_SMOOTHING added to every
entry before normalisation.
"""

from __future__ import annotations

from dataclasses import dataclass
from time import perf_counter
from typing import List, NamedTuple, Optional, Tuple

import numpy as np

import phmm.log as log
from phmm.core.data import Dataset
from phmm.core.model import HmmParams, Priors
from phmm.core.rng import RngStream
from phmm.definitions import EM_MAX_ITERS, EM_SMOOTHING, EM_TOLERANCE, MISSING, Stream
from phmm.errors import DomainError
from phmm.samplers.baselines import scaled_backward, scaled_forward
from phmm.samplers.layout import SequenceLayout, emission_factors


@dataclass(frozen=True)
class EmConfig:
    max_iters: int = EM_MAX_ITERS
    tol: float = EM_TOLERANCE
    restarts: int = 1
    seed: int = 0

    def __post_init__(self) -> None:
        if self.max_iters < 1:
            raise DomainError(f"max_iters must be at least 1, got {self.max_iters}")
        if not self.tol > 0:
            raise DomainError(f"tol must be positive, got {self.tol}")
        if self.restarts < 1:
            raise DomainError(f"restarts must be at least 1, got {self.restarts}")


class EmResult(NamedTuple):
    params: HmmParams
    loglik: np.ndarray


class ExpectedCounts(NamedTuple):
    loglik: float
    first: np.ndarray
    moves: np.ndarray
    emitted: np.ndarray


def expected_counts(layout: SequenceLayout, pi: np.ndarray, A: np.ndarray, B: np.ndarray) -> ExpectedCounts:
    """E-step over a complete layout"""
    K, M = B.shape
    emissions = emission_factors(layout.symbols, B)
    alpha, scale = scaled_forward(layout, pi, A, emissions)
    beta = scaled_backward(layout, A, emissions, scale)
    gamma = alpha * beta
    first = gamma[: layout.active[0], 0].sum(axis=0) if layout.width else np.zeros(K)
    moves = np.zeros((K, K))
    for k in range(1, layout.width):
        m = layout.active[k]
        right = emissions[:m, k] * beta[:m, k] / scale[:m, k, None]
        moves += A * (alpha[:m, k - 1].T @ right)
    seen = layout.valid & (layout.symbols != MISSING)
    emitted = np.zeros((K, M))
    for j in range(M):
        emitted[:, j] = gamma[seen & (layout.symbols == j)].sum(axis=0)
    return ExpectedCounts(float(np.log(scale).sum()), first, moves, emitted)


def normalise_rows(counts: np.ndarray, block: str) -> np.ndarray:
    counts = np.atleast_2d(counts)
    empty = counts.sum(axis=1) <= 0
    if np.any(empty):
        log.debug("smoothing %d empty row(s) of %s", int(empty.sum()), block)
        counts = counts + EM_SMOOTHING * empty[:, None]
    return counts / counts.sum(axis=1, keepdims=True)


def m_step(counts: ExpectedCounts) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    return (
        normalise_rows(counts.first, "pi")[0],
        normalise_rows(counts.moves, "A"),
        normalise_rows(counts.emitted, "B"),
    )


def run_em(dataset: Dataset, init: HmmParams, max_iters: int = EM_MAX_ITERS, tol: float = EM_TOLERANCE) -> EmResult:
    """Iterate until successive log-likelihoods differ by less than tol, or max_iters M-steps.

    The trace holds log p(y_o | theta) before each M-step; on convergence the returned
    parameters are those of its last entry.
    """
    EmConfig(max_iters=max_iters, tol=tol)
    if (init.K, init.M) != (dataset.K, dataset.M):
        raise DomainError(f"initial parameters are for (K={init.K}, M={init.M})")
    layout = SequenceLayout.complete(dataset)
    pi, A, B = (np.array(a) for a in init.arrays())
    trace: List[float] = []
    for it in range(max_iters):
        counts = expected_counts(layout, pi, A, B)
        converged = bool(trace) and abs(counts.loglik - trace[-1]) < tol
        trace.append(counts.loglik)
        if converged:
            log.debug("EM converged after %d M-steps (loglik %.6f)", it, counts.loglik)
            break
        pi, A, B = m_step(counts)
    else:
        log.debug("EM stopped at max_iters=%d (loglik %.6f)", max_iters, trace[-1])
    return EmResult(HmmParams.from_arrays(pi, A, B), np.array(trace))


def fit_em(dataset: Dataset, priors: Priors, config: EmConfig, init: Optional[HmmParams] = None) -> EmResult:
    """Best of `config.restarts` EM runs by final log-likelihood; starts after the first are prior draws"""
    started = perf_counter()
    stream = RngStream(config.seed, Stream.INIT)
    best: Optional[EmResult] = None
    for restart in range(config.restarts):
        if restart == 0:
            start = init if init is not None else priors.sample(stream.generator)
        else:
            start = priors.sample(stream.substream(restart).generator)
        result = run_em(dataset, start, config.max_iters, config.tol)
        log.info("EM start %d: %d iterations, loglik %.4f", restart, result.loglik.size, result.loglik[-1])
        if best is None or result.loglik[-1] > best.loglik[-1]:
            best = result
    log.info("EM finished in %.2fs, best loglik %.4f", perf_counter() - started, best.loglik[-1])
    return best


def viterbi(dataset: Dataset, params: HmmParams) -> List[np.ndarray]:
    """Most probable full latent path of each sequence, missing emissions scored 1; ties go to the lowest state"""
    pi, A, B = params.arrays()
    layout = SequenceLayout.complete(dataset)
    n, L, K = layout.n_rows, layout.width, params.K
    with np.errstate(divide="ignore"):
        log_e = np.log(emission_factors(layout.symbols, B))
        log_a, log_pi = np.log(A), np.log(pi)
    delta = np.full((n, L, K), -np.inf)
    back = np.zeros((n, L, K), dtype=np.int64)
    if L:
        m = layout.active[0]
        delta[:m, 0] = log_pi + log_e[:m, 0]
    for k in range(1, L):
        m = layout.active[k]
        scores = delta[:m, k - 1, :, None] + log_a[None]
        back[:m, k] = scores.argmax(axis=1)
        delta[:m, k] = scores.max(axis=1) + log_e[:m, k]
    states = np.full((n, L), -1, dtype=np.int64)
    for k in range(L - 1, -1, -1):
        m = layout.active[k]
        following = layout.active[k + 1] if k + 1 < L else 0
        states[following:m, k] = delta[following:m, k].argmax(axis=1)
        if following:
            states[:following, k] = back[np.arange(following), k + 1, states[:following, k + 1]]
    return layout.per_sequence(states)
