"""Samplers over the full latent path: partially collapsed (y_m integrated out) and
vanilla data augmentation (y_m imputed every iteration).

Both run the classical scaled forward recursion over every position and draw all of z,
so their latent phase costs n T steps whatever the missing rate.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from phmm.core.data import Dataset, ObservedSequence
from phmm.core.model import HmmParams, Priors
from phmm.core.rng import RngStream, categorical
from phmm.definitions import MISSING, LatentKind, SamplerName, Stream
from phmm.errors import DomainError
from phmm.samplers.base import ChainTrace, GibbsSampler, SamplerConfig
from phmm.samplers.collapsed import draw_rows
from phmm.samplers.layout import SequenceLayout, emission_factors


@dataclass(frozen=True)
class FullLatentDraw:
    """z at every position of one sequence, with the imputed symbols of the vanilla sampler"""

    states: np.ndarray
    imputed: Optional[np.ndarray] = None

    def __len__(self) -> int:
        return self.states.size


def scaled_forward(layout: SequenceLayout, pi: np.ndarray, A: np.ndarray, emissions: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Normalised forward vectors (n, L, K) and scaling factors c (n, L) over a complete layout"""
    n, L, K = layout.n_rows, layout.width, pi.size
    alpha = np.zeros((n, L, K))
    scale = np.ones((n, L))
    for k in range(L):
        m = layout.active[k]
        values = pi * emissions[:m, 0] if k == 0 else (alpha[:m, k - 1] @ A) * emissions[:m, k]
        total = values.sum(axis=1)
        if np.any(total <= 0):
            raise DomainError("observations have zero probability under the given parameters")
        scale[:m, k] = total
        alpha[:m, k] = values / total[:, None]
    return alpha, scale


def scaled_backward(layout: SequenceLayout, A: np.ndarray, emissions: np.ndarray, scale: np.ndarray) -> np.ndarray:
    """Backward vectors scaled by the forward factors, so alpha * beta is the smoothed posterior"""
    n, L = layout.n_rows, layout.width
    beta = np.ones((n, L, A.shape[0]))
    for k in range(L - 2, -1, -1):
        m = layout.active[k + 1]
        beta[:m, k] = ((emissions[:m, k + 1] * beta[:m, k + 1]) @ A.T) / scale[:m, k + 1, None]
    return beta


def backward_states(layout: SequenceLayout, alpha: np.ndarray, A: np.ndarray, uniforms: np.ndarray) -> np.ndarray:
    n, L = layout.n_rows, layout.width
    states = np.full((n, L), -1, dtype=np.int64)
    for k in range(L - 1, -1, -1):
        m = layout.active[k]
        following = layout.active[k + 1] if k + 1 < L else 0
        weights = alpha[:m, k].copy()
        if following:
            weights[:following] *= A[:, states[:following, k + 1]].T
        states[:m, k] = categorical(weights, uniforms[:m, k])
    return states


def classic_forward(seq: ObservedSequence, params: HmmParams) -> Tuple[np.ndarray, np.ndarray]:
    """(alpha (T, K), log scaling factors (T,)) of one sequence, missing positions emitting 1"""
    pi, A, B = params.arrays()
    layout = SequenceLayout.complete(Dataset((seq,), params.K, params.M))
    alpha, scale = scaled_forward(layout, pi, A, emission_factors(layout.symbols, B))
    return alpha[0], np.log(scale[0])


def partial_marginal_loglik(dataset: Dataset, params: HmmParams) -> float:
    """Sum of log p(y_o | theta) by the full-path forward recursion"""
    pi, A, B = params.arrays()
    layout = SequenceLayout.complete(dataset)
    _, scale = scaled_forward(layout, pi, A, emission_factors(layout.symbols, B))
    return float(np.log(scale).sum())


class FullPathSampler(GibbsSampler):
    """FFBS over every position followed by conjugate draws of B, A and pi"""

    latent_kind = LatentKind.FULL

    def __init__(self, dataset: Dataset, priors: Priors, config: SamplerConfig, init: Optional[HmmParams] = None) -> None:
        super().__init__(dataset, priors, config, init)
        self._layout = SequenceLayout.complete(dataset)
        self.states = np.full((self._layout.n_rows, self._layout.width), -1, dtype=np.int64)

    @property
    def layout(self) -> SequenceLayout:
        return self._layout

    def emission_symbols(self) -> np.ndarray:
        """Symbols used for FFBS emissions and B counts; MISSING positions are skipped"""
        return self._layout.symbols

    def latent_phase(self, uniforms: np.ndarray) -> int:
        layout = self._layout
        symbols = self.emission_symbols()

        def work(start: int, stop: int) -> int:
            chunk = layout.chunk(start, stop)
            emissions = emission_factors(symbols[start:stop, : chunk.width], self.B)
            alpha, _ = scaled_forward(chunk, self.pi, self.A, emissions)
            self.states[start:stop, : chunk.width] = backward_states(chunk, alpha, self.A, uniforms[start:stop])
            return int(chunk.active.sum())

        return self.map_chunks(work)

    def parameter_phase(self) -> Tuple[np.ndarray, bool]:
        K, M = self.dataset.K, self.dataset.M
        layout, states, priors = self._layout, self.states, self.priors
        symbols = self.emission_symbols()
        seen = layout.valid & (symbols != MISSING)
        emitted = np.bincount(states[seen] * M + symbols[seen], minlength=K * M).reshape(K, M)
        rows, ks = layout.pair_index()
        moves = np.bincount(states[rows, ks - 1] * K + states[rows, ks], minlength=K * K).reshape(K, K)
        first = np.bincount(states[: layout.active[0], 0], minlength=K) if layout.width else np.zeros(K)
        self.B = draw_rows(priors.eta_B + emitted, self.generator)
        self.A = draw_rows(priors.eta_A + moves, self.generator)
        self.pi = self.generator.dirichlet(priors.eta_pi + first)
        return np.ones(K, dtype=bool), True

    def current_latents(self) -> np.ndarray:
        return self._layout.flatten(self.states)

    def current_draws(self) -> List[FullLatentDraw]:
        return [FullLatentDraw(states) for states in self._layout.per_sequence(self.states)]


class PartiallyCollapsedGibbsSampler(FullPathSampler):
    name = SamplerName.PARTIAL


class VanillaGibbsSampler(FullPathSampler):
    """Imputes y_m from the emission row of the current z_t after each FFBS sweep"""

    name = SamplerName.VANILLA

    def __init__(self, dataset: Dataset, priors: Priors, config: SamplerConfig, init: Optional[HmmParams] = None) -> None:
        super().__init__(dataset, priors, config, init)
        layout = self._layout
        self.missing = layout.valid & (layout.symbols == MISSING)
        self.filled = np.array(layout.symbols)
        start = RngStream(config.seed, Stream.INIT).substream(1)
        self.filled[self.missing] = start.integers(dataset.M, size=int(self.missing.sum()))

    def emission_symbols(self) -> np.ndarray:
        return self.filled

    def latent_phase(self, uniforms: np.ndarray) -> int:
        steps = super().latent_phase(uniforms)
        self.impute()
        return steps

    def impute(self) -> None:
        """Redraw y_m ~ B[z_t] at every missing position"""
        count = int(self.missing.sum())
        if count:
            rows = self.B[self.states[self.missing]]
            self.filled[self.missing] = categorical(rows, self.generator.random(count))

    def current_draws(self) -> List[FullLatentDraw]:
        layout = self._layout
        imputed = layout.per_sequence(np.where(self.missing, self.filled, MISSING))
        return [
            FullLatentDraw(states, values[values != MISSING])
            for states, values in zip(layout.per_sequence(self.states), imputed)
        ]


def run_partially_collapsed_gibbs(
    dataset: Dataset, priors: Priors, config: SamplerConfig, init: Optional[HmmParams] = None
) -> ChainTrace:
    return PartiallyCollapsedGibbsSampler(dataset, priors, config, init).run()


def run_vanilla_gibbs(
    dataset: Dataset, priors: Priors, config: SamplerConfig, init: Optional[HmmParams] = None
) -> ChainTrace:
    return VanillaGibbsSampler(dataset, priors, config, init).run()
