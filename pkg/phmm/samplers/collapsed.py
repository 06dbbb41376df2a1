"""Collapsed Gibbs sampler targeting p(theta, y_o, z_o).

Each iteration redraws z_o by collapsed forward filtering / backward sampling, then B from
its conjugate Dirichlet conditional and the rows of A and pi by Metropolis-Hastings with
Dirichlet proposals centred on the current value. The A and pi conditionals become
conjugate when every gap is 1 and every sequence starts observed; those cases are drawn
exactly unless `SamplerConfig.conjugate_shortcut` is off.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import xlogy

import phmm.log as log
from phmm.core.data import Dataset
from phmm.core.linalg import PowerCache, power_stack
from phmm.core.model import HmmParams, Priors, Simplex, StochasticMatrix, dirichlet_logpdf
from phmm.core.rng import RngStream
from phmm.definitions import MH_PROPOSAL_RETRIES, LatentKind, SamplerName
from phmm.errors import DomainError
from phmm.samplers.base import ChainTrace, GibbsSampler, SamplerConfig
from phmm.samplers.forward import LatentDraw, sample_latents
from phmm.samplers.layout import SequenceLayout


@dataclass(frozen=True)
class CollapsedCounts:
    """Sufficient statistics of (y_o, z_o) for the collapsed conditionals"""

    pairs: np.ndarray  # (P + 1, K, K): consecutive observed pairs (i, j) by gap length
    offsets: np.ndarray  # (P + 1, K): first observed state by its 0-based position
    emissions: np.ndarray  # (K, M): observed symbol j emitted from state i

    @classmethod
    def from_states(cls, layout: SequenceLayout, states: np.ndarray, K: int, M: int, max_power: int) -> CollapsedCounts:
        size = max_power + 1
        rows, ks = layout.pair_index()
        gaps = layout.gaps[rows, ks]
        flat = (gaps * K + states[rows, ks - 1]) * K + states[rows, ks]
        pairs = np.bincount(flat, minlength=size * K * K).reshape(size, K, K)
        starts = layout.active[0] if layout.width else 0
        first = layout.gaps[:starts, 0] * K + states[:starts, 0]
        offsets = np.bincount(first, minlength=size * K).reshape(size, K)
        valid = layout.valid
        emitted = states[valid] * M + layout.symbols[valid]
        emissions = np.bincount(emitted, minlength=K * M).reshape(K, M)
        return cls(pairs, offsets, emissions)


def transition_loglik(counts: CollapsedCounts, pi: np.ndarray, stack: np.ndarray) -> float:
    """Collapsed log-likelihood of z_o as a function of A (through its powers) and pi"""
    pairs = xlogy(counts.pairs, stack[: counts.pairs.shape[0]]).sum()
    leading = pi @ stack[: counts.offsets.shape[0]]
    return float(pairs + xlogy(counts.offsets, leading).sum())


def initial_loglik(counts: CollapsedCounts, pi: np.ndarray, stack: np.ndarray) -> float:
    leading = pi @ stack[: counts.offsets.shape[0]]
    return float(xlogy(counts.offsets, leading).sum())


def mh_log_ratio(
    current_loglik: float,
    proposed_loglik: float,
    current: np.ndarray,
    proposed: np.ndarray,
    eta: np.ndarray,
    concentration: float,
) -> float:
    """log of the MH acceptance ratio for a Dir(concentration * current) proposal"""
    prior = dirichlet_logpdf(proposed, eta) - dirichlet_logpdf(current, eta)
    backward = dirichlet_logpdf(current, concentration * proposed)
    forward = dirichlet_logpdf(proposed, concentration * current)
    return float(proposed_loglik - current_loglik + prior + backward - forward)


def propose(row: np.ndarray, concentration: float, generator: np.random.Generator) -> Optional[np.ndarray]:
    """A Dir(concentration * row) draw with no zero entry, or None after MH_PROPOSAL_RETRIES attempts"""
    if np.any(row <= 0):
        log.debug("cannot centre a Dirichlet proposal on %s", row)
        return None
    for _ in range(MH_PROPOSAL_RETRIES):
        proposal = generator.dirichlet(concentration * row)
        if np.all(proposal > 0):
            return proposal
    log.debug("no proposal without zero entries in %d attempts", MH_PROPOSAL_RETRIES)
    return None


def _accept(log_ratio: float, generator: np.random.Generator) -> bool:
    return bool(np.log(generator.random()) < log_ratio)


def transition_mh_step(
    counts: CollapsedCounts,
    pi: np.ndarray,
    A: np.ndarray,
    stack: np.ndarray,
    eta_A: np.ndarray,
    concentration: float,
    generator: np.random.Generator,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """One proposal per row of A, in row order. Returns (A, its power stack, acceptance flags)"""
    K = A.shape[0]
    max_power = stack.shape[0] - 1
    accepted = np.zeros(K, dtype=bool)
    current = transition_loglik(counts, pi, stack)
    for i in range(K):
        row = propose(A[i], concentration, generator)
        if row is None:
            continue
        candidate = A.copy()
        candidate[i] = row
        candidate_stack = power_stack(candidate, max_power)
        proposed = transition_loglik(counts, pi, candidate_stack)
        if _accept(mh_log_ratio(current, proposed, A[i], row, eta_A[i], concentration), generator):
            A, stack, current = candidate, candidate_stack, proposed
            accepted[i] = True
    return A, stack, accepted


def initial_mh_step(
    counts: CollapsedCounts,
    pi: np.ndarray,
    stack: np.ndarray,
    eta_pi: np.ndarray,
    concentration: float,
    generator: np.random.Generator,
) -> Tuple[np.ndarray, bool]:
    proposal = propose(pi, concentration, generator)
    if proposal is None:
        return pi, False
    current = initial_loglik(counts, pi, stack)
    proposed = initial_loglik(counts, proposal, stack)
    if _accept(mh_log_ratio(current, proposed, pi, proposal, eta_pi, concentration), generator):
        return proposal, True
    return pi, False


def draw_rows(concentrations: np.ndarray, generator: np.random.Generator) -> np.ndarray:
    return np.vstack([generator.dirichlet(row) for row in concentrations])


def _layout_states(dataset: Dataset, latents: Sequence[LatentDraw]) -> Tuple[SequenceLayout, np.ndarray]:
    if len(latents) != dataset.n:
        raise DomainError(f"{len(latents)} latent draws for {dataset.n} sequences")
    layout = SequenceLayout.observed(dataset)
    states = np.full((layout.n_rows, layout.width), -1, dtype=np.int64)
    for row, index in enumerate(layout.order):
        draw, seq = latents[index], dataset[index]
        if not np.array_equal(draw.positions, seq.observed_index):
            raise DomainError(f"latent draw {index} is not aligned with the observed positions of its sequence")
        if draw.states.size and not 0 <= draw.states.min() <= draw.states.max() < dataset.K:
            raise DomainError(f"latent draw {index} has a state outside [0, {dataset.K})")
        states[row, : seq.n_observed] = draw.states
    return layout, states


def _cached_stack(layout: SequenceLayout, cache: PowerCache) -> np.ndarray:
    for k in layout.needed_gaps():
        cache.power(k)
    return cache.stack


def update_emission(dataset: Dataset, latents: Sequence[LatentDraw], priors: Priors, rng: RngStream) -> StochasticMatrix:
    """Draw B from Dir(eta_B[i] + n_i) where n_ij counts observed symbol j under latent i"""
    layout, states = _layout_states(dataset, latents)
    counts = CollapsedCounts.from_states(layout, states, dataset.K, dataset.M, layout.max_power)
    return StochasticMatrix(draw_rows(priors.eta_B + counts.emissions, rng.generator))


def update_transition_mh(
    dataset: Dataset,
    latents: Sequence[LatentDraw],
    A: Union[StochasticMatrix, np.ndarray],
    priors: Priors,
    config: SamplerConfig,
    cache: PowerCache,
    rng: RngStream,
    *,
    pi: Union[Simplex, np.ndarray],
) -> Tuple[StochasticMatrix, np.ndarray]:
    """Redraw the rows of A given z_o. Returns the new matrix and per-row acceptance flags."""
    A = np.array(A.values if isinstance(A, StochasticMatrix) else A, dtype=np.float64)
    pi = np.asarray(pi.weights if isinstance(pi, Simplex) else pi, dtype=np.float64)
    layout, states = _layout_states(dataset, latents)
    stack = _cached_stack(layout, cache)
    counts = CollapsedCounts.from_states(layout, states, dataset.K, dataset.M, cache.max_power)
    if config.conjugate_shortcut and layout.all_gaps_one and layout.all_offsets_zero:
        drawn = draw_rows(priors.eta_A + counts.pairs[1], rng.generator)
        return StochasticMatrix(drawn), np.ones(dataset.K, dtype=bool)
    drawn, _, accepted = transition_mh_step(counts, pi, A, stack, priors.eta_A, config.mh_concentration, rng.generator)
    return StochasticMatrix(drawn), accepted


def update_initial_mh(
    dataset: Dataset,
    latents: Sequence[LatentDraw],
    pi: Union[Simplex, np.ndarray],
    priors: Priors,
    config: SamplerConfig,
    cache: PowerCache,
    rng: RngStream,
) -> Tuple[Simplex, bool]:
    """Redraw pi given the first observed state of each sequence and its offset"""
    pi = np.asarray(pi.weights if isinstance(pi, Simplex) else pi, dtype=np.float64)
    layout, states = _layout_states(dataset, latents)
    stack = _cached_stack(layout, cache)
    counts = CollapsedCounts.from_states(layout, states, dataset.K, dataset.M, cache.max_power)
    if config.conjugate_shortcut and layout.all_offsets_zero:
        return Simplex(rng.dirichlet(priors.eta_pi + counts.offsets[0])), True
    drawn, accepted = initial_mh_step(counts, pi, stack, priors.eta_pi, config.mh_concentration, rng.generator)
    return Simplex(drawn), accepted


class CollapsedGibbsSampler(GibbsSampler):
    name = SamplerName.COLLAPSED
    latent_kind = LatentKind.OBSERVED

    def __init__(self, dataset: Dataset, priors: Priors, config: SamplerConfig, init: Optional[HmmParams] = None) -> None:
        super().__init__(dataset, priors, config, init)
        layout = self.observed_layout
        self.max_power = layout.max_power
        self.stack: Optional[np.ndarray] = None
        self.states = np.full((layout.n_rows, layout.width), -1, dtype=np.int64)
        self.conjugate_pi = config.conjugate_shortcut and layout.all_offsets_zero
        self.conjugate_A = self.conjugate_pi and layout.all_gaps_one
        self.log_info(
            "%d observed of %d positions, powers up to A^%d, conjugate A: %s, conjugate pi: %s",
            layout.total_steps,
            dataset.total_positions,
            self.max_power,
            self.conjugate_A,
            self.conjugate_pi,
        )
        if log.is_debug_enabled():
            self.log_debug("gap lengths in use: %s", sorted(layout.needed_gaps()))

    @property
    def layout(self) -> SequenceLayout:
        return self.observed_layout

    def cache_phase(self) -> None:
        if self.stack is None:
            self.stack = power_stack(self.A, self.max_power)

    def latent_phase(self, uniforms: np.ndarray) -> int:
        layout = self.layout

        def work(start: int, stop: int) -> int:
            chunk = layout.chunk(start, stop)
            self.states[start:stop, : chunk.width] = sample_latents(
                chunk, self.pi, self.B, self.stack, uniforms[start:stop]
            )
            return int(chunk.active.sum())

        return self.map_chunks(work)

    def parameter_phase(self) -> Tuple[np.ndarray, bool]:
        generator, priors = self.generator, self.priors
        counts = CollapsedCounts.from_states(self.layout, self.states, self.dataset.K, self.dataset.M, self.max_power)
        self.B = draw_rows(priors.eta_B + counts.emissions, generator)
        if self.conjugate_A:
            self.A = draw_rows(priors.eta_A + counts.pairs[1], generator)
            self.stack = None
            accept_A = np.ones(self.dataset.K, dtype=bool)
        else:
            self.A, self.stack, accept_A = transition_mh_step(
                counts, self.pi, self.A, self.stack, priors.eta_A, self.config.mh_concentration, generator
            )
        if self.conjugate_pi:
            self.pi = generator.dirichlet(priors.eta_pi + counts.offsets[0])
            return accept_A, True
        self.cache_phase()
        self.pi, accept_pi = initial_mh_step(counts, self.pi, self.stack, priors.eta_pi, self.config.mh_concentration, generator)
        return accept_A, accept_pi

    def current_latents(self) -> np.ndarray:
        return self.layout.flatten(self.states)


def run_collapsed_gibbs(
    dataset: Dataset, priors: Priors, config: SamplerConfig, init: Optional[HmmParams] = None
) -> ChainTrace:
    return CollapsedGibbsSampler(dataset, priors, config, init).run()
