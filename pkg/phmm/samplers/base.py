"""Configuration, trace and iteration loop shared by the Gibbs samplers"""

from __future__ import annotations

from abc import ABC, abstractmethod
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, field
from time import perf_counter
from typing import Callable, ClassVar, Iterator, List, Optional, Tuple

import numpy as np

from phmm.core.data import Dataset
from phmm.core.model import HmmParams, Priors
from phmm.core.rng import RngStream
from phmm.definitions import DEFAULT_MH_CONCENTRATION, LatentKind, SamplerName, Stream
from phmm.errors import DomainError
from phmm.log import Loggable
from phmm.samplers.forward import marginal_loglik_layout
from phmm.samplers.layout import SequenceLayout
from phmm.utils import PhaseTimer, contiguous_ranges, resolve_workers


@dataclass(frozen=True)
class SamplerConfig:
    iterations: int = 5000
    burn_in: int = 2500
    mh_concentration: float = DEFAULT_MH_CONCENTRATION
    thin: int = 1
    seed: int = 0
    keep_latents: bool = False
    conjugate_shortcut: bool = True
    record_loglik: bool = True
    workers: int = 1
    log_interval: int = 500

    def __post_init__(self) -> None:
        if self.iterations < 1:
            raise DomainError(f"iterations must be positive, got {self.iterations}")
        if not 0 <= self.burn_in < self.iterations:
            raise DomainError(f"burn_in must lie in [0, iterations), got {self.burn_in}")
        if self.thin < 1:
            raise DomainError(f"thin must be positive, got {self.thin}")
        if not self.mh_concentration > 0:
            raise DomainError(f"mh_concentration must be positive, got {self.mh_concentration}")

    @property
    def retained(self) -> int:
        return (self.iterations - self.burn_in) // self.thin

    def keeps(self, iteration: int) -> bool:
        """Whether the draw made at 0-based `iteration` is retained"""
        return iteration >= self.burn_in and (iteration - self.burn_in + 1) % self.thin == 0

    def to_dict(self) -> dict:
        return {name: getattr(self, name) for name in self.__dataclass_fields__}


@dataclass
class ChainTrace:
    """Retained posterior draws and per-iteration bookkeeping of one chain.

    Timings are wall-clock milliseconds per iteration: `ms_cache` for matrix-power
    rebuilds, `ms_latent` for the latent (and imputation) phase and `ms_params` for the
    parameter updates. `z_steps` counts the forward recursion steps the latent phase ran, summed
    over worker chunks. It is fixed by the dataset: observed positions for the collapsed sampler,
    every position for the full-path ones.
    Latents, when kept, are flattened per draw in dataset order over observed positions
    (LatentKind.OBSERVED) or over all positions (LatentKind.FULL).
    """

    sampler: str
    K: int
    M: int
    config: SamplerConfig
    latent_kind: LatentKind
    iteration: np.ndarray
    pi: np.ndarray
    A: np.ndarray
    B: np.ndarray
    loglik: np.ndarray
    ms_cache: np.ndarray
    ms_latent: np.ndarray
    ms_params: np.ndarray
    z_steps: np.ndarray
    accept_A: np.ndarray
    accept_pi: np.ndarray
    latents: Optional[np.ndarray] = None
    _filled: int = field(default=0, repr=False)

    @classmethod
    def allocate(
        cls, sampler: str, K: int, M: int, config: SamplerConfig, latent_kind: LatentKind, n_latent: int = 0
    ) -> ChainTrace:
        N, I = config.retained, config.iterations
        return cls(
            sampler=sampler,
            K=K,
            M=M,
            config=config,
            latent_kind=latent_kind,
            iteration=np.zeros(N, dtype=np.int64),
            pi=np.zeros((N, K)),
            A=np.zeros((N, K, K)),
            B=np.zeros((N, K, M)),
            loglik=np.full(N, np.nan),
            ms_cache=np.zeros(I),
            ms_latent=np.zeros(I),
            ms_params=np.zeros(I),
            z_steps=np.zeros(I, dtype=np.int64),
            accept_A=np.zeros((I, K), dtype=bool),
            accept_pi=np.zeros(I, dtype=bool),
            latents=np.zeros((N, n_latent), dtype=np.int8) if config.keep_latents else None,
        )

    @classmethod
    def point_mass(cls, params: HmmParams, sampler: str = SamplerName.EM.value) -> ChainTrace:
        """A one-draw trace holding a point estimate"""
        trace = cls.allocate(sampler, params.K, params.M, SamplerConfig(iterations=1, burn_in=0), LatentKind.OBSERVED)
        trace.record_draw(0, *params.arrays())
        return trace

    @classmethod
    def from_draws(
        cls,
        sampler: str,
        config: SamplerConfig,
        latent_kind: LatentKind,
        iteration: np.ndarray,
        pi: np.ndarray,
        A: np.ndarray,
        B: np.ndarray,
        loglik: Optional[np.ndarray] = None,
    ) -> ChainTrace:
        """A trace of previously recorded draws; per-iteration bookkeeping starts zeroed"""
        N, K, M = B.shape
        if config.retained != N:
            raise DomainError(f"{N} draws for a configuration retaining {config.retained}")
        trace = cls.allocate(sampler, K, M, config, latent_kind)
        trace.latents = None
        for k in range(N):
            trace.record_draw(int(iteration[k]), pi[k], A[k], B[k], np.nan if loglik is None else loglik[k])
        return trace

    def __len__(self) -> int:
        return self.pi.shape[0]

    def record_iteration(
        self, it: int, ms: Tuple[float, float, float], steps: int, accept_A: np.ndarray, accept_pi: bool
    ) -> None:
        self.ms_cache[it], self.ms_latent[it], self.ms_params[it] = ms
        self.z_steps[it] = steps
        self.accept_A[it] = accept_A
        self.accept_pi[it] = accept_pi

    def record_draw(
        self,
        it: int,
        pi: np.ndarray,
        A: np.ndarray,
        B: np.ndarray,
        loglik: float = np.nan,
        latents: Optional[np.ndarray] = None,
    ) -> None:
        k = self._filled
        self.iteration[k] = it
        self.pi[k], self.A[k], self.B[k] = pi, A, B
        self.loglik[k] = loglik
        if self.latents is not None and latents is not None:
            self.latents[k] = latents
        self._filled += 1

    @property
    def ms_forward(self) -> np.ndarray:
        """Latent-phase time including the cache rebuilds it depends on"""
        return self.ms_cache + self.ms_latent

    @property
    def total_seconds(self) -> float:
        return float((self.ms_cache + self.ms_latent + self.ms_params).sum()) / 1000.0

    @property
    def time_per_1000_iters(self) -> float:
        """Seconds per 1000 iterations"""
        return 1000.0 * self.total_seconds / self.config.iterations

    @property
    def acceptance_A(self) -> np.ndarray:
        return self.accept_A.mean(axis=0)

    @property
    def acceptance_pi(self) -> float:
        return float(self.accept_pi.mean())

    def params(self, index: int) -> HmmParams:
        return HmmParams.from_arrays(self.pi[index], self.A[index], self.B[index])

    def posterior_mean(self) -> HmmParams:
        if len(self) == 0:
            raise DomainError("empty trace has no posterior mean")
        return HmmParams.from_arrays(self.pi.mean(axis=0), self.A.mean(axis=0), self.B.mean(axis=0))

    def free_coordinates(self) -> Tuple[List[str], np.ndarray]:
        """Names and (N, D) values of the free coordinates: K-1 of pi, K(K-1) of A, K(M-1) of B"""
        K, M = self.K, self.M
        names = [f"pi_{i}" for i in range(K - 1)]
        names += [f"A_{i}{j}" for i in range(K) for j in range(K - 1)]
        names += [f"B_{i}{j}" for i in range(K) for j in range(M - 1)]
        N = len(self)
        values = np.hstack(
            [self.pi[:, : K - 1], self.A[:, :, : K - 1].reshape(N, -1), self.B[:, :, : M - 1].reshape(N, -1)]
        )
        return names, values


class GibbsSampler(ABC, Loggable):
    """One chain over a dataset. Subclasses provide the three phases of an iteration."""

    name: ClassVar[SamplerName]
    latent_kind: ClassVar[LatentKind]

    def __init__(self, dataset: Dataset, priors: Priors, config: SamplerConfig, init: Optional[HmmParams] = None) -> None:
        if (priors.K, priors.M) != (dataset.K, dataset.M):
            raise DomainError(f"priors are for (K={priors.K}, M={priors.M}), data for (K={dataset.K}, M={dataset.M})")
        if init is None:
            init = priors.sample(RngStream(config.seed, Stream.INIT).generator)
            self.log_debug("initial parameters drawn from the prior")
        elif (init.K, init.M) != (dataset.K, dataset.M):
            raise DomainError(f"initial parameters are for (K={init.K}, M={init.M})")
        self.dataset = dataset
        self.priors = priors
        self.config = config
        self.generator = RngStream(config.seed, Stream.CHAIN).generator
        self.pi, self.A, self.B = (np.array(a) for a in init.arrays())
        self.workers = resolve_workers(config.workers)
        self._pool: Optional[ThreadPoolExecutor] = None
        self._observed_layout: Optional[SequenceLayout] = None

    @property
    @abstractmethod
    def layout(self) -> SequenceLayout: ...

    def cache_phase(self) -> None:
        """Bring any derived state up to date with the current parameters"""

    @abstractmethod
    def latent_phase(self, uniforms: np.ndarray) -> int:
        """Redraw the latents; return the number of forward recursion steps run"""

    @abstractmethod
    def parameter_phase(self) -> Tuple[np.ndarray, bool]:
        """Redraw (B, A, pi); return acceptance flags for the rows of A and for pi"""

    @abstractmethod
    def current_latents(self) -> np.ndarray:
        """The latents flattened in dataset order"""

    @property
    def observed_layout(self) -> SequenceLayout:
        if self._observed_layout is None:
            self._observed_layout = SequenceLayout.observed(self.dataset)
        return self._observed_layout

    def map_chunks(self, work: Callable[[int, int], int]) -> int:
        """Run work(start, stop) over contiguous row ranges of the layout; return the sum of its results"""
        ranges = contiguous_ranges(self.layout.n_rows, self.workers)
        if self._pool is None or len(ranges) < 2:
            return sum(work(start, stop) for start, stop in ranges)
        return sum(future.result() for future in [self._pool.submit(work, start, stop) for start, stop in ranges])

    @contextmanager
    def _workers(self) -> Iterator[None]:
        if self.workers > 1:
            self._pool = ThreadPoolExecutor(max_workers=self.workers, thread_name_prefix="phmm")
        try:
            yield
        finally:
            if self._pool is not None:
                self._pool.shutdown()
                self._pool = None

    def run(self) -> ChainTrace:
        config = self.config
        layout = self.layout
        n_latent = layout.total_steps
        trace = ChainTrace.allocate(self.name.value, self.dataset.K, self.dataset.M, config, self.latent_kind, n_latent)
        self.log_info(
            "%d iterations (burn-in %d, thin %d) over %d sequences, %d workers",
            config.iterations,
            config.burn_in,
            config.thin,
            self.dataset.n,
            self.workers,
        )
        timer = PhaseTimer()
        started = perf_counter()
        with self._workers():
            for it in range(config.iterations):
                uniforms = self.generator.random((layout.n_rows, layout.width))
                with timer.phase("cache"):
                    self.cache_phase()
                with timer.phase("latent"):
                    steps = self.latent_phase(uniforms)
                with timer.phase("params"):
                    accept_A, accept_pi = self.parameter_phase()
                trace.record_iteration(
                    it, (timer.take("cache"), timer.take("latent"), timer.take("params")), steps, accept_A, accept_pi
                )
                if config.keeps(it):
                    loglik = np.nan
                    if config.record_loglik:
                        loglik = marginal_loglik_layout(self.observed_layout, self.pi, self.A, self.B)
                    latents = self.current_latents() if config.keep_latents else None
                    trace.record_draw(it, self.pi, self.A, self.B, loglik, latents)
                if config.log_interval and (it + 1) % config.log_interval == 0:
                    elapsed = perf_counter() - started
                    self.log_info("iteration %d/%d (%.1f it/s)", it + 1, config.iterations, (it + 1) / elapsed)
        self.log_info(
            "done in %.2fs, %.3fs per 1000 iterations, A acceptance %s, pi acceptance %.3f",
            perf_counter() - started,
            trace.time_per_1000_iters,
            np.round(trace.acceptance_A, 3).tolist(),
            trace.acceptance_pi,
        )
        return trace
