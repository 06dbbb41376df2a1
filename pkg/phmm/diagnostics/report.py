"""Efficiency and accuracy summary of a fitted chain"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from phmm.core.data import Dataset
from phmm.core.linalg import power_stack
from phmm.core.model import HmmParams
from phmm.core.rng import RngStream
from phmm.definitions import MIN_ESS_LENGTH, LatentKind, Stream
from phmm.diagnostics.alignment import align, inverse, mse
from phmm.diagnostics.ess import ess_columns
from phmm.errors import DomainError
from phmm.log import Loggable
from phmm.prediction.bridge import complete_paths
from phmm.samplers.base import ChainTrace
from phmm.samplers.em import viterbi
from phmm.samplers.layout import SequenceLayout
from phmm.simulation.generate import GroundTruth


@dataclass(frozen=True)
class SamplerReport:
    sampler: str
    median_ess_per_iter: float
    median_ess_per_sec: float
    time_per_1000_iters: float
    init_mse: Optional[float] = None
    trans_mse: Optional[float] = None
    emis_mse: Optional[float] = None
    latent_accuracy: Optional[float] = None
    cv_prediction_accuracy: Optional[float] = None
    acceptance_A: Optional[float] = None
    acceptance_pi: Optional[float] = None
    z_steps_per_iter: Optional[float] = None
    permutation: Optional[Tuple[int, ...]] = None

    def __post_init__(self) -> None:
        for name in ("median_ess_per_iter", "median_ess_per_sec"):
            value = getattr(self, name)
            if not np.isnan(value) and value < 0:
                raise DomainError(f"{name} must be non-negative, got {value}")
        for name in ("latent_accuracy", "cv_prediction_accuracy"):
            value = getattr(self, name)
            if value is not None and not 0.0 <= value <= 1.0:
                raise DomainError(f"{name} must lie in [0, 1], got {value}")

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        if self.permutation is not None:
            data["permutation"] = list(self.permutation)
        return data

    def to_row(self) -> Dict[str, Any]:
        """A flat mapping for one CSV row; the permutation is written as a space-separated string"""
        data = self.to_dict()
        if self.permutation is not None:
            data["permutation"] = " ".join(map(str, self.permutation))
        return data

    def with_cv(self, accuracy: float) -> SamplerReport:
        return SamplerReport(**{**asdict(self), "cv_prediction_accuracy": accuracy})


class Reporter(Loggable):
    """Builds a SamplerReport from a trace, optionally scored against ground truth"""

    def __init__(self, trace: ChainTrace, dataset: Optional[Dataset] = None, seed: int = 0) -> None:
        self.trace = trace
        self.dataset = dataset
        self.seed = seed

    def efficiency(self, wall_seconds: Optional[float] = None) -> Tuple[float, float]:
        """(median ESS per retained draw, median ESS per second); NaN for chains shorter than the ESS minimum"""
        trace = self.trace
        N = len(trace)
        if N < MIN_ESS_LENGTH:
            self.log_warning("%d retained draws, ESS needs at least %d", N, MIN_ESS_LENGTH)
            return float("nan"), float("nan")
        _, values = trace.free_coordinates()
        median = float(np.median(ess_columns(values)))
        seconds = trace.total_seconds if wall_seconds is None else wall_seconds
        per_sec = median / seconds if seconds > 0 else float("nan")
        return median / N, per_sec

    def majority_vote(self) -> List[np.ndarray]:
        """Most frequent state at every position over the retained draws; ties go to the lowest state.

        Collapsed traces hold z at observed positions only; the missing positions of each
        draw are filled by bridges under that draw's parameters.
        """
        trace, dataset = self.trace, self.dataset
        if trace.latents is None or dataset is None:
            raise DomainError("majority vote needs a trace with latents and its dataset")
        K = trace.K
        if trace.latent_kind == LatentKind.FULL:
            votes = np.zeros((trace.latents.shape[1], K), dtype=np.int64)
            for k in range(K):
                votes[:, k] = (trace.latents == k).sum(axis=0)
            winners = votes.argmax(axis=1)
            return np.split(winners, np.cumsum(dataset.lengths)[:-1])
        layout = SequenceLayout.observed(dataset)
        width = int(layout.lengths.max())
        votes = np.zeros((layout.n_rows, width, K), dtype=np.int64)
        generator = RngStream(self.seed, Stream.REPORT).generator
        for i in range(len(trace)):
            states = layout.unflatten(trace.latents[i].astype(np.int64))
            stack = power_stack(trace.A[i], layout.max_power)
            paths = complete_paths(layout, states, trace.pi[i], trace.A[i], stack, generator)
            valid = paths >= 0
            cells = np.flatnonzero(valid) * K + paths[valid]
            votes += np.bincount(cells, minlength=votes.size).reshape(votes.shape)
        winners = votes.argmax(axis=2)
        out: List[np.ndarray] = [np.zeros(0, np.int64)] * layout.n_rows
        for row, index in enumerate(layout.order):
            out[index] = winners[row, : layout.lengths[row]]
        return out

    def report(self, truth: Optional[GroundTruth] = None, wall_seconds: Optional[float] = None) -> SamplerReport:
        trace = self.trace
        if len(trace) == 0:
            raise DomainError("cannot report on an empty trace")
        ess_iter, ess_sec = self.efficiency(wall_seconds)
        fields: Dict[str, Any] = dict(
            sampler=trace.sampler,
            median_ess_per_iter=ess_iter,
            median_ess_per_sec=ess_sec,
            time_per_1000_iters=trace.time_per_1000_iters,
            acceptance_A=float(trace.acceptance_A.mean()),
            acceptance_pi=trace.acceptance_pi,
            z_steps_per_iter=float(trace.z_steps.mean()),
        )
        if truth is not None:
            aligned, perm = align(trace.posterior_mean(), truth.params)
            self.log_info("label alignment permutation: %s", perm)
            fields.update(score_params(aligned, truth.params), permutation=perm)
            if trace.latents is not None and self.dataset is not None and truth.latents:
                relabel = inverse(perm)
                voted = [relabel[states] for states in self.majority_vote()]
                fields["latent_accuracy"] = latent_accuracy(voted, truth.latents)
            else:
                self.log_info("no latents kept in the trace, latent accuracy not computed")
        return SamplerReport(**fields)


def score_params(estimate: HmmParams, truth: HmmParams) -> Dict[str, float]:
    pi, A, B = estimate.arrays()
    true_pi, true_A, true_B = truth.arrays()
    return dict(init_mse=mse(pi, true_pi), trans_mse=mse(A, true_A), emis_mse=mse(B, true_B))


def latent_accuracy(predicted: Sequence[np.ndarray], truth: Sequence[np.ndarray]) -> float:
    """Fraction of positions where the predicted state equals the true state"""
    if len(predicted) != len(truth):
        raise DomainError(f"{len(predicted)} predicted paths for {len(truth)} true paths")
    hits = sum(int(np.sum(np.asarray(p) == np.asarray(t))) for p, t in zip(predicted, truth))
    total = sum(len(t) for t in truth)
    return hits / total if total else float("nan")


def report(
    trace: ChainTrace,
    truth: Optional[GroundTruth] = None,
    dataset: Optional[Dataset] = None,
    wall_seconds: Optional[float] = None,
    seed: int = 0,
) -> SamplerReport:
    return Reporter(trace, dataset, seed).report(truth, wall_seconds)


def em_report(
    params: HmmParams, dataset: Dataset, seconds: float, iterations: int, truth: Optional[GroundTruth] = None
) -> SamplerReport:
    """Report for an EM point estimate; latent accuracy from Viterbi paths"""
    fields: Dict[str, Any] = dict(
        sampler="em",
        median_ess_per_iter=float("nan"),
        median_ess_per_sec=float("nan"),
        time_per_1000_iters=1000.0 * seconds / max(iterations, 1),
    )
    if truth is not None:
        aligned, perm = align(params, truth.params)
        fields.update(score_params(aligned, truth.params), permutation=perm)
        if truth.latents:
            relabel = inverse(perm)
            fields["latent_accuracy"] = latent_accuracy([relabel[z] for z in viterbi(dataset, params)], truth.latents)
    return SamplerReport(**fields)


def posterior_summary(trace: ChainTrace) -> pd.DataFrame:
    """Posterior mean and standard deviation of every entry of pi, A and B"""
    if len(trace) == 0:
        raise DomainError("cannot summarise an empty trace")
    K, M = trace.K, trace.M
    names = [f"pi_{i}" for i in range(K)]
    names += [f"A_{i}{j}" for i in range(K) for j in range(K)]
    names += [f"B_{i}{j}" for i in range(K) for j in range(M)]
    N = len(trace)
    values = np.hstack([trace.pi, trace.A.reshape(N, -1), trace.B.reshape(N, -1)])
    std = values.std(axis=0, ddof=1) if N > 1 else np.zeros(values.shape[1])
    return pd.DataFrame({"parameter": names, "mean": values.mean(axis=0), "std": std})
