"""Held-out imputation accuracy: mask observed entries, refit, impute them back"""

from __future__ import annotations

from typing import List, Tuple

import numpy as np

import phmm.log as log
from phmm.core.data import Dataset
from phmm.core.rng import RngStream
from phmm.errors import DomainError
from phmm.prediction.predictive import impute_dataset, posterior_mode
from phmm.samplers import SamplerSpec


def mask_observed(dataset: Dataset, fraction: float, generator: np.random.Generator) -> Tuple[Dataset, List[np.ndarray]]:
    """Hide round(fraction * observed) entries chosen uniformly without replacement.

    Returns the masked dataset and, per sequence, the positions that were hidden.
    """
    if not 0.0 < fraction < 1.0:
        raise DomainError(f"mask fraction must lie in (0, 1), got {fraction}")
    total = dataset.total_observed
    count = int(round(fraction * total))
    if count == 0 or count >= total:
        raise DomainError(f"masking {count} of {total} observed entries leaves nothing to fit or to score")
    owners = np.concatenate([np.full(seq.n_observed, i) for i, seq in enumerate(dataset)])
    positions = np.concatenate([seq.observed_index for seq in dataset])
    chosen = np.sort(generator.choice(total, size=count, replace=False))
    hidden = [positions[chosen[owners[chosen] == i]] for i in range(dataset.n)]
    masked = dataset.replace(seq.masked(h) if h.size else seq for seq, h in zip(dataset, hidden))
    return masked, hidden


def cross_validated_accuracy(
    dataset: Dataset, spec: SamplerSpec, mask_fraction: float, folds: int, rng: RngStream, draws: int = 100
) -> float:
    """Fraction of hidden entries recovered by posterior-mode imputation, averaged over folds"""
    if folds < 1:
        raise DomainError(f"folds must be positive, got {folds}")
    scores = []
    for fold in range(folds):
        masked, hidden = mask_observed(dataset, mask_fraction, rng.substream(fold).generator)
        trace = spec.fit(masked)
        histograms = impute_dataset(trace, masked, draws, rng.substream(fold, 1))
        hits = total = 0
        for seq, masked_seq, positions, histogram in zip(dataset, masked, hidden, histograms):
            if positions.size == 0:
                continue
            rows = np.searchsorted(np.flatnonzero(masked_seq.missing_mask), positions)
            hits += int(np.sum(posterior_mode(histogram[rows]) == seq.entries[positions]))
            total += positions.size
        scores.append(hits / total)
        log.info("fold %d/%d: %d of %d hidden entries recovered", fold + 1, folds, hits, total)
    return float(np.mean(scores))
