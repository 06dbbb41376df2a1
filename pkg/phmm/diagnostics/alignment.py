"""Label alignment of HMM parameters by exhaustive permutation search"""

from __future__ import annotations

from itertools import permutations
from typing import Tuple

import numpy as np

from phmm.core.model import HmmParams
from phmm.definitions import MAX_ALIGNMENT_STATES
from phmm.errors import DomainError


def best_permutation(estimate_B: np.ndarray, truth_B: np.ndarray) -> Tuple[int, ...]:
    """The perm minimising the MSE between estimate_B[perm] and truth_B; the identity wins ties"""
    K = truth_B.shape[0]
    if estimate_B.shape != truth_B.shape:
        raise DomainError(f"cannot align emission matrices of shapes {estimate_B.shape} and {truth_B.shape}")
    if K > MAX_ALIGNMENT_STATES:
        raise DomainError(f"label alignment searches K! permutations and is limited to K <= {MAX_ALIGNMENT_STATES}")
    best, best_mse = tuple(range(K)), np.inf
    for perm in permutations(range(K)):
        mse = float(np.mean((estimate_B[list(perm)] - truth_B) ** 2))
        if mse < best_mse:
            best, best_mse = perm, mse
    return best


def inverse(perm: Tuple[int, ...]) -> np.ndarray:
    """Maps a sampler label to its aligned label"""
    return np.argsort(np.asarray(perm))


def align(estimate: HmmParams, truth: HmmParams) -> Tuple[HmmParams, Tuple[int, ...]]:
    perm = best_permutation(estimate.B.values, truth.B.values)
    return estimate.permuted(perm), perm


def mse(estimate: np.ndarray, truth: np.ndarray) -> float:
    return float(np.mean((np.asarray(estimate) - np.asarray(truth)) ** 2))
