"""Cached powers of a row-stochastic transition matrix.

Marginalising the latent states between two observations t_k < t_{k+1} leaves the
transition factor (A^{t_{k+1} - t_k})[z_k, z_{k+1}]. The gap lengths present in a dataset
are fixed by its missing mask, so they are declared once and the powers are recomputed
whenever A changes.
"""

from __future__ import annotations

from typing import AbstractSet, Dict, Iterable, Union

import numpy as np

from phmm.core.model import Simplex, StochasticMatrix
from phmm.errors import CacheMissError, DomainError

MatrixLike = Union[StochasticMatrix, np.ndarray]


def power_stack(A: np.ndarray, max_power: int) -> np.ndarray:
    """Stack of A^0 .. A^max_power by ascending incremental multiplication"""
    K = A.shape[0]
    stack = np.empty((max_power + 1, K, K))
    stack[0] = np.eye(K)
    if max_power >= 1:
        stack[1] = A
    for k in range(2, max_power + 1):
        np.matmul(stack[k - 1], A, out=stack[k])
    return stack


class PowerCache:
    """Maps each declared exponent k >= 1 to A^k for one transition matrix A"""

    __slots__ = ("base", "declared", "stack")

    def __init__(self, base: np.ndarray, declared: AbstractSet[int], stack: np.ndarray) -> None:
        self.base = base
        self.declared = frozenset(declared)
        self.stack = stack
        self.stack.flags.writeable = False

    def __repr__(self) -> str:
        return f"{type(self).__name__}(K={self.K}, max_power={self.max_power}, declared={len(self.declared)})"

    @property
    def K(self) -> int:
        return self.base.shape[0]

    @property
    def max_power(self) -> int:
        return self.stack.shape[0] - 1

    @property
    def table(self) -> Dict[int, np.ndarray]:
        return {k: self.stack[k] for k in sorted(self.declared)}

    def power(self, k: int) -> np.ndarray:
        if k == 0:
            return self.stack[0]
        if k not in self.declared:
            raise CacheMissError(k, sorted(self.declared))
        return self.stack[k]

    def rebuilt(self, A: MatrixLike) -> PowerCache:
        """A cache for a new transition matrix over the same declared exponents"""
        return build_cache(A, self.declared)


def build_cache(A: MatrixLike, needed_gaps: Iterable[int]) -> PowerCache:
    """Compute A^k for every k in needed_gaps (and all smaller powers on the way)"""
    values = A.values if isinstance(A, StochasticMatrix) else np.asarray(A, dtype=np.float64)
    if values.ndim != 2 or values.shape[0] != values.shape[1]:
        raise DomainError(f"transition matrix must be square, got shape {values.shape}")
    declared = {int(k) for k in needed_gaps}
    if not declared:
        raise DomainError("at least one gap length must be declared")
    if min(declared) < 1:
        raise DomainError(f"gap lengths must be positive, got {min(declared)}")
    base = np.array(values)
    base.flags.writeable = False
    return PowerCache(base, declared, power_stack(base, max(declared)))


def gap_transition(cache: PowerCache, k: int, i: int, j: int) -> float:
    """P(z_{t+k} = j | z_t = i) with the k - 1 intermediate states marginalised"""
    return float(cache.power(k)[i, j])


def initial_gap_vector(pi: Union[Simplex, np.ndarray], cache: PowerCache, k: int) -> Simplex:
    """pi^T A^k, the law of the first observed latent state when k positions precede it"""
    if k < 0:
        raise DomainError(f"offset must be non-negative, got {k}")
    weights = pi.weights if isinstance(pi, Simplex) else np.asarray(pi, dtype=np.float64)
    return Simplex.normalise(weights @ cache.power(k))
