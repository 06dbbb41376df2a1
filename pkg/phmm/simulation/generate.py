"""Synthetic sequences from a known HMM"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Dict, List, Mapping, Optional, Tuple

import numpy as np

from phmm.core.data import Dataset, ObservedSequence
from phmm.core.model import HmmParams
from phmm.core.rng import RngStream, categorical
from phmm.definitions import MissingMechanism, Stream
from phmm.errors import DomainError
from phmm.simulation.missing import apply_blockwise_missing, apply_random_missing


@dataclass(frozen=True)
class GroundTruth:
    """The generating parameters, latent paths and complete observations of a synthetic dataset"""

    params: HmmParams
    latents: Tuple[np.ndarray, ...]
    complete: Optional[Dataset] = None

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {**self.params.to_dict(), "latents": [z.tolist() for z in self.latents]}
        if self.complete is not None:
            data["complete"] = [seq.to_values() for seq in self.complete]
        return data

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> GroundTruth:
        params = HmmParams.from_dict(data)
        latents = tuple(np.asarray(z, dtype=np.int64) for z in data.get("latents", ()))
        complete = None
        if data.get("complete") is not None:
            complete = Dataset(tuple(ObservedSequence.from_values(v) for v in data["complete"]), params.K, params.M)
        return cls(params, latents, complete)


def generate(params: HmmParams, n: int, T: int, rng: RngStream) -> Tuple[Dataset, List[np.ndarray]]:
    """n complete sequences of length T and their latent paths"""
    if n < 1 or T < 1:
        raise DomainError(f"n and T must be positive, got n={n}, T={T}")
    pi, A, B = params.arrays()
    generator = rng.generator
    z = np.empty((n, T), dtype=np.int64)
    z[:, 0] = categorical(np.tile(pi, (n, 1)), generator.random(n))
    for t in range(1, T):
        z[:, t] = categorical(A[z[:, t - 1]], generator.random(n))
    y = categorical(B[z.ravel()], generator.random(n * T)).reshape(n, T)
    dataset = Dataset(tuple(ObservedSequence(row) for row in y), params.K, params.M)
    return dataset, list(z)


def simulate(
    params: HmmParams, n: int, T: int, mechanism: MissingMechanism, p: float, seed: int
) -> Tuple[Dataset, GroundTruth]:
    """Complete data from the VALUES stream, masked with the MASK stream.

    Sweeping p with a fixed seed reuses the same complete data and latents.
    """
    complete, latents = generate(params, n, T, RngStream(seed, Stream.VALUES))
    mask = RngStream(seed, Stream.MASK)
    if MissingMechanism(mechanism) == MissingMechanism.BLOCK:
        observed = apply_blockwise_missing(complete, p, mask)
    else:
        observed = apply_random_missing(complete, p, mask)
    return observed, GroundTruth(params, tuple(latents), complete)
