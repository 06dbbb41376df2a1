import numpy as np
import pytest

from phmm.core import Dataset, HmmParams, ObservedSequence, Priors
from phmm.samplers import SamplerConfig


@pytest.fixture
def generator():
    return np.random.default_rng(20240611)


@pytest.fixture
def default_params():
    return HmmParams.default()


@pytest.fixture
def flat_priors():
    return Priors.flat(3, 3)


@pytest.fixture
def small_dataset():
    """Ragged sequences with leading, inner and trailing gaps and one fully missing sequence"""
    rows = [
        [0, None, None, 1, 2, None],
        [None, 2, 2, 0],
        [1, 1, 0, 2, 2, 1, 0],
        [None, None, None],
        [2, None, 0, None, None, 1, 1, None],
    ]
    return Dataset(tuple(ObservedSequence.from_values(r) for r in rows), 3, 3)


@pytest.fixture
def short_config():
    return SamplerConfig(iterations=20, burn_in=10, seed=3, keep_latents=True, log_interval=0)
