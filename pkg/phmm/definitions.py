from __future__ import annotations

from enum import Enum, IntEnum
from typing import Final

MISSING: Final[int] = -1
"""Sentinel for a missing observation. Never a valid symbol index."""

MISSING_TOKEN: Final[str] = "NA"

SIMPLEX_ATOL: Final[float] = 1e-12
SIMPLEX_RENORMALISE_TOL: Final[float] = 1e-9
SIMPLEX_ROUNDING_ULPS: Final[int] = 4
POWER_ROW_ATOL: Final[float] = 1e-10

DEFAULT_MH_CONCENTRATION: Final[float] = 200.0
MH_PROPOSAL_RETRIES: Final[int] = 100
EM_SMOOTHING: Final[float] = 1e-6
EM_TOLERANCE: Final[float] = 1e-6
EM_MAX_ITERS: Final[int] = 500
MAX_ALIGNMENT_STATES: Final[int] = 5
MIN_ESS_LENGTH: Final[int] = 10


class Action(str, Enum):
    """Defines the available actions"""

    SIMULATE = "simulate"
    FIT = "fit"
    BENCHMARK = "benchmark"
    PREDICT = "predict"
    REPORT = "report"


class SamplerName(str, Enum):
    COLLAPSED = "collapsed"
    PARTIAL = "partial"
    VANILLA = "vanilla"
    EM = "em"

    @classmethod
    def gibbs(cls) -> tuple[SamplerName, ...]:
        return (cls.COLLAPSED, cls.PARTIAL, cls.VANILLA)


class MissingMechanism(str, Enum):
    RANDOM = "random"
    BLOCK = "block"


class PredictMode(str, Enum):
    FORECAST = "forecast"
    DECODE = "decode"
    IMPUTE = "impute"


class LatentKind(str, Enum):
    """Which latent positions a trace stores per draw"""

    OBSERVED = "observed"  # z_o only
    FULL = "full"  # z_1..z_T


class Stream(IntEnum):
    """Stream ids of the independent random streams derived from one seed"""

    VALUES = 1
    MASK = 2
    CHAIN = 3
    INIT = 4
    PREDICT = 5
    REPORT = 6
    CROSS_VALIDATION = 7
    PARAMS = 8


DEFAULT_PI: Final = (0.6, 0.3, 0.1)
DEFAULT_A: Final = (
    (0.6, 0.3, 0.1),
    (0.1, 0.6, 0.3),
    (0.3, 0.1, 0.6),
)
DEFAULT_B: Final = (
    (0.8, 0.1, 0.1),
    (0.1, 0.8, 0.1),
    (0.1, 0.1, 0.8),
)
DEFAULT_PARAMS: Final[str] = "default"
DEFAULT_PARAMS_ALIASES: Final = (DEFAULT_PARAMS, "paper-default")
