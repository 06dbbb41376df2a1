from .data import Dataset, ObservedSequence, missing_rate
from .linalg import PowerCache, build_cache, gap_transition, initial_gap_vector, power_stack
from .model import (
    HmmParams,
    Priors,
    Simplex,
    StochasticMatrix,
    ValidationReport,
    Violation,
    dirichlet_logpdf,
    validate_params,
)
from .rng import RngStream, categorical
