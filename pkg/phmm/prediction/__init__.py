from .bridge import bridge_batch, bridge_fill, complete_paths, simulate_forward
from .predictive import (
    decode_new,
    forecast,
    imputation_histogram,
    impute_dataset,
    impute_missing,
    posterior_mode,
)
