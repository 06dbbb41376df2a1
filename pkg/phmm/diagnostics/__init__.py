from .alignment import align, best_permutation, inverse, mse
from .crossval import cross_validated_accuracy, mask_observed
from .ess import autocorrelation, ess, ess_columns
from .report import (
    Reporter,
    SamplerReport,
    em_report,
    latent_accuracy,
    posterior_summary,
    report,
    score_params,
)
