from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, Optional

from phmm.core.data import Dataset
from phmm.core.model import HmmParams, Priors
from phmm.definitions import SamplerName
from phmm.errors import DomainError

from .base import ChainTrace, GibbsSampler, SamplerConfig
from .baselines import (
    FullLatentDraw,
    PartiallyCollapsedGibbsSampler,
    VanillaGibbsSampler,
    classic_forward,
    partial_marginal_loglik,
    run_partially_collapsed_gibbs,
    run_vanilla_gibbs,
)
from .collapsed import (
    CollapsedGibbsSampler,
    run_collapsed_gibbs,
    update_emission,
    update_initial_mh,
    update_transition_mh,
)
from .em import EmConfig, EmResult, fit_em, run_em, viterbi
from .forward import ForwardTable, LatentDraw, backward_sample, collapsed_forward, marginal_loglik
from .layout import SequenceLayout

GIBBS_SAMPLERS: Dict[SamplerName, Callable[..., ChainTrace]] = {
    SamplerName.COLLAPSED: run_collapsed_gibbs,
    SamplerName.PARTIAL: run_partially_collapsed_gibbs,
    SamplerName.VANILLA: run_vanilla_gibbs,
}


@dataclass(frozen=True)
class SamplerSpec:
    """Everything needed to fit a dataset with one named method"""

    name: SamplerName
    priors: Priors
    config: SamplerConfig = field(default_factory=SamplerConfig)
    em: EmConfig = field(default_factory=EmConfig)

    def fit(self, dataset: Dataset, init: Optional[HmmParams] = None) -> ChainTrace:
        """A ChainTrace for Gibbs samplers; EM yields a one-draw trace of its estimate"""
        if self.name == SamplerName.EM:
            return ChainTrace.point_mass(fit_em(dataset, self.priors, self.em, init).params)
        if self.name not in GIBBS_SAMPLERS:
            raise DomainError(f"unknown sampler {self.name!r}")
        return GIBBS_SAMPLERS[self.name](dataset, self.priors, self.config, init)
