from __future__ import annotations

from argparse import Namespace
from dataclasses import replace
from time import perf_counter
from typing import Optional

import pandas as pd

import phmm.log
from phmm.core.data import missing_rate
from phmm.core.rng import RngStream
from phmm.definitions import SamplerName, Stream
from phmm.diagnostics import Reporter, SamplerReport, cross_validated_accuracy, em_report
from phmm.io import OutputSet, read_dataset, read_priors, read_truth, write_csv, write_json
from phmm.io import write_trace_csv, write_trace_json
from phmm.samplers import GIBBS_SAMPLERS, EmConfig, SamplerConfig, SamplerSpec, fit_em
from phmm.simulation import GroundTruth

from .console import print_mapping
from .project import ExperimentBase


class FitDataset(ExperimentBase):
    """Fit one dataset with one inference method"""

    def __init__(self, args: Namespace, /) -> None:
        super().__init__(args)
        self.dataset = read_dataset(args.data, args.K, args.M)
        self.truth: Optional[GroundTruth] = read_truth(args.truth) if args.truth else None
        self.priors = read_priors(args.priors, self.dataset.K, self.dataset.M)
        self.config = SamplerConfig(
            iterations=args.iters,
            burn_in=args.burn_in,
            mh_concentration=args.mh_concentration,
            thin=args.thin,
            seed=self.seed,
            keep_latents=args.keep_latents or self.truth is not None,
            workers=args.workers,
        )
        self.em = EmConfig(max_iters=args.em_max_iters, tol=args.em_tol, restarts=args.restarts, seed=self.seed)
        self.log_info(
            "dataset: n=%d, K=%d, M=%d, missing rate %.4f",
            self.dataset.n,
            self.dataset.K,
            self.dataset.M,
            missing_rate(self.dataset),
        )

    @property
    def sampler(self) -> SamplerName:
        return self.args.sampler

    def spec(self) -> SamplerSpec:
        return SamplerSpec(self.sampler, self.priors, replace(self.config, keep_latents=False), self.em)

    def run(self) -> None:
        with self.outputs() as out:
            if self.sampler == SamplerName.EM:
                report = self._fit_em(out)
            else:
                report = self._fit_gibbs(out)
            if self.args.cv_mask is not None:
                report = report.with_cv(self._cross_validate())
            write_json(out.path("report.json"), {**self.meta, "report": report.to_dict()})
            write_csv(out.path("report.csv"), pd.DataFrame([report.to_row()]), self.meta)
        print_mapping(report.to_dict(), title=f"{self.sampler.value} fit")

    def _fit_gibbs(self, out: OutputSet) -> SamplerReport:
        trace = GIBBS_SAMPLERS[self.sampler](self.dataset, self.priors, self.config)
        write_trace_csv(out.path("trace.csv"), trace, self.meta)
        write_trace_json(out.path("trace.json"), trace, self.meta)
        return Reporter(trace, self.dataset, self.seed).report(self.truth)

    def _fit_em(self, out: OutputSet) -> SamplerReport:
        started = perf_counter()
        result = fit_em(self.dataset, self.priors, self.em)
        seconds = perf_counter() - started
        self.log_info("EM finished after %d iterations, loglik %.6f", len(result.loglik), result.loglik[-1])
        write_json(out.path("params.json"), {**self.meta, **result.params.to_dict()})
        trace = pd.DataFrame({"iteration": range(len(result.loglik)), "loglik": result.loglik})
        write_csv(out.path("loglik.csv"), trace, self.meta)
        return em_report(result.params, self.dataset, seconds, len(result.loglik), self.truth)

    def _cross_validate(self) -> float:
        args = self.args
        self.log_info("cross-validating with %d fold(s), mask fraction %.3f", args.cv_folds, args.cv_mask)
        rng = RngStream(self.seed, Stream.CROSS_VALIDATION)
        return cross_validated_accuracy(self.dataset, self.spec(), args.cv_mask, args.cv_folds, rng, args.cv_draws)


def fit_dataset(args: Namespace) -> None:
    phmm.log.info("fitting dataset with %s", args.sampler.value)
    FitDataset(args).run()
