from __future__ import annotations

from argparse import Namespace
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import product
from time import perf_counter
from typing import Any, Dict, List

import numpy as np
import pandas as pd

import phmm.log
from phmm.core.data import missing_rate
from phmm.core.model import HmmParams, Priors
from phmm.definitions import MissingMechanism, SamplerName
from phmm.diagnostics import Reporter, em_report
from phmm.io import read_params, read_priors, write_csv
from phmm.samplers import GIBBS_SAMPLERS, EmConfig, SamplerConfig, fit_em
from phmm.simulation import simulate
from phmm.utils import resolve_workers

from .console import print_frame
from .project import ExperimentBase

# columns printed to the console; benchmark.csv holds every column
SUMMARY_COLUMNS = [
    "sampler",
    "p",
    "seed",
    "time_per_1000_iters",
    "median_ess_per_iter",
    "median_ess_per_sec",
    "trans_mse",
    "latent_accuracy",
]


@dataclass(frozen=True)
class BenchmarkCell:
    """One (sampler, missing probability, seed) fit of a simulated dataset"""

    sampler: SamplerName
    p: float
    seed: int
    params: HmmParams
    priors: Priors
    n: int
    T: int
    missing: MissingMechanism
    config: SamplerConfig
    em: EmConfig


def run_cell(cell: BenchmarkCell) -> Dict[str, Any]:
    """Fit one cell; cells with the same seed see the same complete data and nested masks"""
    dataset, truth = simulate(cell.params, cell.n, cell.T, cell.missing, cell.p, cell.seed)
    row: Dict[str, Any] = {"sampler": cell.sampler.value, "p": cell.p, "seed": cell.seed}
    row["missing_rate"] = missing_rate(dataset)
    if cell.sampler == SamplerName.EM:
        started = perf_counter()
        result = fit_em(dataset, cell.priors, cell.em)
        report = em_report(result.params, dataset, perf_counter() - started, result.loglik.size, truth)
        row.update(report.to_row(), ms_forward_per_iter=np.nan, ms_params_per_iter=np.nan)
    else:
        config = SamplerConfig(**{**cell.config.to_dict(), "seed": cell.seed})
        trace = GIBBS_SAMPLERS[cell.sampler](dataset, cell.priors, config)
        report = Reporter(trace, dataset, cell.seed).report(truth)
        row.update(
            report.to_row(),
            ms_forward_per_iter=float(trace.ms_forward.mean()),
            ms_params_per_iter=float(trace.ms_params.mean()),
        )
    row.pop("cv_prediction_accuracy", None)
    phmm.log.info("benchmark cell %s p=%.2f seed=%d done", cell.sampler.value, cell.p, cell.seed)
    return row


class RunBenchmark(ExperimentBase):
    """Sweep the missing probability for several samplers over replicate seeds"""

    def __init__(self, args: Namespace, /) -> None:
        super().__init__(args)
        self.params = read_params(args.params)
        self.priors = read_priors(args.priors, self.params.K, self.params.M)
        self.config = SamplerConfig(
            iterations=args.iters,
            burn_in=args.burn_in,
            mh_concentration=args.mh_concentration,
            thin=args.thin,
            seed=self.seed,
            keep_latents=args.keep_latents,
            workers=args.workers,
        )
        self.em = EmConfig(max_iters=args.em_max_iters, tol=args.em_tol, restarts=args.restarts, seed=self.seed)

    def cells(self) -> List[BenchmarkCell]:
        args = self.args
        seeds = range(self.seed, self.seed + args.replicates)
        return [
            BenchmarkCell(sampler, p, seed, self.params, self.priors, args.n, args.T, args.missing, self.config, self.em)
            for seed, p, sampler in product(seeds, args.grid, args.samplers)
        ]

    def run(self) -> None:
        cells = self.cells()
        jobs = min(resolve_workers(self.args.jobs), len(cells))
        self.log_info("running %d benchmark cells with %d job(s)", len(cells), jobs)
        if jobs > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                rows = list(pool.map(run_cell, cells))
        else:
            rows = [run_cell(cell) for cell in cells]
        table = pd.DataFrame(rows)
        with self.outputs() as out:
            write_csv(out.path("benchmark.csv"), table, self.meta)
        print_frame(table[SUMMARY_COLUMNS], title=f"benchmark ({self.args.missing.value} missing)")


def run_benchmark(args: Namespace) -> None:
    phmm.log.info("running benchmark")
    RunBenchmark(args).run()
