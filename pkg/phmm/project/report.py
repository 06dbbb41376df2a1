from __future__ import annotations

from argparse import Namespace

import pandas as pd

import phmm.log
from phmm.diagnostics import Reporter, posterior_summary
from phmm.io import read_dataset, read_trace, read_truth, write_csv, write_json

from .console import print_frame, print_mapping
from .project import ExperimentBase


class ReportTrace(ExperimentBase):
    """Efficiency, accuracy and posterior summary of a written trace"""

    def __init__(self, args: Namespace, /) -> None:
        super().__init__(args)
        self.trace = read_trace(args.trace)
        self.dataset = read_dataset(args.data, self.trace.K, self.trace.M) if args.data else None
        self.truth = read_truth(args.truth) if args.truth else None
        if self.truth is not None and self.dataset is None and self.trace.latents is not None:
            self.log_warning("--truth without --data: latent accuracy not computed")

    def run(self) -> None:
        report = Reporter(self.trace, self.dataset, self.seed).report(self.truth)
        summary = posterior_summary(self.trace)
        print_mapping(report.to_dict(), title=f"{self.trace.sampler} report")
        print_frame(summary, title="posterior mean and std")
        if self.out_dir is None:
            return
        with self.outputs() as out:
            write_json(out.path("report.json"), {**self.meta, "report": report.to_dict()})
            write_csv(out.path("report.csv"), pd.DataFrame([report.to_row()]), self.meta)
            write_csv(out.path("summary.csv"), summary, self.meta)


def report_trace(args: Namespace) -> None:
    phmm.log.info("reporting on %s", args.trace)
    ReportTrace(args).run()
