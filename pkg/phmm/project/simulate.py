from __future__ import annotations

from argparse import Namespace

import phmm.log
from phmm.core.data import missing_rate
from phmm.errors import DomainError
from phmm.io import read_params, write_dataset, write_truth
from phmm.simulation import simulate

from .project import ExperimentBase


class SimulateDataset(ExperimentBase):
    """Draw a dataset from known parameters and write it with its ground truth"""

    def run(self) -> None:
        args = self.args
        params = read_params(args.params)
        for name, size in (("K", params.K), ("M", params.M)):
            given = getattr(args, name)
            if given is not None and given != size:
                raise DomainError(f"--{name} {given} does not match the parameters ({name} = {size})")

        dataset, truth = simulate(params, args.n, args.T, args.missing, args.p, self.seed)
        self.log_info(
            "simulated %d sequences of length %d, missing rate %.4f (target %.4f, %s)",
            dataset.n,
            args.T,
            missing_rate(dataset),
            args.p,
            args.missing.value,
        )

        with self.outputs() as out:
            write_dataset(out.path(f"data.{args.format}"), dataset, self.meta)
            write_truth(out.path("truth.json"), truth, self.meta)


def simulate_dataset(args: Namespace) -> None:
    phmm.log.info("simulating dataset")
    SimulateDataset(args).run()
