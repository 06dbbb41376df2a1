from __future__ import annotations

from argparse import Namespace
from typing import Any, Dict, List, Optional

import numpy as np

import phmm.log
from phmm.core.data import Dataset
from phmm.core.rng import RngStream
from phmm.definitions import PredictMode, Stream
from phmm.errors import DomainError
from phmm.io import read_dataset, read_trace, read_truth, write_json
from phmm.prediction import decode_new, forecast, impute_dataset, posterior_mode
from phmm.samplers import LatentDraw

from .console import print_mapping
from .project import ExperimentBase


def imputation_accuracy(dataset: Dataset, complete: Dataset, histograms: List[np.ndarray]) -> float:
    """Fraction of missing entries whose posterior-mode imputation equals the complete data"""
    hits = total = 0
    for seq, full, histogram in zip(dataset, complete, histograms):
        missing = np.flatnonzero(seq.missing_mask)
        if missing.size == 0:
            continue
        if full.T != seq.T:
            raise DomainError(f"complete sequence has length {full.T}, expected {seq.T}")
        hits += int(np.sum(posterior_mode(histogram) == full.entries[missing]))
        total += missing.size
    return hits / total if total else float("nan")


class PredictFromTrace(ExperimentBase):
    """Forecast, decode or impute the sequences of a dataset under a fitted trace"""

    def __init__(self, args: Namespace, /) -> None:
        super().__init__(args)
        self.trace = read_trace(args.trace)
        self.dataset = read_dataset(args.data, self.trace.K, self.trace.M)
        self.rng = RngStream(self.seed, Stream.PREDICT)
        self.log_info("trace: %s sampler, %d draws", self.trace.sampler, len(self.trace))

    @property
    def mode(self) -> PredictMode:
        return self.args.mode

    def forecasts(self) -> Dict[str, Any]:
        W, draws = self.args.W, self.args.draws
        paths = [forecast(self.trace, seq, W, draws, self.rng.substream(i)) for i, seq in enumerate(self.dataset)]
        return {"W": W, "forecasts": [np.vstack(p) for p in paths]}

    def decodings(self) -> Dict[str, Any]:
        full_path = self.args.full_path
        decoded = []
        for i, seq in enumerate(self.dataset):
            drawn = decode_new(self.trace, seq, self.args.draws, self.rng.substream(i), full_path=full_path)
            if full_path:
                decoded.append({"positions": np.arange(seq.T), "states": np.vstack(drawn)})
            else:
                decoded.append(_latent_draws(seq.observed_index, drawn))
        return {"full_path": full_path, "decoded": decoded}

    def imputations(self) -> Dict[str, Any]:
        histograms = impute_dataset(self.trace, self.dataset, self.args.draws, self.rng)
        data: Dict[str, Any] = {
            "imputations": [
                {"positions": np.flatnonzero(seq.missing_mask), "histogram": histogram}
                for seq, histogram in zip(self.dataset, histograms)
            ]
        }
        complete = self._complete_data()
        if complete is not None:
            accuracy = imputation_accuracy(self.dataset, complete, histograms)
            self.log_info("imputation accuracy: %.4f", accuracy)
            data["imputation_accuracy"] = accuracy
        return data

    def _complete_data(self) -> Optional[Dataset]:
        if self.args.truth is None:
            return None
        truth = read_truth(self.args.truth)
        if truth.complete is None:
            self.log_warning("truth file has no complete data, imputation accuracy not computed")
            return None
        if truth.complete.n != self.dataset.n:
            raise DomainError(f"truth has {truth.complete.n} sequences, dataset has {self.dataset.n}")
        return truth.complete

    def run(self) -> None:
        if self.mode == PredictMode.FORECAST:
            result = self.forecasts()
        elif self.mode == PredictMode.DECODE:
            result = self.decodings()
        else:
            result = self.imputations()
        data = {**self.meta, "mode": self.mode, "draws": self.args.draws, **result}
        with self.outputs() as out:
            write_json(out.path(f"{self.mode.value}.json"), data)
        summary = {"mode": self.mode.value, "sequences": self.dataset.n, "draws": self.args.draws}
        if "imputation_accuracy" in result:
            summary["imputation_accuracy"] = result["imputation_accuracy"]
        print_mapping(summary, title="prediction")


def _latent_draws(positions: np.ndarray, drawn: List[LatentDraw]) -> Dict[str, Any]:
    states = np.vstack([d.states for d in drawn]) if drawn else np.zeros((0, positions.size), dtype=np.int64)
    return {"positions": positions, "states": states}


def predict_from_trace(args: Namespace) -> None:
    phmm.log.info("predicting (%s)", args.mode.value)
    PredictFromTrace(args).run()
