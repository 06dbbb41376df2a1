"""Dataset, parameter, prior and ground-truth files.

Dataset CSV: one sequence per row under a header t0, t1, ...; `NA` marks a missing
entry and empty trailing cells end a shorter sequence. Leading `# K: <int>` and
`# M: <int>` lines give the alphabet sizes. Dataset JSON: {"K", "M", "sequences"} with
null for missing entries.
"""

from __future__ import annotations

from pathlib import Path
from typing import Any, List, Mapping, Optional

import pandas as pd
import yaml

from phmm.core.data import Dataset, ObservedSequence
from phmm.core.model import HmmParams, Priors
from phmm.definitions import MISSING, MISSING_TOKEN, DEFAULT_PARAMS_ALIASES
from phmm.errors import DomainError
from phmm.io.tables import read_header, read_json, write_csv, write_json
from phmm.simulation.generate import GroundTruth


def _is_json(path: Path) -> bool:
    return Path(path).suffix.lower() == ".json"


def _parse_row(cells: List[str], where: str) -> ObservedSequence:
    while cells and cells[-1] == "":
        cells.pop()
    if not cells:
        raise DomainError(f"{where}: empty sequence")
    values: List[Optional[int]] = []
    for cell in cells:
        if cell == MISSING_TOKEN:
            values.append(None)
        elif cell == "":
            raise DomainError(f"{where}: empty cell inside a sequence")
        else:
            try:
                values.append(int(cell))
            except ValueError:
                raise DomainError(f"{where}: invalid symbol {cell!r}") from None
    return ObservedSequence.from_values(values)


def _sizes(sequences, K: Optional[int], M: Optional[int], path: Path):
    if K is None:
        raise DomainError(f"{path}: number of latent states K not given in the file or on the command line")
    if M is None:
        M = 1 + max((int(seq.entries.max()) for seq in sequences if seq.n_observed), default=0)
    return int(K), int(M)


def read_dataset(path: Path, K: Optional[int] = None, M: Optional[int] = None) -> Dataset:
    """Load a dataset; K and M arguments take precedence over the file's own values"""
    path = Path(path)
    if _is_json(path):
        data = read_json(path)
        sequences = tuple(ObservedSequence.from_values(values) for values in data["sequences"])
        K = K if K is not None else data.get("K")
        M = M if M is not None else data.get("M")
    else:
        meta = read_header(path)
        frame = pd.read_csv(path, comment="#", dtype=str, keep_default_na=False, header=0).fillna("")
        sequences = tuple(
            _parse_row(list(row), f"{path}, row {i}") for i, row in enumerate(frame.itertuples(index=False))
        )
        K = K if K is not None else (int(meta["K"]) if "K" in meta else None)
        M = M if M is not None else (int(meta["M"]) if "M" in meta else None)
    K, M = _sizes(sequences, K, M, path)
    return Dataset(sequences, K, M)


def dataset_frame(dataset: Dataset) -> pd.DataFrame:
    width = int(dataset.lengths.max()) if dataset.n else 0
    rows = []
    for seq in dataset:
        cells = [MISSING_TOKEN if value == MISSING else str(value) for value in seq.entries]
        rows.append(cells + [""] * (width - seq.T))
    return pd.DataFrame(rows, columns=[f"t{t}" for t in range(width)])


def write_dataset(path: Path, dataset: Dataset, meta: Mapping[str, Any]) -> None:
    if _is_json(path):
        write_json(path, {**meta, "K": dataset.K, "M": dataset.M, "sequences": [s.to_values() for s in dataset]})
    else:
        write_csv(path, dataset_frame(dataset), {**meta, "K": str(dataset.K), "M": str(dataset.M)})


def _load_mapping(path: Path) -> Mapping[str, Any]:
    """JSON or YAML mapping"""
    with open(path) as stream:
        data = yaml.safe_load(stream)
    if not isinstance(data, Mapping):
        raise DomainError(f"{path}: expected a mapping")
    return data


def read_params(source: str) -> HmmParams:
    if source in DEFAULT_PARAMS_ALIASES:
        return HmmParams.default()
    return HmmParams.from_dict(_load_mapping(Path(source)))


def read_priors(path: Optional[Path], K: int, M: int) -> Priors:
    """Flat Dir(1) priors unless a file is given"""
    if path is None:
        return Priors.flat(K, M)
    return Priors.from_dict(_load_mapping(Path(path)), K, M)


def write_truth(path: Path, truth: GroundTruth, meta: Mapping[str, Any]) -> None:
    write_json(path, {**meta, **truth.to_dict()})


def read_truth(path: Path) -> GroundTruth:
    return GroundTruth.from_dict(read_json(path))
