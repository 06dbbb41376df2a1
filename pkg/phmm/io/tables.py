"""CSV tables with a '#'-prefixed metadata header, and deterministic JSON"""

from __future__ import annotations

import json
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Mapping, Tuple

import numpy as np
import pandas as pd

from phmm.errors import DomainError

COMMENT = "#"


def _plain(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not np.isfinite(value):
        return None
    if isinstance(value, Enum):
        return value.value
    return value


def dumps(data: Any) -> str:
    """JSON with sorted keys; NaN and infinities become null"""
    return json.dumps(_plain(data), sort_keys=True, indent=1) + "\n"


def write_json(path: Path, data: Any) -> None:
    Path(path).write_text(dumps(data))


def read_json(path: Path) -> Any:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as err:
        raise DomainError(f"{path}: invalid JSON ({err})") from None


def header_lines(meta: Mapping[str, Any]) -> List[str]:
    lines = []
    for key, value in meta.items():
        text = value if isinstance(value, str) else json.dumps(_plain(value), sort_keys=True)
        lines.append(f"{COMMENT} {key}: {text}\n")
    return lines


def write_csv(path: Path, frame: pd.DataFrame, meta: Mapping[str, Any]) -> None:
    with open(path, "w", newline="") as stream:
        stream.writelines(header_lines(meta))
        frame.to_csv(stream, index=False, lineterminator="\n")


def read_header(path: Path) -> Dict[str, str]:
    """The 'key: value' metadata lines at the top of a CSV file"""
    meta: Dict[str, str] = {}
    with open(path) as stream:
        for line in stream:
            if not line.startswith(COMMENT):
                break
            key, sep, value = line[1:].partition(":")
            if sep:
                meta[key.strip()] = value.strip()
    return meta


def read_csv(path: Path, **kwargs) -> Tuple[pd.DataFrame, Dict[str, str]]:
    return pd.read_csv(path, comment=COMMENT, **kwargs), read_header(path)
