"""Human-readable tables on stdout"""

from __future__ import annotations

from typing import Any, Mapping, Optional

import numpy as np
import pandas as pd
from prettytable import PrettyTable


def _cell(value: Any, digits: int) -> str:
    if value is None:
        return "-"
    if isinstance(value, (float, np.floating)):
        return "nan" if np.isnan(value) else f"{value:.{digits}g}"
    return str(value)


def frame_table(frame: pd.DataFrame, title: Optional[str] = None, digits: int = 4) -> PrettyTable:
    table = PrettyTable(field_names=[str(c) for c in frame.columns])
    if title:
        table.title = title
    for row in frame.itertuples(index=False):
        table.add_row([_cell(value, digits) for value in row])
    table.align = "r"
    return table


def mapping_table(data: Mapping[str, Any], title: Optional[str] = None, digits: int = 4) -> PrettyTable:
    table = PrettyTable(field_names=["field", "value"])
    if title:
        table.title = title
    for key, value in data.items():
        table.add_row([key, _cell(value, digits)])
    table.align["field"] = "l"
    table.align["value"] = "r"
    return table


def print_frame(frame: pd.DataFrame, title: Optional[str] = None) -> None:
    print(frame_table(frame, title))


def print_mapping(data: Mapping[str, Any], title: Optional[str] = None) -> None:
    print(mapping_table(data, title))
