from __future__ import annotations

import itertools as it
from collections.abc import Iterable
from typing import TypeVar

T = TypeVar("T")


def batched(iterable: Iterable[T], batch_size: int) -> Iterable[tuple[T, ...]]:
    # credit: https://docs.python.org/3/library/itertools.html#itertools-recipes
    if batch_size < 1:
        raise ValueError("batch_size must be at least one")
    items = iter(iterable)
    while True:
        batch = tuple(it.islice(items, batch_size))
        if batch:
            yield batch
        else:
            break


def contiguous_ranges(total: int, parts: int) -> list[tuple[int, int]]:
    """Split range(total) into at most `parts` contiguous (start, stop) ranges of near-equal size"""
    if total == 0:
        return []
    size = -(-total // max(1, min(parts, total)))
    return [(batch[0], batch[-1] + 1) for batch in batched(range(total), size)]
