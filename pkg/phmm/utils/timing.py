from __future__ import annotations

from contextlib import contextmanager
from time import perf_counter
from typing import Dict, Iterator


class PhaseTimer:
    """Accumulates wall-clock milliseconds per named phase"""

    def __init__(self) -> None:
        self.elapsed: Dict[str, float] = {}

    @contextmanager
    def phase(self, name: str) -> Iterator[None]:
        start = perf_counter()
        try:
            yield
        finally:
            self.elapsed[name] = self.elapsed.get(name, 0.0) + 1000.0 * (perf_counter() - start)

    def take(self, name: str) -> float:
        return self.elapsed.pop(name, 0.0)
