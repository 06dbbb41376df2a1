"""Exceptions raised by phmm"""

from __future__ import annotations

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from phmm.core.model import ValidationReport


class PhmmError(Exception):
    """Base class for all phmm errors"""


class DomainError(PhmmError, ValueError):
    """An argument lies outside the domain of an operation"""


class CacheMissError(PhmmError, KeyError):
    """A matrix power was requested that the cache was not built for"""

    def __init__(self, exponent: int, available: object) -> None:
        super().__init__(exponent)
        self.exponent = exponent
        self.available = available

    def __str__(self) -> str:
        return f"power {self.exponent} not cached (declared: {self.available})"


class ImpossibleBridgeError(DomainError):
    """A Markov bridge was requested between endpoints with zero joint probability"""


class ParamsError(DomainError):
    """HMM parameters failed validation"""

    def __init__(self, report: ValidationReport) -> None:
        super().__init__(str(report))
        self.report = report
