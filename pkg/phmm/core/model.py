"""Parameter types of a discrete hidden Markov model and their Dirichlet priors"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional, Sequence, Union

import numpy as np
from scipy.special import gammaln, xlogy

from phmm.definitions import DEFAULT_A, DEFAULT_B, DEFAULT_PI, SIMPLEX_RENORMALISE_TOL, SIMPLEX_ROUNDING_ULPS
from phmm.errors import DomainError, ParamsError

ArrayLike = Union[Sequence[float], Sequence[Sequence[float]], np.ndarray]


def _frozen(values: ArrayLike, ndim: int) -> np.ndarray:
    array = np.array(values, dtype=np.float64)
    if array.ndim != ndim:
        raise DomainError(f"expected a {ndim}-dimensional array, got shape {array.shape}")
    array.flags.writeable = False
    return array


@dataclass(frozen=True)
class Simplex:
    """A probability vector. Inputs whose sum is within 1e-9 of 1 are renormalised unless
    already at rounding level, larger deviations and negative entries are rejected."""

    weights: np.ndarray

    def __post_init__(self) -> None:
        weights = np.array(self.weights, dtype=np.float64)
        if weights.ndim != 1 or weights.size == 0:
            raise DomainError(f"simplex weights must be a non-empty vector, got shape {weights.shape}")
        if not np.all(np.isfinite(weights)):
            raise DomainError("simplex weights must be finite")
        if np.any(weights < 0):
            raise DomainError(f"simplex weights must be non-negative: {weights}")
        total = weights.sum()
        if abs(total - 1.0) > SIMPLEX_RENORMALISE_TOL:
            raise DomainError(f"simplex weights sum to {total!r}, not 1")
        # sums within rounding of 1 are kept as given
        if abs(total - 1.0) > SIMPLEX_ROUNDING_ULPS * weights.size * np.finfo(np.float64).eps:
            weights = weights / total
        object.__setattr__(self, "weights", _frozen(weights, 1))

    @classmethod
    def normalise(cls, vector: ArrayLike) -> Simplex:
        """Build a simplex by explicitly normalising a non-negative vector with positive sum"""
        vector = np.asarray(vector, dtype=np.float64)
        total = vector.sum()
        if not total > 0:
            raise DomainError("cannot normalise a vector with non-positive sum")
        return cls(vector / total)

    def __len__(self) -> int:
        return self.weights.size


@dataclass(frozen=True)
class StochasticMatrix:
    """A row-stochastic matrix, each row a Simplex"""

    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=np.float64)
        if values.ndim != 2 or values.shape[0] < 1 or values.shape[1] < 1:
            raise DomainError(f"stochastic matrix must be R x C with R, C >= 1, got {values.shape}")
        rows = [Simplex(row).weights for row in values]
        object.__setattr__(self, "values", _frozen(np.vstack(rows), 2))

    @property
    def rows(self) -> List[Simplex]:
        return [Simplex(row) for row in self.values]

    @property
    def shape(self):
        return self.values.shape


@dataclass(frozen=True)
class Violation:
    block: str
    row: Optional[int]
    kind: str
    magnitude: float

    def __str__(self) -> str:
        where = self.block if self.row is None else f"{self.block}[{self.row}]"
        return f"{where}: {self.kind} (magnitude {self.magnitude:.3g})"


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok

    def __str__(self) -> str:
        if self.ok:
            return "ok"
        return "; ".join(map(str, self.violations))


def _row_violations(block: str, rows: np.ndarray) -> List[Violation]:
    found = []
    for index, row in enumerate(np.atleast_2d(rows)):
        row_name = None if rows.ndim == 1 else index
        if not np.all(np.isfinite(row)):
            found.append(Violation(block, row_name, "non-finite entry", float("nan")))
            continue
        if np.any(row < 0):
            found.append(Violation(block, row_name, "negative entry", float(-row.min())))
        deficit = abs(row.sum() - 1.0)
        if deficit > SIMPLEX_RENORMALISE_TOL:
            found.append(Violation(block, row_name, "row sum differs from 1", float(deficit)))
    return found


def validate_params(pi: Union[ArrayLike, HmmParams], A: Optional[ArrayLike] = None, B: Optional[ArrayLike] = None) -> ValidationReport:
    """Report every simplex and dimension violation of (pi, A, B). Never raises."""

    if isinstance(pi, HmmParams):
        pi, A, B = pi.pi.weights, pi.A.values, pi.B.values
    pi = np.asarray(pi, dtype=np.float64)
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)

    found: List[Violation] = []
    if pi.ndim != 1:
        found.append(Violation("pi", None, f"expected a vector, got shape {pi.shape}", float(pi.ndim)))
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        found.append(Violation("A", None, f"expected a square matrix, got shape {A.shape}", float(A.ndim)))
    if B.ndim != 2:
        found.append(Violation("B", None, f"expected a matrix, got shape {B.shape}", float(B.ndim)))
    if found:
        return ValidationReport(tuple(found))

    K = pi.size
    if A.shape[0] != K:
        found.append(Violation("A", None, f"{A.shape[0]} rows but pi has length {K}", abs(A.shape[0] - K)))
    if B.shape[0] != K:
        found.append(Violation("B", None, f"{B.shape[0]} rows but pi has length {K}", abs(B.shape[0] - K)))
    found.extend(_row_violations("pi", pi))
    found.extend(_row_violations("A", A))
    found.extend(_row_violations("B", B))
    return ValidationReport(tuple(found))


@dataclass(frozen=True)
class HmmParams:
    """theta = (pi, A, B) with B[i, j] = P(y = j | z = i)"""

    pi: Simplex
    A: StochasticMatrix
    B: StochasticMatrix

    def __post_init__(self) -> None:
        K = len(self.pi)
        if self.A.shape != (K, K) or self.B.shape[0] != K:
            raise ParamsError(validate_params(self.pi.weights, self.A.values, self.B.values))

    @classmethod
    def from_arrays(cls, pi: ArrayLike, A: ArrayLike, B: ArrayLike) -> HmmParams:
        report = validate_params(pi, A, B)
        if not report.ok:
            raise ParamsError(report)
        return cls(Simplex(pi), StochasticMatrix(A), StochasticMatrix(B))

    @classmethod
    def default(cls) -> HmmParams:
        return cls.from_arrays(DEFAULT_PI, DEFAULT_A, DEFAULT_B)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> HmmParams:
        try:
            return cls.from_arrays(data["pi"], data["A"], data["B"])
        except KeyError as err:
            raise DomainError(f"parameter mapping lacks key {err}") from None

    def to_dict(self) -> Dict[str, Any]:
        return {"pi": self.pi.weights.tolist(), "A": self.A.values.tolist(), "B": self.B.values.tolist()}

    @property
    def K(self) -> int:
        return len(self.pi)

    @property
    def M(self) -> int:
        return self.B.shape[1]

    def arrays(self):
        return self.pi.weights, self.A.values, self.B.values

    def permuted(self, perm: Sequence[int]) -> HmmParams:
        """Relabel states so that new state k is old state perm[k]"""
        perm = np.asarray(perm)
        pi, A, B = self.arrays()
        return HmmParams.from_arrays(pi[perm], A[np.ix_(perm, perm)], B[perm])


@dataclass(frozen=True)
class Priors:
    """Dirichlet concentrations for pi, the rows of A and the rows of B"""

    eta_pi: np.ndarray
    eta_A: np.ndarray
    eta_B: np.ndarray

    def __post_init__(self) -> None:
        eta_pi = _frozen(self.eta_pi, 1)
        eta_A = _frozen(self.eta_A, 2)
        eta_B = _frozen(self.eta_B, 2)
        K = eta_pi.size
        if eta_A.shape != (K, K) or eta_B.shape[0] != K:
            raise DomainError(
                f"inconsistent prior shapes: eta_pi {eta_pi.shape}, eta_A {eta_A.shape}, eta_B {eta_B.shape}"
            )
        for name, eta in (("eta_pi", eta_pi), ("eta_A", eta_A), ("eta_B", eta_B)):
            if not np.all(np.isfinite(eta)) or np.any(eta <= 0):
                raise DomainError(f"{name} entries must be strictly positive")
        object.__setattr__(self, "eta_pi", eta_pi)
        object.__setattr__(self, "eta_A", eta_A)
        object.__setattr__(self, "eta_B", eta_B)

    @classmethod
    def flat(cls, K: int, M: int, concentration: float = 1.0) -> Priors:
        return cls(
            np.full(K, concentration),
            np.full((K, K), concentration),
            np.full((K, M), concentration),
        )

    @classmethod
    def from_dict(cls, data: Mapping[str, Any], K: int, M: int) -> Priors:
        """Either {"concentration": c} or explicit eta_pi/eta_A/eta_B arrays"""
        if "concentration" in data:
            return cls.flat(K, M, float(data["concentration"]))
        try:
            return cls(data["eta_pi"], data["eta_A"], data["eta_B"])
        except KeyError as err:
            raise DomainError(f"prior mapping lacks key {err}") from None

    def to_dict(self) -> Dict[str, Any]:
        return {"eta_pi": self.eta_pi.tolist(), "eta_A": self.eta_A.tolist(), "eta_B": self.eta_B.tolist()}

    @property
    def K(self) -> int:
        return self.eta_pi.size

    @property
    def M(self) -> int:
        return self.eta_B.shape[1]

    def sample(self, generator: np.random.Generator) -> HmmParams:
        """Draw theta from the prior"""
        pi = generator.dirichlet(self.eta_pi)
        A = np.vstack([generator.dirichlet(row) for row in self.eta_A])
        B = np.vstack([generator.dirichlet(row) for row in self.eta_B])
        return HmmParams.from_arrays(pi, A, B)


def dirichlet_logpdf(x: np.ndarray, alpha: np.ndarray) -> np.ndarray:
    """Log density of Dir(alpha) at x, vectorised over leading axes"""
    x = np.asarray(x, dtype=np.float64)
    alpha = np.asarray(alpha, dtype=np.float64)
    norm = gammaln(alpha.sum(axis=-1)) - gammaln(alpha).sum(axis=-1)
    return norm + xlogy(alpha - 1.0, x).sum(axis=-1)
