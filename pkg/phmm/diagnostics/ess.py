"""Effective sample size from the FFT autocorrelation with Geyer's initial positive sequence"""

from __future__ import annotations

import numpy as np
from numpy.fft import irfft, rfft

import phmm.log as log
from phmm.definitions import MIN_ESS_LENGTH
from phmm.errors import DomainError


def autocorrelation(series: np.ndarray) -> np.ndarray:
    """Normalised autocorrelation at lags 0 .. N-1 (biased estimator)"""
    x = np.asarray(series, dtype=np.float64)
    n = x.size
    f = irfft(np.abs(rfft(x - x.mean(), n=2 * n)) ** 2, n=2 * n)[:n]
    return f / f[0]


def ess(chain: np.ndarray) -> float:
    """N / (1 + 2 sum_k rho_k), summing rho in pairs while each pair sum stays positive; in [0, N]"""
    x = np.asarray(chain, dtype=np.float64).ravel()
    n = x.size
    if n < MIN_ESS_LENGTH:
        raise DomainError(f"ESS needs at least {MIN_ESS_LENGTH} draws, got {n}")
    if not np.all(np.isfinite(x)):
        raise DomainError("ESS of a series with non-finite values")
    if np.ptp(x) == 0:
        log.debug("constant series of length %d: ESS taken as N", n)
        return float(n)
    rho = autocorrelation(x)
    pairs = rho[: 2 * (n // 2)].reshape(-1, 2).sum(axis=1)
    negative = np.flatnonzero(pairs <= 0)
    kept = pairs[: negative[0]] if negative.size else pairs
    tau = -1.0 + 2.0 * kept.sum()
    if tau <= 0:
        return float(n)
    return float(np.clip(n / tau, 0.0, n))


def ess_columns(values: np.ndarray) -> np.ndarray:
    """ESS of each column of an (N, D) array"""
    return np.array([ess(values[:, d]) for d in range(values.shape[1])])
