"""Statistics computed from simulated time series."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .simulation import TimeSeries


class DomainError(ValueError):
    """Statistic undefined for the given input."""


def extremal_runs(returns: Sequence[float]) -> tuple[float, float]:
    """Most negative sum over runs of negative returns and largest sum over runs of positive ones.

    A zero return ends the current run. Returns (max_drawdown, max_drawup),
    with max_drawdown <= 0 <= max_drawup.
    """
    r = np.asarray(returns, dtype=float)
    if r.size == 0:
        raise DomainError("extremal_runs needs a nonempty sequence")
    sign = np.sign(r)
    # run boundaries: wherever the sign changes
    starts = np.flatnonzero(np.r_[True, sign[1:] != sign[:-1]])
    sums = np.add.reduceat(r, starts)
    run_sign = sign[starts]
    down = sums[run_sign < 0]
    up = sums[run_sign > 0]
    max_drawdown = float(down.min()) if down.size else 0.0
    max_drawup = float(up.max()) if up.size else 0.0
    return max_drawdown, max_drawup


def autocorrelation(series: Sequence[float], max_lag: int) -> np.ndarray:
    """Sample autocorrelation at lags 0..max_lag, biased (1/n) normalization."""
    x = np.asarray(series, dtype=float)
    if max_lag < 0:
        raise DomainError("max_lag must be nonnegative")
    if x.size <= 4 * max_lag:
        raise DomainError(f"series of length {x.size} too short for max_lag={max_lag}")
    x = x - x.mean()
    denom = float(np.dot(x, x))
    if denom == 0.0:
        raise DomainError("autocorrelation of a constant series is undefined")
    n = x.size
    return np.array([np.dot(x[: n - lag], x[lag:]) / denom for lag in range(max_lag + 1)])


def excess_kurtosis(returns: Sequence[float]) -> float:
    x = np.asarray(returns, dtype=float)
    d = x - x.mean()
    m2 = np.mean(d**2)
    if m2 == 0.0:
        raise DomainError("kurtosis undefined for zero variance")
    return float(np.mean(d**4) / m2**2 - 3.0)


def mean_k_trace(ts: TimeSeries) -> np.ndarray:
    return ts.mean_k.copy()


def max_mean_k(ts: TimeSeries) -> float:
    return float(ts.mean_k.max())


def spatial_mean(weights_per_agent: Sequence[Sequence[float]]) -> float:
    """Average of all N*J trust weights (the population imitation propensity)."""
    flat = [w for row in weights_per_agent for w in row]
    return float(np.mean(flat)) if flat else 0.0


@dataclass(frozen=True)
class Histogram:
    """Mass per bin; values outside the edges are counted in ``underflow``/``overflow``.

    mass.sum() + underflow + overflow == 1 for nonempty input.
    """

    edges: np.ndarray
    mass: np.ndarray
    underflow: float = 0.0
    overflow: float = 0.0


def histogram(values: Sequence[float], edges: Sequence[float]) -> Histogram:
    v = np.asarray(values, dtype=float)
    e = np.asarray(edges, dtype=float)
    if e.ndim != 1 or e.size < 2 or np.any(np.diff(e) <= 0):
        raise DomainError("bin edges must be strictly increasing with at least two entries")
    if not np.all(np.isfinite(v)):
        raise DomainError("histogram values must be finite")
    if v.size == 0:
        return Histogram(e, np.zeros(e.size - 1))
    counts, _ = np.histogram(v, bins=e)
    return Histogram(
        edges=e,
        mass=counts / v.size,
        underflow=float(np.count_nonzero(v < e[0]) / v.size),
        overflow=float(np.count_nonzero(v > e[-1]) / v.size),
    )


DEFAULT_RETURN_EDGES = tuple(np.round(np.linspace(-0.1, 0.1, 81), 10).tolist())
DEFAULT_MEAN_K_EDGES = tuple(np.round(np.linspace(-1.0, 5.0, 121), 10).tolist())


@dataclass
class RunStatistics:
    max_mean_k: float
    max_drawdown: float
    max_drawup: float
    kurtosis: float
    return_acf: np.ndarray
    vol_acf: np.ndarray
    return_histogram: Histogram
    mean_k_histogram: Histogram
    n_samples: int = 0

    def summary(self) -> dict:
        return {
            "max_mean_k": self.max_mean_k,
            "max_drawdown": self.max_drawdown,
            "max_drawup": self.max_drawup,
            "kurtosis": self.kurtosis,
            "n_samples": self.n_samples,
        }


def _acf_or_nan(x: np.ndarray, max_lag: int) -> np.ndarray:
    # an inert market has constant returns; report nan rather than failing the run
    try:
        return autocorrelation(x, max_lag)
    except DomainError:
        return np.full(max_lag + 1, np.nan)


def run_statistics(
    ts: TimeSeries,
    acf_max_lag: int = 100,
    return_edges: Sequence[float] = DEFAULT_RETURN_EDGES,
    mean_k_edges: Sequence[float] = DEFAULT_MEAN_K_EDGES,
) -> RunStatistics:
    """All statistics of one run. ``ts`` must already have its burn-in removed."""
    if len(ts) == 0:
        raise DomainError("no records after burn-in")
    r = ts.returns
    dd, du = extremal_runs(r)
    lag = min(acf_max_lag, max((len(r) - 1) // 4, 0))
    try:
        kurt = excess_kurtosis(r)
    except DomainError:
        kurt = float("nan")
    return RunStatistics(
        max_mean_k=max_mean_k(ts),
        max_drawdown=dd,
        max_drawup=du,
        kurtosis=kurt,
        return_acf=_acf_or_nan(r, lag),
        vol_acf=_acf_or_nan(np.abs(r), lag),
        return_histogram=histogram(r, return_edges),
        mean_k_histogram=histogram(ts.mean_k, mean_k_edges),
        n_samples=len(r),
    )
