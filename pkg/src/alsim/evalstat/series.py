"""Score differences, the three-valued comparison function, averaged
comparison series, autocorrelation diagnostics, and the area-under-curve
contrast metric."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..runner import Trajectory


class ZeroVarianceError(ValueError):
    """Autocorrelation is undefined for a (numerically) constant series."""


@dataclass(frozen=True)
class ComparisonSeries:
    """Per-step comparison outcomes c[i][j] in {0, 0.5, 1} against each RS
    instance j, and their per-step means a[i]."""

    c: np.ndarray  # (n_steps, n_rs)
    a: np.ndarray  # (n_steps,)

    @property
    def n_rs(self) -> int:
        return int(self.c.shape[1])


def score_differences(trajectory: Trajectory | np.ndarray) -> np.ndarray:
    """Per-step score increments dS_i = S_i - S_{i-1}."""
    scores = trajectory.scores if isinstance(trajectory, Trajectory) else np.asarray(trajectory)
    if scores.shape[0] < 2:
        raise ValueError("trajectory must have at least 2 scores")
    return np.diff(scores)


def compare(x: float, y: float) -> float:
    """Win/tie/loss outcome: 1 if x > y, 0.5 if x == y, 0 if x < y.

    Exact float equality is intentional: scores are multiples of 1/n_test, so
    ties are frequent and carry information.
    """
    if np.isnan(x) or np.isnan(y):
        raise ValueError("compare requires finite inputs")
    if x > y:
        return 1.0
    if x < y:
        return 0.0
    return 0.5


def comparison_series(al_deltas: np.ndarray, rs_deltas_per_instance) -> ComparisonSeries:
    """Compare the strategy's score differences against every RS instance."""
    al = np.asarray(al_deltas, dtype=float)
    rs = np.asarray(rs_deltas_per_instance, dtype=float)
    if rs.ndim != 2 or rs.shape[1] != al.shape[0]:
        raise ValueError(
            f"instances must share the step count: al has {al.shape[0]}, rs has {rs.shape}"
        )
    if np.isnan(al).any() or np.isnan(rs).any():
        raise ValueError("compare requires finite inputs")
    c = np.where(al[None, :] > rs, 1.0, np.where(al[None, :] < rs, 0.0, 0.5)).T
    return ComparisonSeries(c=c, a=c.mean(axis=1))


def acf(series: np.ndarray, max_lag: int) -> np.ndarray:
    """Sample autocorrelation at lags 1..max_lag.

    Uses the standard biased estimator r_k = c_k / c_0 with mean-centered
    products. A series whose variance is zero to machine precision (e.g. the
    differences of a linear ramp) has no defined autocorrelation.
    """
    x = np.asarray(series, dtype=float)
    n = x.shape[0]
    if max_lag < 1:
        raise ValueError("max_lag must be >= 1")
    if n <= max_lag + 1:
        raise ValueError(f"series of length {n} is too short for max_lag {max_lag}")
    centered = x - x.mean()
    c0 = float(np.dot(centered, centered))
    if c0 == 0.0 or np.sqrt(c0 / n) <= 1e-9 * max(1.0, abs(float(x.mean()))):
        raise ZeroVarianceError("series is constant; autocorrelation undefined")
    out = np.empty(max_lag)
    for lag in range(1, max_lag + 1):
        out[lag - 1] = float(np.dot(centered[:-lag], centered[lag:])) / c0
    return out


def aua(trajectory: Trajectory | np.ndarray) -> float:
    """Trapezoidal mean of scores over the budget-fraction axis [0, 1]."""
    scores = trajectory.scores if isinstance(trajectory, Trajectory) else np.asarray(trajectory)
    if scores.shape[0] < 2:
        raise ValueError("trajectory must have at least 2 scores")
    t = np.linspace(0.0, 1.0, scores.shape[0])
    return float(np.trapezoid(scores, t))
