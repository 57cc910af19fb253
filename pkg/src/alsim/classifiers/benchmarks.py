"""Ceiling benchmarks: classifier optimum error rate and mis-match metric."""

from __future__ import annotations

import numpy as np

from ..rng import subseed
from ..taskgen import Task, sample_dataset


def optimum_error_rate(spec, task: Task, reps: int = 5, n_large: int = 5000, seed: int = 0) -> float:
    """Mean test error over independent large train/test pairs.

    Approximates the classifier's best achievable error on the task; used as
    the ceiling benchmark factor.
    """
    from . import fit, score

    if reps < 5:
        raise ValueError("reps must be at least 5")
    if n_large < 5000:
        raise ValueError("n_large must be at least 5000")
    errors = np.empty(reps)
    for r in range(reps):
        train = sample_dataset(task, n_large, subseed(seed, "opt-train", r))
        test = sample_dataset(task, n_large, subseed(seed, "opt-test", r))
        model = fit(spec, train, subseed(seed, "opt-fit", r))
        errors[r] = 1.0 - score(model, test)
    return float(errors.mean())


def classifier_mismatch(opt_rate: float, ber: float) -> float:
    """Excess of the classifier's optimum error over the task's Bayes error.

    Small negative differences from Monte Carlo noise clamp to zero.
    """
    for name, value in (("opt_rate", opt_rate), ("ber", ber)):
        if not 0.0 <= value <= 0.5:
            raise ValueError(f"{name} must lie in [0, 0.5], got {value}")
    return max(opt_rate - ber, 0.0)
