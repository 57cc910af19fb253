"""Per-experiment evaluation: turns trajectories into the scalar outcomes
consumed by the factor regression, plus the curves needed for plotting."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..runner import ExperimentResult
from . import gam
from .series import ZeroVarianceError, acf, aua, comparison_series, score_differences


@dataclass(frozen=True)
class EvalRecord:
    zone_length: int
    gain_flag: bool
    aua_al: float
    aua_rs_mean: float
    acf1_scores: float | None
    acf1_deltas: float | None
    dispersion: float
    smoothing_parameter: float
    edf: float
    a_values: np.ndarray
    budget_fractions: np.ndarray
    grid: np.ndarray
    fit_curve: np.ndarray
    lower_band: np.ndarray


def evaluate_experiment(result: ExperimentResult, band_level: float = gam.BAND_LEVEL) -> EvalRecord:
    """Comparison series, GAM fit, zone length, and contrast metrics."""
    al_deltas = score_differences(result.al_trajectory)
    rs_deltas = np.stack([score_differences(t) for t in result.rs_trajectories])
    series = comparison_series(al_deltas, rs_deltas)

    n_steps = al_deltas.shape[0]
    fractions = np.arange(1, n_steps + 1) / n_steps
    fit = gam.fit_gam(series.a, fractions)
    zone = gam.compute_zone(fit, level=band_level)

    def _acf1(x: np.ndarray) -> float | None:
        try:
            return float(acf(x, 1)[0])
        except ZeroVarianceError:
            return None

    return EvalRecord(
        zone_length=zone.zone_length,
        gain_flag=zone.gain_flag,
        aua_al=aua(result.al_trajectory),
        aua_rs_mean=float(np.mean([aua(t) for t in result.rs_trajectories])),
        acf1_scores=_acf1(result.al_trajectory.scores),
        acf1_deltas=_acf1(al_deltas),
        dispersion=fit.dispersion,
        smoothing_parameter=fit.smoothing_parameter,
        edf=fit.edf,
        a_values=series.a,
        budget_fractions=fractions,
        grid=zone.grid,
        fit_curve=zone.fit_curve,
        lower_band=zone.lower_band,
    )
