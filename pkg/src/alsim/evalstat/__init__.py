"""Assessment methodology: score-difference comparisons against the random
baseline, a penalized logistic smoother with a pessimistic lower band, the
zone-length outcome, and ACF / area-under-curve diagnostics."""

from .evaluate import EvalRecord, evaluate_experiment
from .gam import (
    BAND_LEVEL,
    GRID_SIZE,
    GamError,
    GamFit,
    ZoneResult,
    band_grid,
    compute_zone,
    fit_gam,
    fit_gam_at_lambda,
    gam_lower_band,
    zone_length,
)
from .series import (
    ComparisonSeries,
    ZeroVarianceError,
    acf,
    aua,
    compare,
    comparison_series,
    score_differences,
)

__all__ = [
    "BAND_LEVEL",
    "GRID_SIZE",
    "ComparisonSeries",
    "EvalRecord",
    "GamError",
    "GamFit",
    "ZeroVarianceError",
    "ZoneResult",
    "acf",
    "aua",
    "band_grid",
    "compare",
    "comparison_series",
    "compute_zone",
    "evaluate_experiment",
    "fit_gam",
    "fit_gam_at_lambda",
    "gam_lower_band",
    "score_differences",
    "zone_length",
]
