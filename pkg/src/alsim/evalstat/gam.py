"""Penalized logistic smoother for averaged comparison values.

The model is a quasi-binomial GAM: logit link, cubic B-spline basis with 20
equally spaced interior knots on [0, 1], second-difference coefficient
penalty, smoothing parameter chosen by GCV, and a dispersion parameter
estimated from Pearson residuals so the confidence band stays honest under
over- or under-dispersion. The coefficient covariance is the penalized
information inverse scaled by that dispersion.

The evaluation grid is fixed at 200 points over the budget range, so zone
lengths are counts out of a maximum of 200.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit, ndtri

from . import bspline

GRID_SIZE = 200
BAND_LEVEL = 0.8
MAX_IRLS_ITER = 100
ETA_TOL = 1e-8
_MU_CLAMP = 1e-10
_RIDGE = 1e-12
LAMBDA_GRID = tuple(float(x) for x in np.logspace(-5.0, 7.0, 25))


class GamError(RuntimeError):
    """IRLS diverged; carries the smoothing parameter and iteration count."""


@dataclass(frozen=True)
class GamFit:
    knots: np.ndarray
    basis_coefficients: np.ndarray
    smoothing_parameter: float
    dispersion: float
    posterior_covariance: np.ndarray
    edf: float
    gcv: float
    converged: bool
    n_obs: int
    link: str = "logit"
    constant_value: float | None = None  # degenerate flat fit, if any

    def _design(self, t: np.ndarray) -> np.ndarray:
        return bspline.design_matrix(np.asarray(t, dtype=float), self.knots)

    def linear_predictor(self, t: np.ndarray) -> np.ndarray:
        if self.constant_value is not None:
            value = np.clip(self.constant_value, _MU_CLAMP, 1.0 - _MU_CLAMP)
            return np.full(np.asarray(t).shape[0], float(np.log(value / (1.0 - value))))
        return self._design(t) @ self.basis_coefficients

    def mean(self, t: np.ndarray) -> np.ndarray:
        if self.constant_value is not None:
            return np.full(np.asarray(t).shape[0], self.constant_value)
        return expit(self.linear_predictor(t))

    def se_linear_predictor(self, t: np.ndarray) -> np.ndarray:
        if self.constant_value is not None:
            return np.zeros(np.asarray(t).shape[0])
        b = self._design(t)
        var = np.einsum("ij,jk,ik->i", b, self.posterior_covariance, b)
        return np.sqrt(np.maximum(var, 0.0))


@dataclass(frozen=True)
class ZoneResult:
    zone_length: int
    grid: np.ndarray
    fit_curve: np.ndarray
    lower_band: np.ndarray

    @property
    def gain_flag(self) -> bool:
        return self.zone_length > 0


def _irls(
    basis: np.ndarray,
    y: np.ndarray,
    penalty: np.ndarray,
    lam: float,
) -> tuple[np.ndarray, np.ndarray, bool, int]:
    """Penalized IRLS at fixed smoothing; returns (beta, weights, converged, iters)."""
    n, q = basis.shape
    # start from the working response of the clipped empirical logits
    y0 = np.clip(y, 0.02, 0.98)
    eta = np.log(y0 / (1.0 - y0))
    beta = np.linalg.solve(
        basis.T @ basis + lam * penalty + _RIDGE * np.eye(q), basis.T @ eta
    )
    converged = False
    iters = 0
    for iters in range(1, MAX_IRLS_ITER + 1):
        eta = basis @ beta
        mu = np.clip(expit(eta), _MU_CLAMP, 1.0 - _MU_CLAMP)
        w = mu * (1.0 - mu)
        z = eta + (y - mu) / w
        lhs = basis.T @ (w[:, None] * basis) + lam * penalty + _RIDGE * np.eye(q)
        rhs = basis.T @ (w * z)
        beta_new = np.linalg.solve(lhs, rhs)
        if not np.all(np.isfinite(beta_new)):
            raise GamError(f"IRLS diverged at lambda={lam:g}, iteration {iters}")
        delta_eta = float(np.max(np.abs(basis @ beta_new - eta)))
        beta = beta_new
        if delta_eta < ETA_TOL:
            converged = True
            break
    mu = np.clip(expit(basis @ beta), _MU_CLAMP, 1.0 - _MU_CLAMP)
    return beta, mu * (1.0 - mu), converged, iters


def _fit_statistics(basis, y, penalty, lam, beta, w):
    """Pearson-scale GCV, effective degrees of freedom, and dispersion."""
    n, q = basis.shape
    eta = basis @ beta
    mu = np.clip(expit(eta), _MU_CLAMP, 1.0 - _MU_CLAMP)
    z = eta + (y - mu) / w
    info = basis.T @ (w[:, None] * basis) + lam * penalty + _RIDGE * np.eye(q)
    info_inv = np.linalg.inv(info)
    edf = float(np.trace(info_inv @ (basis.T @ (w[:, None] * basis))))
    resid2 = w * (z - eta) ** 2  # = (y - mu)^2 / V(mu), the Pearson residuals
    pearson = float(resid2.sum())
    denom = max(n - edf, 1e-8)
    gcv = n * pearson / denom**2
    dispersion = max(pearson / denom, 1e-12)
    return info_inv, edf, gcv, dispersion


def fit_gam_at_lambda(a: np.ndarray, budget_fractions: np.ndarray, lam: float) -> GamFit:
    """Single penalized fit at a fixed smoothing parameter."""
    a = np.asarray(a, dtype=float)
    t = np.asarray(budget_fractions, dtype=float)
    knots = bspline.knot_vector()
    basis = bspline.design_matrix(t, knots)
    q = basis.shape[1]
    penalty_root = bspline.second_difference_matrix(q)
    penalty = penalty_root.T @ penalty_root
    beta, w, converged, _ = _irls(basis, a, penalty, lam)
    info_inv, edf, gcv, dispersion = _fit_statistics(basis, a, penalty, lam, beta, w)
    return GamFit(
        knots=knots,
        basis_coefficients=beta,
        smoothing_parameter=lam,
        dispersion=dispersion,
        posterior_covariance=dispersion * info_inv,
        edf=edf,
        gcv=gcv,
        converged=converged,
        n_obs=a.shape[0],
    )


def fit_gam(a: np.ndarray, budget_fractions: np.ndarray) -> GamFit:
    """Penalized logistic smoother with GCV-chosen smoothing parameter.

    A constant input series short-circuits to a flat degenerate fit at that
    constant (zero covariance), which keeps the all-ties and saturated cases
    well defined under the logit link.
    """
    a = np.asarray(a, dtype=float)
    t = np.asarray(budget_fractions, dtype=float)
    if a.shape != t.shape:
        raise ValueError("a and budget_fractions must have equal length")
    if a.shape[0] < 20:
        raise ValueError("need at least 20 steps to fit the smoother")
    if np.any(a < 0.0) or np.any(a > 1.0):
        raise ValueError("averaged comparison values must lie in [0, 1]")

    if np.all(a == a[0]):
        knots = bspline.knot_vector()
        q = bspline.n_basis()
        return GamFit(
            knots=knots,
            basis_coefficients=np.zeros(q),
            smoothing_parameter=float("inf"),
            dispersion=1e-12,
            posterior_covariance=np.zeros((q, q)),
            edf=1.0,
            gcv=0.0,
            converged=True,
            n_obs=a.shape[0],
            constant_value=float(a[0]),
        )

    best: GamFit | None = None
    for lam in LAMBDA_GRID:
        fit = fit_gam_at_lambda(a, t, lam)
        if best is None or fit.gcv < best.gcv:
            best = fit
    return best


def band_grid() -> np.ndarray:
    return np.linspace(0.0, 1.0, GRID_SIZE)


def gam_lower_band(fit: GamFit, grid: np.ndarray, level: float = BAND_LEVEL) -> np.ndarray:
    """Pointwise lower edge of the two-sided confidence band on the mean scale."""
    if not 0.0 < level < 1.0:
        raise ValueError("level must lie in (0, 1)")
    z = float(ndtri(0.5 + level / 2.0))  # 1.2816 at the 80% level
    eta = fit.linear_predictor(grid)
    se = fit.se_linear_predictor(grid)
    if fit.constant_value is not None:
        return np.full(np.asarray(grid).shape[0], fit.constant_value)
    return expit(eta - z * se)


def zone_length(lower_band: np.ndarray) -> int:
    """Length of the initial run of grid points whose lower band exceeds 0.5.

    The run may start at index 0 or index 1: a single sub-0.5 value at the
    first grid point is tolerated as a boundary-knot artifact.
    """
    band = np.asarray(lower_band)
    above = band > 0.5
    if above.shape[0] == 0:
        return 0
    if above[0]:
        start = 0
    elif above.shape[0] > 1 and above[1]:
        start = 1
    else:
        return 0
    length = 0
    for value in above[start:]:
        if not value:
            break
        length += 1
    return length


def compute_zone(fit: GamFit, level: float = BAND_LEVEL) -> ZoneResult:
    """Fitted curve, lower band, and zone length on the fixed 200-point grid."""
    grid = band_grid()
    curve = fit.mean(grid)
    lower = gam_lower_band(fit, grid, level=level)
    return ZoneResult(
        zone_length=zone_length(lower),
        grid=grid,
        fit_curve=curve,
        lower_band=lower,
    )
