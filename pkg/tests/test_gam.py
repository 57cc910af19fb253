import numpy as np
import pytest
from scipy.interpolate import BSpline
from scipy.special import expit

from alsim.evalstat import (
    band_grid,
    compute_zone,
    fit_gam,
    fit_gam_at_lambda,
    gam_lower_band,
    zone_length,
)
from alsim.evalstat.bspline import (
    design_matrix,
    knot_vector,
    n_basis,
    second_difference_matrix,
)

T100 = np.arange(1, 101) / 100


class TestBsplineBasis:
    def test_matches_scipy_reference(self):
        # dual route: same clamped knots through scipy's BSpline
        knots = knot_vector()
        t = np.linspace(0.0, 1.0, 201)
        mine = design_matrix(t, knots)
        q = n_basis()
        reference = np.empty((t.size, q))
        for j in range(q):
            coef = np.zeros(q)
            coef[j] = 1.0
            reference[:, j] = BSpline(knots, coef, 3, extrapolate=False)(t)
        assert np.allclose(mine, reference, atol=1e-12)

    def test_partition_of_unity(self):
        knots = knot_vector()
        t = np.random.default_rng(0).random(500)
        basis = design_matrix(t, knots)
        assert np.allclose(basis.sum(axis=1), 1.0, atol=1e-12)
        assert basis.min() >= 0.0

    def test_basis_count(self):
        assert n_basis() == 24
        assert design_matrix(T100, knot_vector()).shape == (100, 24)

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            design_matrix(np.array([1.2]), knot_vector())

    def test_second_difference_matrix(self):
        d = second_difference_matrix(5)
        assert d.shape == (3, 5)
        # annihilates linear sequences: the penalty has a 2-dim null space
        assert np.allclose(d @ np.arange(5.0), 0.0)
        assert np.allclose(d @ np.ones(5), 0.0)


class TestFitGam:
    def test_constant_half_gives_flat_curve(self):
        fit = fit_gam(np.full(100, 0.5), T100)
        grid = band_grid()
        assert np.allclose(fit.mean(grid), 0.5)
        assert fit.constant_value == 0.5
        assert np.all(gam_lower_band(fit, grid) == 0.5)

    def test_constant_extremes_handled(self):
        for c in (0.0, 1.0):
            fit = fit_gam(np.full(100, c), T100)
            assert np.allclose(fit.mean(band_grid()), c)

    def test_recovery_of_logistic_decay(self):
        rng = np.random.default_rng(7)
        truth = expit(1.0 - 4.0 * T100)
        worst = 0.0
        for _ in range(20):
            a = rng.binomial(10, truth) / 10.0
            fit = fit_gam(a, T100)
            rmse = float(np.sqrt(np.mean((fit.mean(T100) - truth) ** 2)))
            worst = max(worst, rmse)
        assert worst < 0.05

    def test_fitted_values_stay_in_unit_interval(self):
        rng = np.random.default_rng(8)
        a = rng.choice([0.0, 0.5, 1.0], size=100, p=[0.4, 0.2, 0.4])
        fit = fit_gam(a, T100)
        curve = fit.mean(band_grid())
        assert np.all(curve > 0.0) and np.all(curve < 1.0)

    def test_doubling_penalty_never_raises_edf(self):
        rng = np.random.default_rng(9)
        a = np.clip(expit(1.0 - 3.0 * T100) + rng.normal(0, 0.1, 100), 0, 1)
        for lam in (0.01, 0.1, 1.0, 10.0, 100.0):
            low = fit_gam_at_lambda(a, T100, lam)
            high = fit_gam_at_lambda(a, T100, 2.0 * lam)
            assert high.edf <= low.edf + 1e-9

    def test_dispersion_positive_and_covariance_symmetric(self):
        rng = np.random.default_rng(10)
        a = rng.binomial(10, np.full(100, 0.5)) / 10.0
        fit = fit_gam(a, T100)
        assert fit.dispersion > 0
        assert np.allclose(fit.posterior_covariance, fit.posterior_covariance.T)

    def test_input_validation(self):
        with pytest.raises(ValueError):
            fit_gam(np.full(10, 0.5), np.arange(1, 11) / 10)  # too short
        with pytest.raises(ValueError):
            fit_gam(np.full(100, 1.5), T100)  # outside [0, 1]


class TestLowerBand:
    def test_quantile_arithmetic_example(self):
        # eta=0, se=0.5 -> lower edge at inv-logit(-1.2816 * 0.5)
        z = 1.2815515655446004
        oracle = 1.0 / (1.0 + np.exp(z * 0.5))
        assert oracle == pytest.approx(0.345, abs=1e-3)

        rng = np.random.default_rng(11)
        a = rng.binomial(10, np.full(100, 0.5)) / 10.0
        fit = fit_gam(a, T100)
        grid = band_grid()
        eta = fit.linear_predictor(grid)
        se = fit.se_linear_predictor(grid)
        band = gam_lower_band(fit, grid)
        assert np.allclose(band, expit(eta - z * se), atol=1e-12)

    def test_band_below_curve(self):
        rng = np.random.default_rng(12)
        a = rng.binomial(10, expit(0.5 - 2 * T100)) / 10.0
        fit = fit_gam(a, T100)
        zone = compute_zone(fit)
        assert np.all(zone.lower_band <= zone.fit_curve + 1e-12)

    def test_zone_monotone_in_band_level(self):
        rng = np.random.default_rng(13)
        truth = expit(2.0 - 6.0 * T100)
        a = rng.binomial(10, truth) / 10.0
        fit = fit_gam(a, T100)
        lengths = [compute_zone(fit, level=lvl).zone_length for lvl in (0.5, 0.8, 0.95)]
        assert lengths[0] >= lengths[1] >= lengths[2]


class TestZoneLength:
    def test_all_below_half(self):
        assert zone_length(np.full(200, 0.4)) == 0

    def test_prefix_run(self):
        band = np.array([0.6, 0.6, 0.4, 0.7, 0.8] + [0.4] * 195)
        assert zone_length(band) == 2

    def test_all_above_gives_maximum(self):
        assert zone_length(np.full(200, 0.7)) == 200

    def test_single_boundary_artifact_tolerated(self):
        band = np.array([0.45, 0.6, 0.6, 0.6] + [0.3] * 196)
        assert zone_length(band) == 3

    def test_two_initial_misses_give_zero(self):
        band = np.array([0.45, 0.45, 0.9, 0.9] + [0.3] * 196)
        assert zone_length(band) == 0

    def test_gain_flag(self):
        rng = np.random.default_rng(14)
        truth = expit(3.0 - 5.0 * T100)
        a = rng.binomial(40, truth) / 40.0
        fit = fit_gam(a, T100)
        zone = compute_zone(fit)
        assert zone.gain_flag == (zone.zone_length > 0)
        assert zone.zone_length > 0  # strong early signal must register

    def test_grid_is_200_points_on_unit_interval(self):
        grid = band_grid()
        assert grid.shape == (200,)
        assert grid[0] == 0.0 and grid[-1] == 1.0
