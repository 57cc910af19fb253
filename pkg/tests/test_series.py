import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from alsim.evalstat import (
    ZeroVarianceError,
    acf,
    aua,
    compare,
    comparison_series,
    score_differences,
)


class TestScoreDifferences:
    def test_definition(self):
        assert np.allclose(score_differences(np.array([0.5, 0.6, 0.55])), [0.1, -0.05])

    def test_telescoping(self):
        rng = np.random.default_rng(0)
        s = rng.random(101)
        d = score_differences(s)
        assert float(d.sum()) == pytest.approx(s[-1] - s[0], abs=1e-12)

    def test_constant_trajectory_all_zero(self):
        assert np.all(score_differences(np.full(10, 0.7)) == 0.0)

    def test_too_short_rejected(self):
        with pytest.raises(ValueError):
            score_differences(np.array([0.5]))


class TestCompare:
    def test_win_tie_loss(self):
        assert compare(0.02, 0.01) == 1.0
        assert compare(0.0, 0.0) == 0.5
        assert compare(-0.01, 0.01) == 0.0

    def test_nan_rejected(self):
        with pytest.raises(ValueError):
            compare(float("nan"), 0.0)

    @given(st.floats(-1, 1, allow_nan=False), st.floats(-1, 1, allow_nan=False))
    @settings(max_examples=200, deadline=None)
    def test_complementarity(self, x, y):
        assert compare(x, y) + compare(y, x) == 1.0


class TestComparisonSeries:
    def test_all_ties_give_half(self):
        al = np.array([0.1, 0.0, -0.1])
        rs = np.tile(al, (5, 1))
        series = comparison_series(al, rs)
        assert np.all(series.a == 0.5)
        assert np.all(series.c == 0.5)

    def test_dominant_step_gives_one(self):
        al = np.array([0.5, 0.0])
        rs = np.array([[0.1, 0.0], [0.2, 0.0], [0.3, 0.1]])
        series = comparison_series(al, rs)
        assert series.a[0] == 1.0
        assert series.a[1] == pytest.approx((0.5 + 0.5 + 0.0) / 3)

    def test_instance_permutation_invariance(self):
        rng = np.random.default_rng(1)
        al = rng.normal(size=20)
        rs = rng.normal(size=(10, 20))
        base = comparison_series(al, rs)
        shuffled = comparison_series(al, rs[rng.permutation(10)])
        assert np.allclose(base.a, shuffled.a)

    def test_granularity_multiple_of_half_over_n_rs(self):
        rng = np.random.default_rng(2)
        al = rng.choice([-0.01, 0.0, 0.01], size=50)
        rs = rng.choice([-0.01, 0.0, 0.01], size=(10, 50))
        series = comparison_series(al, rs)
        scaled = series.a * 2 * 10  # multiples of 0.5 / n_rs
        assert np.allclose(scaled, np.round(scaled))

    def test_ragged_input_rejected(self):
        with pytest.raises(ValueError):
            comparison_series(np.zeros(5), np.zeros((3, 4)))


class TestAcf:
    def test_linear_ramp_lag1(self):
        # oracle: direct evaluation of the standard estimator on 0..100
        ramp = np.arange(101, dtype=float)
        centered = ramp - ramp.mean()
        oracle = float(np.dot(centered[:-1], centered[1:]) / np.dot(centered, centered))
        got = acf(ramp, 1)[0]
        assert got == pytest.approx(oracle)
        assert got == pytest.approx(0.97, abs=0.005)

    def test_white_noise_band(self):
        hits = 0
        reps = 200
        n = 400
        for seed in range(reps):
            x = np.random.default_rng(seed).normal(size=n)
            if abs(acf(x, 1)[0]) < 2 / np.sqrt(n):
                hits += 1
        assert hits / reps > 0.90  # ~95% nominal

    def test_ramp_differences_zero_variance(self):
        ramp = np.arange(0.0, 1.01, 0.01)
        with pytest.raises(ZeroVarianceError):
            acf(np.diff(ramp), 1)

    def test_exact_constant_zero_variance(self):
        with pytest.raises(ZeroVarianceError):
            acf(np.full(50, 0.3), 2)

    def test_short_series_rejected(self):
        with pytest.raises(ValueError):
            acf(np.arange(5.0), 4)

    def test_multiple_lags_shape(self):
        x = np.random.default_rng(3).normal(size=100)
        out = acf(x, 10)
        assert out.shape == (10,)
        assert np.all(np.abs(out) <= 1.0 + 1e-12)


class TestAua:
    def test_constant(self):
        assert aua(np.full(101, 0.8)) == pytest.approx(0.8)

    def test_linear(self):
        assert aua(np.linspace(0.5, 0.9, 101)) == pytest.approx(0.7)

    def test_matches_trapezoid_oracle(self):
        rng = np.random.default_rng(4)
        s = rng.random(51)
        t = np.linspace(0, 1, 51)
        oracle = float(sum(0.5 * (s[i] + s[i + 1]) * (t[i + 1] - t[i]) for i in range(50)))
        assert aua(s) == pytest.approx(oracle)
