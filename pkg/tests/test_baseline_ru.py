import io
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ruleout_eu.baseline_ru import (
    CurveFormatError,
    PerformanceCurve,
    baseline_relative_utility,
    bundled_curve,
    fit_spline,
    knot_bootstrap_relative_utility,
    read_curve,
    slope_at,
)
from ruleout_eu.metrics import relative_utility_from_rd_slope

X11 = np.linspace(0.0, 1.0, 11)


def line_curve(slope, intercept=0.0, x=None):
    x = np.linspace(0.005, 0.06, 12) if x is None else x
    return PerformanceCurve(x, slope * x + intercept)


class TestFit:
    def test_line(self):
        m = fit_spline(line_curve(0.4, 0.1, X11))
        xs = np.linspace(0, 1, 57)
        assert np.allclose(m(xs), 0.4 * xs + 0.1, atol=1e-12)
        assert np.allclose(m(xs, 1), 0.4, atol=1e-12)

    def test_quadratic_interior_derivative(self):
        # natural ends force y'' = 0 at the boundary, so only the central region tracks 2x closely
        m = fit_spline(PerformanceCurve(X11, X11**2))
        for x in np.linspace(0.4, 0.6, 21):
            assert slope_at(m, x) == pytest.approx(2 * x, abs=1e-3)
        assert slope_at(m, 0.5) == pytest.approx(1.0, abs=1e-3)

    def test_knots_and_natural_ends(self):
        rng = np.random.default_rng(1)
        x = np.sort(rng.uniform(0, 1, 15))
        y = np.cumsum(rng.uniform(0, 0.1, 15))
        m = fit_spline(PerformanceCurve(x, y))
        assert np.max(np.abs(m(x) - y)) < 1e-12
        assert abs(float(m(x[0], 2))) < 1e-9
        assert abs(float(m(x[-1], 2))) < 1e-9

    def test_too_few_points(self):
        with pytest.raises(ValueError, match="at least 3"):
            PerformanceCurve([0.1, 0.2], [0.01, 0.02])

    def test_duplicate_x(self):
        with pytest.raises(ValueError, match="strictly increasing"):
            PerformanceCurve.from_points([(0.1, 0.0), (0.2, 0.1), (0.2, 0.2)])

    def test_nonmonotone_warns(self):
        with pytest.warns(RuntimeWarning):
            PerformanceCurve([0.1, 0.2, 0.3], [0.1, 0.05, 0.2])

    def test_unsorted_points_sorted(self):
        c = PerformanceCurve.from_points([(0.3, 0.3), (0.1, 0.1), (0.2, 0.2)])
        assert c.x.tolist() == [0.1, 0.2, 0.3]


class TestSlopeAt:
    def test_no_extrapolation(self):
        m = fit_spline(line_curve(0.1))
        with pytest.raises(ValueError, match="extrapolate"):
            slope_at(m, 0.07)

    @settings(max_examples=50, deadline=None)
    @given(delta=st.floats(-0.5, 0.5), q=st.floats(0.0, 1.0))
    def test_shift_invariance(self, delta, q):
        y = np.array([0.0, 0.3, 0.45, 0.7, 0.72, 0.9])
        x = np.array([0.0, 0.1, 0.25, 0.5, 0.6, 1.0])
        m0 = fit_spline(PerformanceCurve(x, y))
        m1 = fit_spline(PerformanceCurve(x + delta, y))
        xq = q
        xq1 = min(max(xq + delta, m1.x_min), m1.x_max)
        assert slope_at(m1, xq1) == pytest.approx(slope_at(m0, xq1 - delta), abs=1e-9)


class TestBaselineRelativeUtility:
    def test_linear_112(self):
        assert baseline_relative_utility(line_curve(1 / 112), 0.032) == pytest.approx(111, abs=1e-9)

    def test_linear_163(self):
        assert baseline_relative_utility(line_curve(1 / 163), 0.02) == pytest.approx(162, abs=1e-9)

    def test_half(self):
        assert baseline_relative_utility(line_curve(0.5), 0.02) == pytest.approx(1.0, abs=1e-12)

    def test_slope_out_of_domain(self):
        with pytest.raises(ValueError, match=r"\(0, 1\)"):
            baseline_relative_utility(PerformanceCurve(X11, X11**2), 0.5)

    def test_roc_space(self):
        x = np.linspace(0.01, 0.2, 10)
        curve = PerformanceCurve(x, 0.5 + 0.875 * x, space="roc")
        u = baseline_relative_utility(curve, 0.065, prevalence=0.007)
        assert u == pytest.approx((0.993 / 0.007) / 0.875, rel=1e-9)
        with pytest.raises(ValueError, match="prevalence"):
            baseline_relative_utility(curve, 0.065)

    @pytest.mark.parametrize("u", [1, 10, 111, 162, 1000])
    def test_round_trip(self, u):
        assert relative_utility_from_rd_slope(1 / (1 + u)) == pytest.approx(u, rel=1e-12)

    def test_bundled_curve_is_data_dependent(self):
        # the bundled curve is synthetic and built to have slope 1/112 at 0.032
        u = baseline_relative_utility(bundled_curve(), 0.032)
        assert 100 < u < 125

    def test_knot_bootstrap(self):
        out = knot_bootstrap_relative_utility(line_curve(1 / 112), 0.032, n_resamples=100, seed=3)
        assert out["median"] == pytest.approx(111, rel=1e-6)
        assert out["n_used"] + out["n_skipped"] == 100
        again = knot_bootstrap_relative_utility(line_curve(1 / 112), 0.032, n_resamples=100, seed=3)
        assert out == again


class TestReadCurve:
    def test_read_unsorted(self):
        text = "# comment\nx,y\n0.03,0.006\n0.01,0.004\n0.02,0.005\n"
        c = read_curve(io.StringIO(text))
        assert c.x.tolist() == [0.01, 0.02, 0.03]

    @pytest.mark.parametrize("text", [
        "a,b\n0.1,0.1\n",
        "x,y\n0.1\n",
        "x,y\n0.1,abc\n",
        "x,y\n1.5,0.1\n0.2,0.2\n0.3,0.3\n",
        "x,y\n0.1,0.1\n0.1,0.2\n0.3,0.3\n",
    ])
    def test_malformed(self, text):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            with pytest.raises(CurveFormatError):
                read_curve(io.StringIO(text))
