"""Tests for tail sums, condition checks and predicted tails.

(C) 2025 Stephen Jenkins
"""

import math
from dataclasses import replace

import numpy as np
import pytest

from tails.asymptotics import (
    build_second_order,
    check_conditions,
    check_infinite_mean_conditions,
    check_scale_continuity,
    default_bound_ratios,
    predict_second_order,
    predict_tail,
    predict_tail_rv,
    second_order_delta,
    tail_sum,
    window_ratio_prediction,
)
from tails.dist import (
    Bernoulli,
    Geometric,
    PointMass,
    discretize,
    make_erv_cycle,
    make_pareto,
    scale_tail,
    tail_from_callable,
)
from tails.exceptions import (
    InvalidParameterException,
    NonConvergentSumException,
    StabilityException,
    UnsupportedRegimeException,
)
from tails.model import build_model

GRID = np.geomspace(30.0, 300.0, 25)


@pytest.fixture
def case_iii():
    """Pareto(2.5) immigration with Bernoulli(0.5) offspring."""
    G = make_pareto(2.5)
    return build_model(discretize(G), Bernoulli(0.5), G)


class TestTailSum:
    """Tests for tail_sum."""

    def test_pareto_closed_form(self):
        """Test T_2(x) = x^-alpha / (1 - 2^-alpha) for a Pareto tail."""
        res = tail_sum(make_pareto(2.5), 2.0, 10.0)
        assert res.value == pytest.approx(10.0**-2.5 / (1.0 - 2.0**-2.5), rel=1e-10)
        assert res.remainder_bound >= 0.0
        assert isinstance(res.value, float)

    def test_vectorised(self):
        """Test array input keeps its shape."""
        x = np.array([[10.0, 20.0], [40.0, 80.0]])
        res = tail_sum(make_pareto(2.0), 3.0, x)
        assert res.value.shape == (2, 2)
        np.testing.assert_allclose(res.value, x**-2.0 / (1.0 - 3.0**-2.0), rtol=1e-10)

    def test_window_identity(self):
        """Test T_c(x) - T_c(c x) = G(x) on an ERV tail."""
        t = make_erv_cycle(2.0, 1.5, 2.5)
        x = np.geomspace(5.0, 500.0, 10)
        diff = tail_sum(t, 2.0, x).value - tail_sum(t, 2.0, 2.0 * x).value
        np.testing.assert_allclose(diff, t.evaluate(x), rtol=1e-9)

    def test_divergent_sum_raises(self):
        """Test a tail without a log moment gives a non-convergent sum."""
        t = tail_from_callable(lambda x: 1.0 / np.log(x + np.e))
        with pytest.raises(NonConvergentSumException):
            tail_sum(t, 2.0, 10.0, max_terms=500)

    def test_telescoping_pareto(self):
        """Test T_c(x) - T_c(c x) = G(x) to 1e-12 on a Pareto tail."""
        t = make_pareto(2.5)
        x = np.geomspace(2.0, 2000.0, 12)
        for c in (1.5, 2.0, 3.0):
            diff = tail_sum(t, c, x, tol=1e-15).value - tail_sum(t, c, c * x, tol=1e-15).value
            np.testing.assert_allclose(diff, t.evaluate(x), rtol=1e-12)

    def test_decreasing_in_c(self):
        """Test T_c(x) falls strictly as c grows."""
        x = np.geomspace(5.0, 500.0, 8)
        for t in (make_pareto(2.5), make_erv_cycle(2.0, 1.5, 2.5)):
            values = np.array([tail_sum(t, c, x).value for c in (1.2, 1.5, 1.8, 2.0, 2.2, 3.0, 5.0)])
            assert np.all(np.diff(values, axis=0) < 0.0)

    @pytest.mark.parametrize("c,x,tol", [(1.0, 1.0, 1e-12), (2.0, 0.0, 1e-12), (2.0, 1.0, 0.0)])
    def test_bad_arguments(self, c, x, tol):
        """Test c > 1, x > 0 and tol > 0 are enforced."""
        with pytest.raises(InvalidParameterException):
            tail_sum(make_pareto(2.0), c, x, tol)


class TestSecondOrderDelta:
    """Tests for second_order_delta."""

    def test_identity_random_pairs(self):
        """Test delta (b1 + delta) = b2 over random stable pairs."""
        rng = np.random.default_rng(2025)
        for _ in range(1000):
            b1 = 0.99 * rng.random()
            b2 = (0.99 - b1) * rng.random()
            delta = second_order_delta(b1, b2)
            assert delta >= 0.0
            assert delta * (b1 + delta) == pytest.approx(b2, abs=1e-12)
            assert b1 + delta < 1.0

    def test_known_value(self):
        """Test b1 = b2 = 0.3."""
        assert second_order_delta(0.3, 0.3) == pytest.approx(0.41789, abs=1e-4)

    def test_zero_second_lag(self):
        """Test b2 = 0 gives delta = 0."""
        assert second_order_delta(0.4, 0.0) == 0.0

    def test_unstable(self):
        """Test b1 + b2 >= 1 raises."""
        with pytest.raises(StabilityException):
            second_order_delta(0.6, 0.4)


class TestConditions:
    """Tests for the structural condition checks."""

    def test_scale_continuity_pareto(self):
        """Test continuity at c0 = 1/b for a Pareto tail."""
        report = check_scale_continuity(make_pareto(2.5), 0.5, GRID)
        assert report.passed and report.analytic
        assert report.upper_limit == pytest.approx(1.0, abs=0.01)
        assert report.lower_limit == pytest.approx(1.0, abs=0.01)
        assert report.uppers[0] >= report.lowers[0]

    def test_scale_continuity_bad_b(self):
        """Test b outside (0, 1) raises."""
        with pytest.raises(InvalidParameterException):
            check_scale_continuity(make_pareto(2.5), 1.0, GRID)

    def test_check_conditions(self, case_iii):
        """Test every check on the benchmark model."""
        report = check_conditions(case_iii, GRID)
        assert report.scale_continuity.passed
        assert report.karamata.passed
        assert report.karamata.value == pytest.approx(-2.5, abs=1e-6)
        assert report.variance_route is None

    def test_light_model_unsupported(self):
        """Test checks on a light model raise."""
        m = build_model(Bernoulli(0.5), Bernoulli(0.4), None)
        with pytest.raises(UnsupportedRegimeException):
            check_conditions(m, GRID)

    def test_infinite_mean_variance_route(self):
        """Test x G(x) growing with finite Var(B) passes the variance route."""
        G = make_pareto(0.8)
        m = build_model(discretize(G), Bernoulli(0.5), G)
        report = check_infinite_mean_conditions(m, np.geomspace(10.0, 1000.0, 40))
        assert report.variance_route.passed
        assert report.variance_route.C_estimate == math.inf
        assert report.infinite_mean_ok


class TestPredictTail:
    """Tests for predict_tail and predict_second_order."""

    def test_case_iii_matches_rv_coefficient(self, case_iii):
        """Test D T_2(x) equals G(x) / (1 - 0.5^2.5) on a Pareto reference."""
        pred = predict_tail(case_iii, GRID)
        coef = 1.0 / (1.0 - 0.5**2.5)
        assert pred.regime == "finite_mean"
        assert pred.rv_coefficient == pytest.approx(coef)
        np.testing.assert_allclose(pred.curve, coef * GRID**-2.5, rtol=1e-10)
        assert np.all(pred.lower <= pred.curve) and np.all(pred.curve <= pred.upper)
        assert (pred.d1, pred.d2) == pytest.approx((1.8, 2.2))

    def test_custom_bounds(self, case_iii):
        """Test user bound ratios must straddle 1/b."""
        pred = predict_tail(case_iii, GRID, d1=1.5, d2=3.0)
        assert (pred.d1, pred.d2) == (1.5, 3.0)
        with pytest.raises(InvalidParameterException):
            predict_tail(case_iii, GRID, d1=2.5, d2=3.0)

    def test_rv_and_window_helpers(self, case_iii):
        """Test the RV coefficient and the window prediction."""
        assert predict_tail_rv(case_iii, 2.5) == pytest.approx(1.0 / (1.0 - 0.5**2.5))
        assert window_ratio_prediction(case_iii) == pytest.approx(1.0)

    def test_infinite_mean(self):
        """Test a = inf is predicted through the variance route."""
        G = make_pareto(0.8)
        m = build_model(discretize(G), Bernoulli(0.5), G)
        pred = predict_tail(m, np.geomspace(10.0, 1000.0, 40))
        assert pred.regime == "infinite_mean_variance"
        assert np.all(np.isfinite(pred.curve))

    def test_infinite_variance_offspring_unsupported(self):
        """Test a = inf with Pareto(1.5) offspring fails both routes and raises."""
        G = make_pareto(0.8)
        base = build_model(discretize(G), Bernoulli(0.5), G)
        # P(B > x) / G(x) ~ 0.2 x^-0.7 vanishes only in the limit, so c2 = 0 is carried over
        B = discretize(scale_tail(make_pareto(1.5), 0.2))
        m = replace(base, B=B, b=B.mean)
        grid = np.geomspace(10.0, 1000.0, 40)
        report = check_infinite_mean_conditions(m, grid)
        assert report.variance_route.variance == math.inf
        assert not report.variance_route.passed
        maxima = report.integrated_route.window_maxima
        assert maxima[0] < maxima[1] < maxima[2]
        assert not report.integrated_route.passed
        assert not report.infinite_mean_ok
        with pytest.raises(UnsupportedRegimeException):
            predict_tail(m, grid)

    def test_second_order_without_second_lag(self):
        """Test B2 = 0 reduces the two-lag prediction to the one-lag one."""
        G = make_pareto(2.5)
        m2 = build_second_order(discretize(G), Bernoulli(0.5), PointMass(0), G)
        assert m2.delta == 0.0
        two = predict_second_order(m2, GRID)
        one = predict_tail(build_model(discretize(G), Bernoulli(0.5), G), GRID)
        assert two.D == pytest.approx(one.D, rel=1e-10)
        assert (two.d1, two.d2) == pytest.approx((one.d1, one.d2), rel=1e-10)
        np.testing.assert_allclose(two.curve, one.curve, rtol=1e-10)
        np.testing.assert_allclose(two.lower, one.lower, rtol=1e-10)
        np.testing.assert_allclose(two.upper, one.upper, rtol=1e-10)

    def test_light_model_unsupported(self):
        """Test predictions on a light model raise."""
        m = build_model(Bernoulli(0.5), Geometric(0.2), None)
        with pytest.raises(UnsupportedRegimeException):
            predict_tail(m, GRID)

    def test_default_bound_ratios(self):
        """Test d1 is pulled back above 1 near c0 = 1."""
        assert default_bound_ratios(2.0) == pytest.approx((1.8, 2.2))
        d1, d2 = default_bound_ratios(1.05)
        assert d1 == pytest.approx(1.025)
        assert d2 == pytest.approx(1.155)

    def test_second_order(self):
        """Test the coefficient c1 + E X (c2 + c3) and the rate b1 + delta."""
        G = make_pareto(2.5)
        m2 = build_second_order(discretize(G), Bernoulli(0.3), Bernoulli(0.3), G)
        assert m2.coefficient == pytest.approx(1.0)
        assert m2.rate == pytest.approx(0.3 + 0.41789, abs=1e-4)
        assert m2.m == pytest.approx(m2.a / 0.4)
        pred = predict_second_order(m2, GRID)
        assert pred.regime == "second_order"
        coef = 1.0 / (1.0 - m2.rate**2.5)
        np.testing.assert_allclose(pred.curve, coef * GRID**-2.5, rtol=1e-9)

    def test_second_order_light(self):
        """Test the light two-lag model has no prediction."""
        m2 = build_second_order(PointMass(1), Bernoulli(0.3), Bernoulli(0.2), None)
        assert m2.coefficient is None
        with pytest.raises(UnsupportedRegimeException):
            predict_second_order(m2, GRID)
