"""Tests for model assembly, stability and the queue mapping.

(C) 2025 Stephen Jenkins
"""

import math

import numpy as np
import pytest

from tails.dist import (
    Bernoulli,
    ConvolvedDist,
    PointMass,
    TableDist,
    discretize,
    make_pareto,
    scale_tail,
    tail_from_callable,
)
from tails.exceptions import (
    DegenerateModelException,
    InvalidParameterException,
    NoReferenceTailException,
    StabilityException,
    SubcriticalityException,
)
from tails.model import (
    QueueModel,
    StabilityVerdict,
    TailCase,
    build_model,
    check_stability,
    coefficient_D,
    combine_constant,
    estimate_ratio_constants,
    queue_components,
    queue_to_model,
    reference_ratio,
)

GRID = np.geomspace(10.0, 1000.0, 40)


def slowly_decaying():
    """Integer law whose log moment is infinite."""
    return discretize(tail_from_callable(lambda x: 1.0 / np.log(x + np.e), log_moment_finite=False))


class TestCheckStability:
    """Tests for check_stability."""

    def test_stable(self):
        """Test b < 1 with a finite log moment is stable."""
        report = check_stability(Bernoulli(0.5), Bernoulli(0.4))
        assert report.stable
        assert report.b_value == pytest.approx(0.4)

    def test_critical(self):
        """Test b = 1 is excluded as critical."""
        report = check_stability(PointMass(1), PointMass(1))
        assert report.verdict == StabilityVerdict.CRITICAL
        assert not report.b_ok

    def test_unstable(self):
        """Test b > 1 is unstable."""
        assert check_stability(PointMass(1), PointMass(2)).verdict == StabilityVerdict.UNSTABLE

    def test_log_moment_infinite(self):
        """Test an immigration law without a log moment is rejected."""
        report = check_stability(slowly_decaying(), Bernoulli(0.5))
        assert report.verdict == StabilityVerdict.LOG_MOMENT_INFINITE
        assert not report.stable


class TestConstants:
    """Tests for the D coefficient helpers."""

    def test_combine_constant_zero_wins(self):
        """Test inf times a zero constant is zero."""
        assert combine_constant(math.inf, 0.0) == 0.0
        assert combine_constant(2.0, 0.5) == 1.0

    def test_coefficient_D(self):
        """Test D = ((1-b) c1 + a c2) / (1-b)."""
        assert coefficient_D(a=2.0, b=0.5, c1=1.0, c2=0.5) == pytest.approx(3.0)
        assert coefficient_D(a=math.inf, b=0.5, c1=1.0, c2=0.0) == pytest.approx(1.0)


class TestReferenceRatio:
    """Tests for the tail ratio constants."""

    def test_separately_built_tails_are_exact(self):
        """Test equal closed-form tails give an analytic ratio."""
        est = reference_ratio(discretize(make_pareto(2.5)), make_pareto(2.5))
        assert est.analytic and est.value == 1.0

    def test_scaled_tail_ratio(self):
        """Test scaled copies give the factor ratio."""
        G = scale_tail(make_pareto(2.5), 0.5)
        est = reference_ratio(discretize(scale_tail(make_pareto(2.5), 0.2)), G)
        assert est.value == pytest.approx(0.4)

    def test_light_against_heavy_is_zero(self):
        """Test a light law has ratio zero against a heavy tail."""
        assert reference_ratio(Bernoulli(0.3), make_pareto(2.5)).value == 0.0

    def test_windowed_estimate(self):
        """Test an unknown tail falls back to the windowed estimate."""
        t = tail_from_callable(lambda x: np.minimum(1.0, 3.0 * np.maximum(x, 1.0) ** -2.5))
        est = estimate_ratio_constants(t, make_pareto(2.5), GRID)
        assert not est.analytic
        assert est.converged
        assert est.value == pytest.approx(3.0, rel=1e-9)

    def test_no_grid_for_windowed_estimate(self):
        """Test a windowed estimate without a grid raises."""
        d = discretize(tail_from_callable(lambda x: np.minimum(1.0, np.maximum(x, 1.0) ** -2.0)))
        with pytest.raises(InvalidParameterException):
            reference_ratio(d, make_pareto(2.0))

    def test_oscillating_ratio_warns(self):
        """Test an unsettled ratio is flagged but still returned."""
        t = tail_from_callable(lambda x: np.maximum(x, 1.0) ** -2.5 * (1.5 + np.sin(np.log(np.maximum(x, 1.0)))))
        est = estimate_ratio_constants(t, make_pareto(2.5), GRID)
        assert not est.converged
        assert est.spread > 1.05
        assert est.value > 0.0


class TestBuildModel:
    """Tests for build_model."""

    def test_immigration_only_case(self):
        """Test heavy A with light B gives case (iii) and D = c1."""
        m = build_model(discretize(make_pareto(2.5)), Bernoulli(0.5), make_pareto(2.5))
        assert m.case_label == TailCase.IMMIGRATION_ONLY
        assert (m.c1, m.c2) == (1.0, 0.0)
        assert m.D == pytest.approx(1.0)
        assert m.a == pytest.approx(2.341487257, rel=1e-8)
        assert any("never empty" in w for w in m.warnings)

    def test_offspring_only_case(self):
        """Test light A with heavy B gives case (ii)."""
        B = discretize(scale_tail(make_pareto(2.5), 0.2))
        m = build_model(Bernoulli(0.5), B, make_pareto(2.5))
        assert m.case_label == TailCase.OFFSPRING_ONLY
        assert m.c2 == pytest.approx(0.2)
        assert m.b == pytest.approx(0.2 * 2.341487257, rel=1e-8)
        assert m.D == pytest.approx(0.5 * 0.2 / (1.0 - m.b))

    def test_both_heavy_case(self):
        """Test both heavy gives case (i)."""
        G = make_pareto(2.5)
        m = build_model(discretize(G), discretize(scale_tail(G, 0.1)), G)
        assert m.case_label == TailCase.BOTH_HEAVY
        assert m.D == pytest.approx(((1.0 - m.b) * 1.0 + m.a * 0.1) / (1.0 - m.b))

    def test_light_model(self):
        """Test no reference tail gives a light model."""
        m = build_model(Bernoulli(0.5), Bernoulli(0.4), None)
        assert not m.is_heavy
        assert m.D is None and m.case_label is None
        assert m.summary()["case"] is None

    def test_no_reference(self):
        """Test two light laws against a heavy tail raise."""
        with pytest.raises(NoReferenceTailException):
            build_model(Bernoulli(0.5), Bernoulli(0.4), make_pareto(2.5))

    def test_degenerate(self):
        """Test A identically zero raises."""
        with pytest.raises(DegenerateModelException):
            build_model(PointMass(0), Bernoulli(0.4), None)

    @pytest.mark.parametrize("B", [PointMass(1), PointMass(2)])
    def test_unstable(self, B):
        """Test b >= 1 raises."""
        with pytest.raises(StabilityException):
            build_model(Bernoulli(0.5), B, None)

    def test_log_moment_infinite_raises(self):
        """Test an infinite log moment raises."""
        with pytest.raises(StabilityException):
            build_model(slowly_decaying(), Bernoulli(0.5), None)

    def test_near_critical_warning(self):
        """Test b above the near-critical threshold is noted."""
        m = build_model(Bernoulli(0.5), Bernoulli(0.97), None)
        assert any("near-critical" in w for w in m.warnings)

    def test_idle_offspring_warning(self):
        """Test B identically zero is noted."""
        m = build_model(Bernoulli(0.5), PointMass(0), None)
        assert any("no offspring" in w for w in m.warnings)


class TestQueue:
    """Tests for the queue mapping."""

    @pytest.mark.parametrize("k,p", [(0, 0.3), (1, 1.0), (1, -0.1), (1.5, 0.3)])
    def test_bad_parameters(self, k, p):
        """Test k >= 1 and p in [0, 1)."""
        with pytest.raises(InvalidParameterException):
            QueueModel(k=k, p=p, xi=Bernoulli(0.2))

    def test_components(self):
        """Test A is the k-fold sum of xi and B adds a Bernoulli(p)."""
        A, B = queue_components(QueueModel(k=3, p=0.3, xi=TableDist([0.5, 0.5])))
        assert isinstance(A, ConvolvedDist)
        assert A.mean == pytest.approx(1.5)
        assert B.mean == pytest.approx(0.8)

    def test_light_mapping(self):
        """Test a light queue maps to a light model with the right means."""
        m = queue_to_model(QueueModel(k=2, p=0.3, xi=Bernoulli(0.2)))
        assert m.a == pytest.approx(0.4)
        assert m.b == pytest.approx(0.5)
        assert not m.is_heavy

    def test_heavy_mapping(self):
        """Test a heavy xi becomes its own reference with c1 = k and c2 = 1."""
        xi = discretize(scale_tail(make_pareto(2.5), 0.1))
        m = queue_to_model(QueueModel(k=2, p=0.3, xi=xi))
        assert m.c1 == pytest.approx(2.0)
        assert m.c2 == pytest.approx(1.0)
        assert m.case_label == TailCase.BOTH_HEAVY
        assert m.D == pytest.approx(((1.0 - m.b) * 2.0 + m.a) / (1.0 - m.b))

    def test_not_subcritical(self):
        """Test E(xi) + p >= 1 raises."""
        with pytest.raises(SubcriticalityException):
            queue_to_model(QueueModel(k=1, p=0.5, xi=Bernoulli(0.5)))
