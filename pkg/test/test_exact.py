"""Tests for the truncated stationary solver.

(C) 2025 Stephen Jenkins
"""

import math

import numpy as np
import pytest

from tails.dist import Bernoulli, PointMass, TableDist, discretize, make_pareto
from tails.exact import PmfVector, compound_step, solve_stationary, stationary_mean
from tails.exceptions import (
    InvalidParameterException,
    StationaryNonConvergenceException,
    TruncationOverflowException,
)
from tails.model import build_model


def dense_stationary(pA: np.ndarray, pB: np.ndarray, N: int, steps: int = 400) -> np.ndarray:
    """Stationary law from the explicit transition matrix on {0..N}."""
    P = np.zeros((N + 1, N + 1))
    power = np.zeros(N + 1)
    power[0] = 1.0
    for i in range(N + 1):
        P[i] = np.convolve(pA, power)[: N + 1]
        power = np.convolve(power, pB)[: N + 1]
    v = np.zeros(N + 1)
    v[0] = 1.0
    for _ in range(steps):
        v = v @ P
    return v


class TestPmfVector:
    """Tests for PmfVector."""

    def test_tail_counts_leaked_mass(self):
        """Test leaked mass sits above every retained point."""
        pv = PmfVector(values=np.array([0.5, 0.3, 0.1]), leaked=0.1)
        np.testing.assert_allclose(pv.tail(), [0.5, 0.2, 0.1])
        assert pv.mean() == pytest.approx(0.5)
        assert pv.N == 2

    def test_from_dist(self):
        """Test truncation of a law keeps its tail as leaked mass."""
        pv = PmfVector.from_dist(discretize(make_pareto(2.0)), 4)
        assert pv.leaked == pytest.approx(4.0**-2.0)
        assert pv.values.sum() + pv.leaked == pytest.approx(1.0)


class TestCompoundStep:
    """Tests for compound_step."""

    def test_first_step_is_immigration(self):
        """Test one step from X = 0 gives the law of A."""
        N = 8
        pA = PmfVector.from_dist(TableDist([0.2, 0.5, 0.3]), N)
        pB = PmfVector.from_dist(Bernoulli(0.4), N)
        out = compound_step(PmfVector.point_mass(N), pA, pB)
        np.testing.assert_allclose(out.values, pA.values)
        assert out.iterations == 1

    def test_mismatched_length(self):
        """Test vectors of different N are refused."""
        with pytest.raises(InvalidParameterException):
            compound_step(PmfVector.point_mass(4), PmfVector.point_mass(4), PmfVector.point_mass(5))


class TestSolveStationary:
    """Tests for solve_stationary."""

    def test_matches_dense_matrix(self):
        """Test the iteration against the explicit transition matrix."""
        A, B = TableDist([0.5, 0.3, 0.2]), TableDist([0.6, 0.3, 0.1])
        m = build_model(A, B, None)
        N = 64
        px = solve_stationary(m, N)
        oracle = dense_stationary(A.pmf_vector(N), B.pmf_vector(N), N)
        assert np.max(np.abs(px.values - oracle)) <= 1e-9
        assert px.mean() == pytest.approx(1.4, rel=1e-8)

    def test_mean_identity_random_models(self):
        """Test E X = a / (1 - b) on random light models."""
        rng = np.random.default_rng(7)
        for _ in range(20):
            a_pmf = rng.dirichlet(np.ones(4))
            b = 0.1 + 0.6 * rng.random()
            u = rng.random()
            b_pmf = [1.0 - b + u * b / 2.0, b * (1.0 - u), u * b / 2.0]
            m = build_model(TableDist(a_pmf), TableDist(b_pmf), None)
            px = solve_stationary(m, 128)
            assert px.mean() == pytest.approx(stationary_mean(m), rel=1e-6)

    def test_fixed_point_residual(self):
        """Test one more step moves every tail value by less than 10 eps."""
        A, B = TableDist([0.3, 0.4, 0.3]), TableDist([0.5, 0.3, 0.2])
        m = build_model(A, B, None)
        N, eps = 128, 1e-12
        px = solve_stationary(m, N, eps=eps)
        again = compound_step(px, PmfVector.from_dist(A, N), PmfVector.from_dist(B, N))
        assert np.max(np.abs(again.tail() - px.tail())) < 10.0 * eps

    def test_bernoulli_mean(self):
        """Test Bernoulli(0.5) immigration with Bernoulli(0.4) offspring."""
        m = build_model(Bernoulli(0.5), Bernoulli(0.4), None)
        px = solve_stationary(m, 64)
        assert px.mean() == pytest.approx(0.5 / 0.6, rel=1e-9)
        assert px.leaked < 1e-12
        assert px.iterations > 1

    def test_no_offspring_gives_immigration(self):
        """Test B identically zero returns the law of A."""
        A = TableDist([0.2, 0.5, 0.3])
        px = solve_stationary(build_model(A, PointMass(0), None), 8)
        np.testing.assert_allclose(px.values, A.pmf_vector(8), atol=1e-15)

    def test_truncation_overflow(self):
        """Test a heavy immigration law overflows a short support."""
        m = build_model(discretize(make_pareto(1.5)), Bernoulli(0.4), None)
        with pytest.raises(TruncationOverflowException):
            solve_stationary(m, 32)

    def test_max_iter(self):
        """Test hitting max_iter raises."""
        m = build_model(Bernoulli(0.5), Bernoulli(0.4), None)
        with pytest.raises(StationaryNonConvergenceException):
            solve_stationary(m, 64, max_iter=3)

    def test_bad_truncation(self):
        """Test N must be at least 1."""
        m = build_model(Bernoulli(0.5), Bernoulli(0.4), None)
        with pytest.raises(InvalidParameterException):
            solve_stationary(m, 0)


class TestStationaryMean:
    """Tests for stationary_mean."""

    def test_finite(self):
        """Test a / (1 - b)."""
        m = build_model(Bernoulli(0.5), Bernoulli(0.5), None)
        assert stationary_mean(m) == pytest.approx(1.0)

    def test_infinite(self):
        """Test an infinite immigration mean."""
        G = make_pareto(0.8)
        m = build_model(discretize(G), Bernoulli(0.5), G)
        assert stationary_mean(m) == math.inf
