"""Exact stationary law by truncated iteration of the branching recursion.

X_n = A_n + sum_{i=1}^{X_{n-1}} B_{i,n} from X_0 = 0 is stochastically
non-decreasing and converges to the fixed point, so iterating the one-step
pmf map on {0..N} gives the stationary law from below. Mass pushed past N is
tracked as ``leaked`` and never renormalised away.

(C) 2025 Stephen Jenkins
"""

# std libraries
import logging
import math
from dataclasses import dataclass

# external libraries
import numpy as np

# personal libraries
from tails.dist import truncated_convolve
from tails.exceptions import (
    InvalidParameterException,
    MonotonicityException,
    StationaryNonConvergenceException,
    TruncationOverflowException,
)
from tails.model import FixedPointModel

LOGGER = logging.getLogger(__name__)

LEAK_BUDGET = 1e-8
MONOTONE_SLACK = 1e-12
# stop adding offspring powers once the remaining state mass is below this
EARLY_EXIT = 1e-16


@dataclass(frozen=True)
class PmfVector:
    values: np.ndarray  # p(0..N)
    leaked: float = 0.0  # mass beyond N
    iterations: int = 0

    @property
    def N(self) -> int:
        return self.values.size - 1

    def tail(self) -> np.ndarray:
        """P(X > n) for n = 0..N, counting leaked mass as beyond N."""
        above = np.concatenate([np.cumsum(self.values[::-1])[::-1][1:], [0.0]])
        return above + self.leaked

    def mean(self) -> float:
        """Mean of the retained mass (a lower bound when mass leaked)."""
        return float(np.dot(np.arange(self.values.size), self.values))

    @classmethod
    def point_mass(cls, N: int, at: int = 0) -> "PmfVector":
        values = np.zeros(N + 1)
        values[at] = 1.0
        return cls(values=values)

    @classmethod
    def from_dist(cls, d, N: int) -> "PmfVector":
        """Truncation of a DiscreteDist to {0..N}; the rest is leaked."""
        values = np.asarray(d.pmf_vector(N), dtype=float)
        return cls(values=values, leaked=float(d.tail(N)))


def compound_step(px: PmfVector, pA: PmfVector, pB: PmfVector, budget: float = LEAK_BUDGET) -> PmfVector:
    """One step of the recursion: p_A * sum_k px(k) p_B^{*k}, truncated at N.

    Offspring powers are built incrementally and truncated at N; the loop
    stops once the remaining state mass is negligible.

    Raises:
        TruncationOverflowException: mass beyond N exceeds ``budget``
    """
    N = px.N
    if pA.N != N or pB.N != N:
        raise InvalidParameterException(f"pmf vectors must share N: {px.N}, {pA.N}, {pB.N}")
    x = px.values
    remaining = np.concatenate([np.cumsum(x[::-1])[::-1], [0.0]])  # remaining[k] = sum_{j>=k} x[j]

    mix = np.zeros(N + 1)
    mix[0] = x[0]
    offspring_idle = pB.values[0] == 1.0
    power = np.zeros(N + 1)
    power[0] = 1.0
    for k in range(1, N + 1):
        if remaining[k] < EARLY_EXIT:
            break
        if not offspring_idle:
            power = truncated_convolve(power, pB.values, N)
        if x[k] != 0.0:
            mix += x[k] * power
    out = truncated_convolve(pA.values, mix, N)
    leaked = max(0.0, 1.0 - float(out.sum()))
    if leaked > budget:
        LOGGER.error(f"compound_step: leaked {leaked:.3g} beyond N={N} (budget {budget:.1g})")
        raise TruncationOverflowException(
            f"probability mass {leaked:.3g} beyond N={N} exceeds the budget {budget:.1g}; increase N"
        )
    return PmfVector(values=out, leaked=leaked, iterations=px.iterations + 1)


def solve_stationary(
    m: FixedPointModel,
    N: int,
    eps: float = 1e-12,
    max_iter: int = 10000,
    budget: float = LEAK_BUDGET,
) -> PmfVector:
    """Iterate compound_step from X_0 = 0 until tails move by less than eps.

    Tails are checked to be non-decreasing across iterations (up to
    MONOTONE_SLACK) at every step.

    Raises:
        StationaryNonConvergenceException: max_iter reached
        MonotonicityException: a tail value decreased
        TruncationOverflowException: propagated from compound_step
    """
    if N < 1:
        raise InvalidParameterException(f"truncation bound must be >= 1, got {N}")
    if math.isfinite(m.a) and N < 4.0 * m.a / (1.0 - m.b):
        LOGGER.warning(f"solve_stationary: N={N} is small against the mean {m.a / (1.0 - m.b):.4g}")
    pA = PmfVector.from_dist(m.A, N)
    pB = PmfVector.from_dist(m.B, N)
    px = PmfVector.point_mass(N)
    tail_prev = px.tail()
    LOGGER.debug(f"solve_stationary: N={N} eps={eps:g} max_iter={max_iter}")
    for it in range(1, max_iter + 1):
        px = compound_step(px, pA, pB, budget)
        tail_now = px.tail()
        drop = tail_prev - tail_now
        if np.any(drop > MONOTONE_SLACK):
            n = int(np.argmax(drop))
            LOGGER.error(f"solve_stationary: tail at n={n} fell by {drop[n]:.3g} at iteration {it}")
            raise MonotonicityException(f"tail decreased at n={n} by {drop[n]:.3g} (iteration {it})")
        change = float(np.max(np.abs(tail_now - tail_prev)))
        tail_prev = tail_now
        if change < eps:
            LOGGER.info(f"solve_stationary: converged after {it} iterations, leaked={px.leaked:.3g}")
            return PmfVector(values=px.values, leaked=px.leaked, iterations=it)
    LOGGER.error(f"solve_stationary: no convergence in {max_iter} iterations (b={m.b:.4g})")
    raise StationaryNonConvergenceException(f"stationary iteration did not converge in {max_iter} steps (b={m.b:.4g})")


def stationary_mean(m: FixedPointModel) -> float:
    """a / (1 - b); inf when the immigration mean is infinite."""
    if not math.isfinite(m.a):
        LOGGER.info("stationary_mean: infinite immigration mean")
        return math.inf
    return m.a / (1.0 - m.b)
