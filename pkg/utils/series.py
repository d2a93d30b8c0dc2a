#!/usr/bin/env python3
"""
Truncated summation of non-negative series with a measured geometric bound.

Used for the geometric-scale tail sums, for means and variances of discretised
tails and for integrated tails on the integer lattice.

utils/series.py for bpi-tails

(C) 2025 Stephen Jenkins

"""

# standard imports
import logging
import math
from dataclasses import dataclass
from typing import Callable

# external imports
import numpy as np
from scipy.integrate import quad

LOGGER = logging.getLogger(__name__)

# ratios this close to 1 are treated as "not yet decaying"
_RATIO_CEILING = 1.0 - 1e-12


@dataclass(frozen=True)
class SeriesSum:
    value: np.ndarray  # partial sums, one per series
    remainder_bound: np.ndarray  # bound on the neglected remainder
    terms: np.ndarray  # number of terms used per series
    converged: np.ndarray  # False where the bound never became valid


def geometric_tail_sum(
    term: Callable[[int], np.ndarray],
    size: int,
    tol: float = 1e-14,
    lookback: int = 8,
    max_terms: int = 20000,
) -> SeriesSum:
    """Sum ``term(0) + term(1) + ...`` for ``size`` parallel series.

    Each series is cut at the first n where the remainder bound
    ``term(n) * r / (1 - r)`` drops below ``tol`` times the partial sum, with
    r the largest of the last ``lookback`` step ratios. A series whose terms
    hit exactly zero stops with a zero remainder.

    Args:
        term: maps n to an array of ``size`` non-negative terms
        size: number of parallel series
        tol: relative tolerance on the remainder
        lookback: number of step ratios entering the bound
        max_terms: give up after this many terms

    Returns:
        SeriesSum with per-series arrays; ``converged`` is False where the
        bound never became valid.
    """
    total = np.zeros(size)
    remainder = np.full(size, np.inf)
    terms = np.zeros(size, dtype=np.int64)
    done = np.zeros(size, dtype=bool)
    ratios = np.ones((lookback, size))
    seen = np.zeros(size, dtype=np.int64)  # decaying ratios recorded so far

    prev = None
    for n in range(max_terms):
        cur = np.asarray(term(n), dtype=float)
        active = ~done
        total[active] += cur[active]
        terms[active] = n + 1

        zero = active & (cur == 0.0)
        remainder[zero] = 0.0
        done |= zero

        if prev is not None:
            with np.errstate(divide="ignore", invalid="ignore"):
                r = np.where(prev > 0.0, cur / prev, 0.0)
            decaying = active & (r < _RATIO_CEILING)
            ratios[n % lookback, active] = r[active]
            seen[decaying] += 1
            seen[active & ~decaying] = 0
            r_hat = ratios.max(axis=0)
            ready = active & ~done & (seen >= lookback) & (r_hat < _RATIO_CEILING)
            bound = np.where(ready, cur * r_hat / (1.0 - r_hat), np.inf)
            small = ready & (bound <= tol * total)
            remainder[small] = bound[small]
            done |= small

        if done.all():
            break
        prev = cur

    converged = done.copy()
    if not converged.all():
        LOGGER.debug(f"geometric_tail_sum: {int((~converged).sum())} series unconverged")
    return SeriesSum(value=total, remainder_bound=remainder, terms=terms, converged=converged)


def _block_sum(f: Callable[[np.ndarray], np.ndarray], lo: float, hi: float) -> float:
    """Euler-Maclaurin estimate of sum_{lo <= n < hi} f(n) for a smooth-ish decreasing f."""
    integral, _ = quad(lambda x: float(f(np.array([x]))[0]), lo, hi, limit=200)
    ends = f(np.array([lo, hi]))
    return integral + 0.5 * (float(ends[0]) - float(ends[1]))


def lattice_tail_sum(
    f: Callable[[np.ndarray], np.ndarray],
    start: int,
    tol: float = 1e-12,
    exact_terms: int = 4096,
    max_blocks: int = 1000,
) -> SeriesSum:
    """Sum f(n) over integers n >= start for a non-increasing f >= 0.

    The first ``exact_terms`` values are summed directly. Beyond that the sum is
    split into dyadic blocks whose sums are estimated by quadrature with an
    endpoint correction; the dyadic block sums of a dominated-varying f decay
    geometrically, so the measured-ratio bound of geometric_tail_sum applies.
    A non-converged result means the series looks divergent at this range.
    """
    head = f(np.arange(start, start + exact_terms, dtype=float))
    head_sum = float(np.sum(head))
    if head[-1] == 0.0:
        return SeriesSum(
            value=np.array([head_sum]),
            remainder_bound=np.zeros(1),
            terms=np.array([exact_terms]),
            converged=np.ones(1, dtype=bool),
        )

    base = float(start + exact_terms)

    def block(j: int) -> np.ndarray:
        lo = base + exact_terms * (2.0**j - 1.0)
        hi = base + exact_terms * (2.0 ** (j + 1) - 1.0)
        if not math.isfinite(hi):
            return np.zeros(1)
        return np.array([_block_sum(f, lo, hi)])

    tail = geometric_tail_sum(block, size=1, tol=tol, lookback=4, max_terms=max_blocks)
    return SeriesSum(
        value=tail.value + head_sum,
        remainder_bound=tail.remainder_bound,
        terms=tail.terms + exact_terms,
        converged=tail.converged,
    )
