"""Heavy-tailed distribution kernel.

Tail functions on [0, inf), their integer-valued discretisations, samplers,
integrated tails and finite-grid classifiers for the heavy-tail classes
(long-tailed, dominated varying, intermediate / extended / regularly varying,
subexponential).

All values are immutable after construction. Samplers take an external
numpy Generator, which is the only mutable object involved.

(C) 2025 Stephen Jenkins
"""

# std libraries
import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional, Sequence

# external libraries
import numpy as np
from scipy.signal import fftconvolve
from scipy.special import zeta

# personal libraries
from tails.exceptions import (
    GridUnderflowException,
    InvalidInputException,
    InvalidParameterException,
    StateOverflowException,
)
from utils.series import lattice_tail_sum

LOGGER = logging.getLogger(__name__)

# largest state a sampler may return
INT_LIMIT = 2**62
# np.convolve up to this length, FFT above
DIRECT_CONV_LIMIT = 2048
MAX_CONV_LENGTH = 1 << 24
# default fraction of the grid used for liminf / limsup estimates
DEFAULT_WINDOW = 0.25
# max draws materialised at once by the generic iid summation
_SUM_CHUNK = 1 << 22


class TailClass(str, Enum):
    """Heavy-tail class tags, plus a tag for light tails."""

    L = "L"
    S = "S"
    SSTAR = "Sstar"
    D = "D"
    IRV = "IRV"
    ERV = "ERV"
    RV = "RV"
    LIGHTTAIL = "lighttail"


HEAVY_CLASSES = {TailClass.RV, TailClass.ERV, TailClass.IRV, TailClass.D, TailClass.S, TailClass.SSTAR}


@dataclass(frozen=True, eq=False)
class TailFunction:
    """A non-increasing tail G(x) = P(Z > x) on [0, inf).

    Scaled copies keep a reference to the unscaled tail in ``base`` and the
    multiplier in ``factor``; ratio constants between tails sharing a root
    are then exact.
    """

    name: str
    evaluate_fn: Callable[[np.ndarray], np.ndarray]
    quantile_fn: Callable[[np.ndarray], np.ndarray]
    support_floor: float = 0.0
    declared_class: Optional[TailClass] = None
    declared_alpha: Optional[float] = None
    log_evaluate_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None
    alpha_plus: Optional[float] = None
    alpha_minus: Optional[float] = None
    log_moment_finite: Optional[bool] = None
    base: Optional["TailFunction"] = None
    factor: float = 1.0
    improper: bool = False
    params: dict = field(default_factory=dict, compare=False)

    def evaluate(self, x):
        """G(x), elementwise; scalars in, scalars out."""
        arr = np.asarray(x, dtype=float)
        out = np.asarray(self.evaluate_fn(np.atleast_1d(arr)), dtype=float)
        return float(out[0]) if arr.ndim == 0 else out.reshape(arr.shape)

    def log_evaluate(self, x):
        """log G(x) without underflow where the family has a closed form."""
        arr = np.asarray(x, dtype=float)
        flat = np.atleast_1d(arr)
        if self.log_evaluate_fn is not None:
            out = np.asarray(self.log_evaluate_fn(flat), dtype=float)
        else:
            with np.errstate(divide="ignore"):
                out = np.log(np.asarray(self.evaluate_fn(flat), dtype=float))
        return float(out[0]) if arr.ndim == 0 else out.reshape(arr.shape)

    def quantile(self, u):
        """inf{x >= 0 : G(x) <= u} for u in (0, 1]."""
        arr = np.asarray(u, dtype=float)
        out = np.asarray(self.quantile_fn(np.atleast_1d(arr)), dtype=float)
        return float(out[0]) if arr.ndim == 0 else out.reshape(arr.shape)

    @property
    def root(self) -> "TailFunction":
        """The unscaled tail at the bottom of the ``base`` chain."""
        node = self
        while node.base is not None:
            node = node.base
        return node

    @property
    def total_factor(self) -> float:
        """Product of scale factors down to ``root``."""
        node, f = self, 1.0
        while node.base is not None:
            f *= node.factor
            node = node.base
        return f

    @property
    def is_light(self) -> bool:
        return self.declared_class == TailClass.LIGHTTAIL

    @property
    def is_heavy(self) -> bool:
        return self.declared_class in HEAVY_CLASSES


def _numeric_quantile(evaluate: Callable[[np.ndarray], np.ndarray]) -> Callable[[np.ndarray], np.ndarray]:
    """Quantile by bracketing and bisection, for tails without a closed form."""

    def quantile(u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        lo = np.zeros_like(u)
        hi = np.ones_like(u)
        for _ in range(1100):
            need = evaluate(hi) > u
            if not need.any():
                break
            hi = np.where(need, hi * 2.0, hi)
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            above = evaluate(mid) > u
            lo = np.where(above, mid, lo)
            hi = np.where(above, hi, mid)
        return np.where(u >= 1.0, 0.0, hi)

    return quantile


def make_pareto(alpha: float, floor: float = 1.0) -> TailFunction:
    """Pareto tail G(x) = min(1, (x/floor)^-alpha), regularly varying with index alpha.

    Args:
        alpha: tail index, > 0
        floor: scale, >= 1

    Raises:
        InvalidParameterException: alpha <= 0 or floor < 1
    """
    if not (alpha > 0.0 and math.isfinite(alpha)):
        raise InvalidParameterException(f"Pareto alpha must be positive, got {alpha}")
    if not (floor >= 1.0 and math.isfinite(floor)):
        raise InvalidParameterException(f"Pareto floor must be >= 1, got {floor}")

    def log_evaluate(x: np.ndarray) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.where(x <= floor, 0.0, -alpha * np.log(np.maximum(x, floor) / floor))

    def evaluate(x: np.ndarray) -> np.ndarray:
        return np.exp(log_evaluate(x))

    def quantile(u: np.ndarray) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.where(u >= 1.0, 0.0, floor * np.power(np.minimum(u, 1.0), -1.0 / alpha))

    return TailFunction(
        name=f"pareto(alpha={alpha:g},floor={floor:g})",
        evaluate_fn=evaluate,
        quantile_fn=quantile,
        support_floor=floor,
        declared_class=TailClass.RV,
        declared_alpha=alpha,
        log_evaluate_fn=log_evaluate,
        alpha_plus=alpha,
        alpha_minus=alpha,
        log_moment_finite=True,
        params={"kind": "pareto", "alpha": alpha, "floor": floor},
    )


def make_erv_cycle(c: float, a1: float, a2: float) -> TailFunction:
    """Cyclic tail in ERV but not RV.

    With t_1 = 1, g(t_1) = 1 and u_n = c t_n, t_{n+1} = c u_n the tail decays
    like t^-a1 on (t_n, u_n] and like t^-a2 on (u_n, t_{n+1}]. Below 1 the
    tail is 1.

    Raises:
        InvalidParameterException: unless c > 1 and 1 < a1 < a2
    """
    if not c > 1.0:
        raise InvalidParameterException(f"cycle ratio c must be > 1, got {c}")
    if not 1.0 < a1 < a2:
        raise InvalidParameterException(f"need 1 < a1 < a2, got a1={a1}, a2={a2}")
    log_c = math.log(c)
    depth = a1 + a2  # log_c drop over one full cycle

    def log_evaluate(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        level = np.log(np.maximum(x, 1.0)) / log_c
        n = np.floor(level / 2.0)
        r = level - 2.0 * n
        drop = n * depth + a1 * np.minimum(r, 1.0) + a2 * np.maximum(r - 1.0, 0.0)
        return np.where(x <= 1.0, 0.0, -drop * log_c)

    def evaluate(x: np.ndarray) -> np.ndarray:
        return np.exp(log_evaluate(x))

    def quantile(u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        with np.errstate(divide="ignore"):
            v = -np.log(np.minimum(u, 1.0)) / log_c
        n = np.floor(v / depth)
        rem = v - n * depth
        r = np.where(rem <= a1, rem / a1, 1.0 + (rem - a1) / a2)
        with np.errstate(over="ignore"):
            t = np.power(c, 2.0 * n + r)
        return np.where(u >= 1.0, 0.0, t)

    return TailFunction(
        name=f"erv_cycle(c={c:g},a1={a1:g},a2={a2:g})",
        evaluate_fn=evaluate,
        quantile_fn=quantile,
        support_floor=1.0,
        declared_class=TailClass.ERV,
        log_evaluate_fn=log_evaluate,
        alpha_plus=a1,
        alpha_minus=a2,
        log_moment_finite=True,
        params={"kind": "erv_cycle", "c": c, "a1": a1, "a2": a2},
    )


def make_exponential(rate: float = 1.0) -> TailFunction:
    """Light tail exp(-rate x)."""
    if not rate > 0.0:
        raise InvalidParameterException(f"exponential rate must be positive, got {rate}")

    def log_evaluate(x: np.ndarray) -> np.ndarray:
        return -rate * np.maximum(x, 0.0)

    def quantile(u: np.ndarray) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.where(u >= 1.0, 0.0, -np.log(np.minimum(u, 1.0)) / rate)

    return TailFunction(
        name=f"exponential(rate={rate:g})",
        evaluate_fn=lambda x: np.exp(log_evaluate(x)),
        quantile_fn=quantile,
        declared_class=TailClass.LIGHTTAIL,
        log_evaluate_fn=log_evaluate,
        log_moment_finite=True,
        params={"kind": "exponential", "rate": rate},
    )


def scale_tail(t: TailFunction, factor: float) -> TailFunction:
    """Capped multiple min(1, factor * G(x)); tail-equivalent up to the constant."""
    if not (factor > 0.0 and math.isfinite(factor)):
        raise InvalidParameterException(f"scale factor must be positive, got {factor}")
    log_factor = math.log(factor)

    def log_evaluate(x: np.ndarray) -> np.ndarray:
        return np.minimum(0.0, log_factor + t.log_evaluate(x))

    def quantile(u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        return np.where(u >= 1.0, 0.0, t.quantile(np.minimum(u / factor, 1.0)))

    return TailFunction(
        name=f"{factor:g}*{t.name}",
        evaluate_fn=lambda x: np.exp(log_evaluate(x)),
        quantile_fn=quantile,
        support_floor=t.support_floor,
        declared_class=t.declared_class,
        declared_alpha=t.declared_alpha,
        log_evaluate_fn=log_evaluate,
        alpha_plus=t.alpha_plus,
        alpha_minus=t.alpha_minus,
        log_moment_finite=t.log_moment_finite,
        base=t,
        factor=factor,
        params={"kind": "scaled", "factor": factor},
    )


def tail_from_callable(
    evaluate: Callable[[np.ndarray], np.ndarray],
    name: str = "user",
    declared_class: Optional[TailClass] = None,
    declared_alpha: Optional[float] = None,
    log_moment_finite: Optional[bool] = None,
) -> TailFunction:
    """Wrap a user-supplied vectorised tail; the quantile is found numerically."""
    return TailFunction(
        name=name,
        evaluate_fn=evaluate,
        quantile_fn=_numeric_quantile(evaluate),
        declared_class=declared_class,
        declared_alpha=declared_alpha,
        log_moment_finite=log_moment_finite,
        params={"kind": "user"},
    )


def check_monotone(t: TailFunction, x_grid: np.ndarray) -> bool:
    """True if G is non-increasing on the grid (exact comparison)."""
    values = t.evaluate(np.asarray(x_grid, dtype=float))
    return bool(np.all(np.diff(values) <= 0.0))


# ---------------------------------------------------------------------------
# integer-valued distributions
# ---------------------------------------------------------------------------


class DiscreteDist(ABC):
    """Distribution on the non-negative integers.

    Subclasses provide pmf and tail on integer arrays, moments, and an
    inversion sampler ``inverse_tail`` returning min{n : P(Z > n) < u}.
    """

    kind = "abstract"
    tail_function: Optional[TailFunction] = None

    @abstractmethod
    def _pmf(self, n: np.ndarray) -> np.ndarray: ...

    @abstractmethod
    def _tail(self, n: np.ndarray) -> np.ndarray: ...

    @abstractmethod
    def inverse_tail(self, u: np.ndarray) -> np.ndarray: ...

    @property
    @abstractmethod
    def mean(self) -> float: ...

    @property
    @abstractmethod
    def variance(self) -> float: ...

    @property
    def is_light(self) -> bool:
        """Tail decays at least exponentially."""
        return True

    @property
    def log_moment_finite(self) -> Optional[bool]:
        return True if math.isfinite(self.mean) else None

    def reference_parts(self) -> Optional[list[tuple[TailFunction, float]]]:
        """Heavy tail components as (root tail, factor); [] if light, None if unknown."""
        return [] if self.is_light else None

    def pmf(self, n):
        arr = np.asarray(n)
        out = self._pmf(np.atleast_1d(arr).astype(np.int64))
        return float(out[0]) if arr.ndim == 0 else out.reshape(arr.shape)

    def tail(self, n):
        arr = np.asarray(n)
        out = self._tail(np.atleast_1d(arr).astype(np.int64))
        return float(out[0]) if arr.ndim == 0 else out.reshape(arr.shape)

    def pmf_vector(self, N: int) -> np.ndarray:
        """pmf on {0..N}."""
        return np.asarray(self._pmf(np.arange(N + 1, dtype=np.int64)), dtype=float)

    def tail_vector(self, N: int) -> np.ndarray:
        """P(Z > n) on {0..N}."""
        return np.asarray(self._tail(np.arange(N + 1, dtype=np.int64)), dtype=float)

    @property
    def prob_zero(self) -> float:
        return float(self._pmf(np.zeros(1, dtype=np.int64))[0])

    def sample(self, rng: np.random.Generator, size=None):
        """Inversion sample; U is drawn on (0, 1]."""
        u = 1.0 - rng.random(size)
        out = self.inverse_tail(np.atleast_1d(u))
        return int(out[0]) if size is None else out.reshape(np.shape(u))

    def sum_iid(self, counts: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        """For each count k, the sum of k iid draws. Exact, no moment matching."""
        counts = np.asarray(counts, dtype=np.int64)
        out = np.zeros(counts.shape, dtype=np.int64)
        flat_counts = counts.ravel()
        flat_out = out.ravel()
        start = 0
        while start < flat_counts.size:
            # group consecutive entries until the chunk budget is reached
            csum = np.cumsum(flat_counts[start:])
            stop = start + int(np.searchsorted(csum, _SUM_CHUNK, side="right"))
            if stop == start:
                # a single huge count: draw it in pieces
                k = int(flat_counts[start])
                acc = 0
                while k > 0:
                    m = min(k, _SUM_CHUNK)
                    acc += int(self.sample(rng, m).sum())
                    k -= m
                flat_out[start] = acc
                start += 1
                continue
            block = flat_counts[start:stop]
            total = int(block.sum())
            if total:
                draws = self.sample(rng, total)
                owner = np.repeat(np.arange(block.size), block)
                flat_out[start:stop] = np.bincount(owner, weights=draws, minlength=block.size).astype(np.int64)
            start = stop
        return out

    def _tail_interp(self, x: np.ndarray) -> np.ndarray:
        """Tail interpolated linearly between integers; the trapezoid rule is exact on it."""
        x = np.asarray(x, dtype=float)
        lo = np.floor(x)
        w = x - lo
        lo = lo.astype(np.int64)
        return (1.0 - w) * self._tail(lo) + w * self._tail(lo + 1)

    def tail_sum_from(self, m: np.ndarray) -> tuple[np.ndarray, bool]:
        """sum_{n >= m} P(Z > n) per entry of m, and whether all sums converged.

        One lattice sum from the largest m; smaller starts add the exact
        terms in between.
        """
        m = np.atleast_1d(np.asarray(m, dtype=np.int64))
        lo, hi = int(m.min()), int(m.max())
        if hi - lo <= _SUM_CHUNK:
            res = lattice_tail_sum(self._tail_interp, hi)
            if not bool(res.converged[0]):
                return np.full(m.shape, np.inf), False
            seg = self._tail(np.arange(lo, hi, dtype=np.int64))
            suffix = np.concatenate([np.cumsum(seg[::-1])[::-1], [0.0]])
            return float(res.value[0]) + suffix[m - lo], True
        out = np.empty(m.shape)
        ok = True
        for i, start in enumerate(m):
            res = lattice_tail_sum(self._tail_interp, int(start))
            out[i] = float(res.value[0])
            if not bool(res.converged[0]):
                out[i] = np.inf
                ok = False
        return out, ok

    def as_tail_function(self) -> TailFunction:
        """x -> P(Z > x) on the reals (a step function)."""
        if self.tail_function is not None:
            return self.tail_function

        def evaluate(x: np.ndarray) -> np.ndarray:
            x = np.asarray(x, dtype=float)
            idx = np.floor(np.clip(x, 0.0, float(INT_LIMIT))).astype(np.int64)
            return np.where(x < 0.0, 1.0, self._tail(idx))

        return TailFunction(
            name=f"tail({self.kind})",
            evaluate_fn=evaluate,
            quantile_fn=_numeric_quantile(evaluate),
            declared_class=TailClass.LIGHTTAIL if self.is_light else None,
            log_moment_finite=self.log_moment_finite,
            params={"kind": "discrete", "source": self.kind},
        )

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.kind})"


class PointMass(DiscreteDist):
    kind = "point"

    def __init__(self, value: int = 0):
        if value < 0 or int(value) != value:
            raise InvalidParameterException(f"point mass needs a non-negative integer, got {value}")
        self.value = int(value)

    def _pmf(self, n):
        return (n == self.value).astype(float)

    def _tail(self, n):
        return (n < self.value).astype(float)

    def inverse_tail(self, u):
        return np.full(np.shape(u), self.value, dtype=np.int64)

    def sum_iid(self, counts, rng):
        return np.asarray(counts, dtype=np.int64) * self.value

    @property
    def mean(self):
        return float(self.value)

    @property
    def variance(self):
        return 0.0


class Bernoulli(DiscreteDist):
    kind = "bernoulli"

    def __init__(self, p: float):
        if not 0.0 <= p <= 1.0:
            raise InvalidParameterException(f"Bernoulli p must be in [0,1], got {p}")
        self.p = float(p)

    def _pmf(self, n):
        return np.where(n == 0, 1.0 - self.p, np.where(n == 1, self.p, 0.0))

    def _tail(self, n):
        return np.where(n < 0, 1.0, np.where(n == 0, self.p, 0.0))

    def inverse_tail(self, u):
        return (np.asarray(u) <= self.p).astype(np.int64)

    def sum_iid(self, counts, rng):
        return rng.binomial(np.asarray(counts, dtype=np.int64), self.p).astype(np.int64)

    @property
    def mean(self):
        return self.p

    @property
    def variance(self):
        return self.p * (1.0 - self.p)


class Geometric(DiscreteDist):
    """P(Z > n) = q^(n+1): failures before the first success of prob 1-q."""

    kind = "geometric"

    def __init__(self, q: float):
        if not 0.0 <= q < 1.0:
            raise InvalidParameterException(f"geometric q must be in [0,1), got {q}")
        self.q = float(q)

    def _pmf(self, n):
        return np.where(n < 0, 0.0, (1.0 - self.q) * np.power(self.q, np.maximum(n, 0)))

    def _tail(self, n):
        return np.where(n < 0, 1.0, np.power(self.q, np.maximum(n, 0) + 1.0))

    def inverse_tail(self, u):
        if self.q == 0.0:
            return np.zeros(np.shape(u), dtype=np.int64)
        return np.floor(np.log(np.asarray(u)) / math.log(self.q)).astype(np.int64)

    def sum_iid(self, counts, rng):
        counts = np.asarray(counts, dtype=np.int64)
        out = np.zeros(counts.shape, dtype=np.int64)
        live = counts > 0
        if self.q > 0.0 and live.any():
            out[live] = rng.negative_binomial(counts[live], 1.0 - self.q)
        return out

    def tail_sum_from(self, m):
        m = np.atleast_1d(np.asarray(m, dtype=np.int64))
        return np.power(self.q, np.maximum(m, 0) + 1.0) / (1.0 - self.q) + np.where(m < 0, -m, 0), True

    @property
    def mean(self):
        return self.q / (1.0 - self.q)

    @property
    def variance(self):
        return self.q / (1.0 - self.q) ** 2


class TableDist(DiscreteDist):
    """Finite-support distribution given by an explicit pmf list."""

    kind = "table"

    def __init__(self, pmf: Sequence[float]):
        p = np.asarray(pmf, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise InvalidParameterException("table pmf must be a non-empty list")
        if np.any(p < 0.0):
            raise InvalidParameterException("table pmf entries must be non-negative")
        if abs(p.sum() - 1.0) > 1e-9:
            raise InvalidParameterException(f"table pmf must sum to 1, got {p.sum():.12g}")
        self.p = p
        # tails from the right so deep tails keep their precision
        self.tails = np.concatenate([np.cumsum(p[::-1])[::-1][1:], [0.0]])

    def _pmf(self, n):
        inside = (n >= 0) & (n < self.p.size)
        return np.where(inside, self.p[np.clip(n, 0, self.p.size - 1)], 0.0)

    def _tail(self, n):
        return np.where(n < 0, 1.0, np.where(n < self.p.size, self.tails[np.clip(n, 0, self.p.size - 1)], 0.0))

    def inverse_tail(self, u):
        return np.searchsorted(-self.tails, -np.asarray(u), side="right").astype(np.int64)

    def tail_sum_from(self, m):
        m = np.atleast_1d(np.asarray(m, dtype=np.int64))
        suffix = np.concatenate([np.cumsum(self.tails[::-1])[::-1], [0.0]])
        return suffix[np.clip(m, 0, self.p.size)], True

    @property
    def mean(self):
        return float(np.dot(np.arange(self.p.size), self.p))

    @property
    def variance(self):
        k = np.arange(self.p.size)
        return float(np.dot(k * k, self.p) - self.mean**2)


class TailDiscreteDist(DiscreteDist):
    """Integer distribution with P(Z > n) = G(n) for a tail function G."""

    kind = "discretized"

    def __init__(self, t: TailFunction):
        self.tail_function = t
        root = t.root
        self._pareto = root.params.get("kind") == "pareto"

    def _tail(self, n):
        n = np.asarray(n)
        return np.where(n < 0, 1.0, self.tail_function.evaluate(np.maximum(n, 0).astype(float)))

    def _pmf(self, n):
        return np.maximum(self._tail(n - 1) - self._tail(n), 0.0)

    def inverse_tail(self, u):
        u = np.asarray(u, dtype=float)
        q = self.tail_function.quantile(u)
        if np.any(q >= INT_LIMIT):
            LOGGER.error(f"{self.tail_function.name}: sample beyond int64 range")
            raise StateOverflowException("sampled value exceeds the int64 state range")
        n = np.ceil(q).astype(np.int64)
        # repair float error at lattice points: want min{n : G(n) < u}
        lower = np.maximum(n - 1, 0)
        n = np.where((n >= 1) & (self._tail(lower) < u), lower, n)
        n = np.where(self._tail(n) < u, n, n + 1)
        return n

    @property
    def is_light(self):
        return self.tail_function.is_light

    @property
    def log_moment_finite(self):
        if self.tail_function.log_moment_finite is not None:
            return self.tail_function.log_moment_finite
        return super().log_moment_finite

    def reference_parts(self):
        if self.is_light:
            return []
        return [(self.tail_function.root, self.tail_function.total_factor)]

    def _tail_interp(self, x):
        return self.tail_function.evaluate(np.maximum(np.asarray(x, dtype=float), 0.0))

    def _pareto_pieces(self) -> tuple[float, float, float, int]:
        """alpha, floor, factor and the first n past the cap for a (scaled) Pareto."""
        root = self.tail_function.root
        alpha, floor = root.params["alpha"], root.params["floor"]
        k = self.tail_function.total_factor
        cap_end = floor * max(1.0, k) ** (1.0 / alpha)
        return alpha, floor, k, int(math.floor(cap_end)) + 1

    def tail_sum_from(self, m):
        m = np.atleast_1d(np.asarray(m, dtype=np.int64))
        if not self._pareto:
            return super().tail_sum_from(m)
        alpha, floor, k, n1 = self._pareto_pieces()
        if alpha <= 1.0:
            return np.full(m.shape, np.inf), False
        out = np.empty(m.shape)
        for i, start in enumerate(np.maximum(m, 0)):
            head_end = max(int(start), n1)
            head = float(np.sum(self._tail(np.arange(int(start), head_end)))) if head_end > start else 0.0
            out[i] = head + k * floor**alpha * float(zeta(alpha, head_end))
        return out, True

    @property
    def mean(self):
        total, ok = self.tail_sum_from(np.zeros(1, dtype=np.int64))
        if not ok:
            return math.inf
        return float(total[0])

    @property
    def variance(self):
        if self._pareto:
            alpha, floor, k, n1 = self._pareto_pieces()
            if alpha <= 2.0:
                return math.inf
            head_n = np.arange(n1)
            second = float(np.sum((2 * head_n + 1) * self._tail(head_n)))
            second += k * floor**alpha * (2.0 * float(zeta(alpha - 1.0, n1)) + float(zeta(alpha, n1)))
            return second - self.mean**2
        if not math.isfinite(self.mean):
            return math.inf
        res = lattice_tail_sum(lambda x: (2.0 * x + 1.0) * self._tail_interp(x), 0)
        if not bool(res.converged[0]):
            return math.inf
        return float(res.value[0]) - self.mean**2

    def __repr__(self):
        return f"TailDiscreteDist({self.tail_function.name})"


def truncated_convolve(a: np.ndarray, b: np.ndarray, N: int) -> np.ndarray:
    """Linear convolution truncated to {0..N}; FFT for long inputs."""
    if min(a.size, b.size) <= 1 or max(a.size, b.size) <= DIRECT_CONV_LIMIT:
        out = np.convolve(a, b)
    else:
        out = np.maximum(fftconvolve(a, b), 0.0)
    return out[: N + 1]


class ConvolvedDist(DiscreteDist):
    """Sum of independent components."""

    kind = "convolved"

    def __init__(self, components: Sequence[DiscreteDist]):
        if not components:
            raise InvalidParameterException("convolution needs at least one component")
        self.components = list(components)

    def _vectors(self, M: int) -> tuple[np.ndarray, np.ndarray]:
        """pmf and tail of the sum on {0..M}."""
        if M > MAX_CONV_LENGTH:
            raise InvalidParameterException(f"convolved tail requested at n={M}, beyond {MAX_CONV_LENGTH}")
        first = self.components[0]
        p, t = first.pmf_vector(M), first.tail_vector(M)
        for comp in self.components[1:]:
            t = truncated_convolve(p, comp.tail_vector(M), M) + t
            p = truncated_convolve(p, comp.pmf_vector(M), M)
        return p, t

    def _pmf(self, n):
        n = np.asarray(n)
        M = int(max(n.max(initial=0), 0))
        p, _ = self._vectors(M)
        return np.where(n < 0, 0.0, p[np.clip(n, 0, M)])

    def _tail(self, n):
        n = np.asarray(n)
        M = int(max(n.max(initial=0), 0))
        _, t = self._vectors(M)
        return np.where(n < 0, 1.0, t[np.clip(n, 0, M)])

    def pmf_vector(self, N):
        return self._vectors(N)[0]

    def tail_vector(self, N):
        return self._vectors(N)[1]

    def inverse_tail(self, u):
        """min{n : P(S > n) < u}, doubling the tail vector until it covers min(u)."""
        u = np.asarray(u, dtype=float)
        if u.size == 0:
            return np.zeros(u.shape, dtype=np.int64)
        floor = float(u.min())
        M = 64
        t = self.tail_vector(M)
        while t[-1] >= floor:
            M *= 2
            t = self.tail_vector(M)
        return np.searchsorted(-t, -u, side="right").astype(np.int64)

    def sample(self, rng, size=None):
        total = sum(np.asarray(c.sample(rng, size), dtype=np.int64) for c in self.components)
        return int(total) if size is None else total

    def sum_iid(self, counts, rng):
        return sum(c.sum_iid(counts, rng) for c in self.components)

    def tail_sum_from(self, m):
        # sum_{n >= m} P(S > n) = E S - sum_{n < m} P(S > n)
        m = np.atleast_1d(np.asarray(m, dtype=np.int64))
        mean = self.mean
        if not math.isfinite(mean):
            return np.full(m.shape, np.inf), False
        top = int(max(m.max(initial=0), 1))
        head = np.concatenate([[0.0], np.cumsum(self.tail_vector(top - 1))])
        return np.maximum(mean - head[np.clip(m, 0, top)], 0.0), True

    @property
    def is_light(self):
        return all(c.is_light for c in self.components)

    @property
    def log_moment_finite(self):
        flags = [c.log_moment_finite for c in self.components]
        if all(f is True for f in flags):
            return True
        if any(f is False for f in flags):
            return False
        return None

    def reference_parts(self):
        parts: list[tuple[TailFunction, float]] = []
        for c in self.components:
            sub = c.reference_parts()
            if sub is None:
                return None
            parts.extend(sub)
        return parts

    @property
    def mean(self):
        return float(sum(c.mean for c in self.components))

    @property
    def variance(self):
        return float(sum(c.variance for c in self.components))

    def __repr__(self):
        return f"ConvolvedDist({', '.join(repr(c) for c in self.components)})"


def discretize(t: TailFunction) -> DiscreteDist:
    """Integer distribution with P(Z > n) = G(n) on Z+.

    Raises:
        InvalidInputException: the tail does not vanish at infinity
    """
    far = t.evaluate(np.array([1e12, 1e300]))
    # a proper tail keeps decreasing between the two far points
    if t.improper or (far[1] > 0.0 and far[1] >= far[0] * (1.0 - 1e-9)):
        LOGGER.error(f"discretize: {t.name} does not vanish (G(1e300)={far[-1]:g})")
        raise InvalidInputException(f"tail {t.name} is improper")
    return TailDiscreteDist(t)


def sample(d: DiscreteDist, rng: np.random.Generator, size=None):
    """Draw from d by inversion of its tail."""
    return d.sample(rng, size)


def integrated_tail(d: DiscreteDist) -> TailFunction:
    """H_I(x) = min(1, sum_{n >= ceil(x)} P(Z > n)), the lattice integrated tail.

    A divergent tail sum gives a TailFunction flagged ``improper`` that
    evaluates to 1 everywhere.
    """
    total, ok = d.tail_sum_from(np.zeros(1, dtype=np.int64))
    if not ok or not math.isfinite(float(total[0])):
        LOGGER.warning(f"integrated_tail: tail sum of {d!r} diverges; flagged improper")
        return TailFunction(
            name=f"integrated({d.kind})",
            evaluate_fn=lambda x: np.ones(np.shape(x)),
            quantile_fn=lambda u: np.full(np.shape(u), np.inf),
            improper=True,
            params={"kind": "integrated"},
        )

    def evaluate(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        m = np.ceil(np.clip(x, 0.0, float(INT_LIMIT))).astype(np.int64)
        uniq, inv = np.unique(m, return_inverse=True)
        sums, _ = d.tail_sum_from(uniq)
        return np.minimum(1.0, sums[inv].reshape(x.shape))

    return TailFunction(
        name=f"integrated({d.kind})",
        evaluate_fn=evaluate,
        quantile_fn=_numeric_quantile(evaluate),
        declared_class=TailClass.LIGHTTAIL if d.is_light else None,
        log_moment_finite=True,
        params={"kind": "integrated", "total": float(total[0])},
    )


# ---------------------------------------------------------------------------
# finite-grid classifiers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RatioLimits:
    lower: float  # liminf estimate of G(yx)/G(x)
    upper: float  # limsup estimate
    y: float
    additive: bool = False


def grid_window(x_grid: np.ndarray, window: float, offset: int = 0) -> np.ndarray:
    """The last ``window`` fraction of the grid, shifted back ``offset`` windows."""
    x = np.asarray(x_grid, dtype=float)
    if x.ndim != 1 or x.size < 2 or np.any(np.diff(x) <= 0.0):
        raise InvalidParameterException("x_grid must be an increasing 1-D grid with >= 2 points")
    size = max(2, int(math.ceil(window * x.size)))
    stop = x.size - offset * size
    if stop < 2:
        raise InvalidParameterException("x_grid too short for the requested windows")
    return x[max(0, stop - size) : stop]


def log_tail_ratios(t: TailFunction, xs: np.ndarray, y: float, additive: bool) -> np.ndarray:
    top = t.log_evaluate(xs + y if additive else xs * y)
    bottom = t.log_evaluate(xs)
    bad = ~np.isfinite(top) | ~np.isfinite(bottom)
    if bad.any():
        where = float(xs[np.argmax(bad)])
        LOGGER.error(f"{t.name}: tail underflows on the grid at x={where:g}")
        raise GridUnderflowException(
            f"tail {t.name} underflows to 0 near x={where:g}; shrink the grid below that point"
        )
    return top - bottom


def classify_ratio_limits(
    t: TailFunction,
    y: float,
    x_grid,
    window: float = DEFAULT_WINDOW,
    additive: bool = False,
) -> RatioLimits:
    """liminf / limsup estimates of G(yx)/G(x) (or G(x+y)/G(x)) on the grid tail.

    The estimates are the min and max over the last ``window`` fraction of
    the grid.
    """
    if not additive and not y > 1.0:
        raise InvalidParameterException(f"ratio argument y must be > 1, got {y}")
    xs = grid_window(np.asarray(x_grid, dtype=float), window)
    lr = log_tail_ratios(t, xs, y, additive)
    return RatioLimits(lower=float(np.exp(lr.min())), upper=float(np.exp(lr.max())), y=y, additive=additive)


def karamata_upper_index(
    t: TailFunction,
    lambda_grid,
    x_grid,
    window: float = DEFAULT_WINDOW,
    drift_tol: float = 1.0,
) -> float:
    """Estimate of the Karamata upper index c+(G).

    For each lambda the limsup of G(lambda x)/G(x) is estimated on the grid
    window and turned into an exponent log(limsup)/log(lambda); the estimate
    is the sup over lambda. If the estimate keeps falling between the last
    two windows (lighter than any power) the sentinel -inf is returned.
    """
    lambdas = np.asarray([lam for lam in np.atleast_1d(lambda_grid) if lam > 1.0], dtype=float)
    if lambdas.size == 0:
        raise InvalidParameterException("lambda_grid needs at least one value > 1")
    if t.is_light:
        return -math.inf

    def estimate(offset: int) -> float:
        xs = grid_window(np.asarray(x_grid, dtype=float), window, offset)
        return max(float(log_tail_ratios(t, xs, lam, False).max()) / math.log(lam) for lam in lambdas)

    last = estimate(0)
    try:
        previous = estimate(1)
    except InvalidParameterException:
        return last
    if last < previous - drift_tol:
        LOGGER.info(f"{t.name}: index estimate drifts {previous:.3g} -> {last:.3g}; lighter than any power")
        return -math.inf
    return last


@dataclass(frozen=True)
class SubexponentialCheck:
    points: np.ndarray
    ratios: np.ndarray  # P(Z1+Z2 > n) / (2 P(Z > n))
    passed: bool


def subexponential_check(d: DiscreteDist, points, tol: float = 0.25) -> SubexponentialCheck:
    """Spot-check P(Z1 + Z2 > n) ~ 2 P(Z > n) by truncated self-convolution.

    Only a finite-range heuristic: passing is consistent with subexponentiality,
    never a proof.
    """
    pts = np.unique(np.asarray(points, dtype=np.int64))
    pts = pts[pts >= 0]
    if pts.size == 0:
        raise InvalidParameterException("subexponential_check needs non-negative points")
    M = int(pts.max())
    p, t = d.pmf_vector(M), d.tail_vector(M)
    twofold = truncated_convolve(p, t, M) + t
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = twofold[pts] / (2.0 * t[pts])
    far = ratios[-max(1, pts.size // 4) :]
    passed = bool(np.all(np.isfinite(far)) and np.all(np.abs(far - 1.0) <= tol))
    return SubexponentialCheck(points=pts, ratios=ratios, passed=passed)


@dataclass(frozen=True)
class ClassReport:
    name: str
    long_tailed: bool
    dominated: bool
    intermediate: bool
    extended: bool
    regular: bool
    subexponential: Optional[bool]
    alpha_plus: float
    alpha_minus: float
    ratio_limits: dict
    declared_class: Optional[TailClass]
    consistent: bool


# y values for the multiplicative tests
ENVELOPE_YS = (1.25, 2.0, 4.0)
IRV_YS = (1.1, 1.01, 1.001)


def classify(
    t: TailFunction,
    x_grid,
    window: float = DEFAULT_WINDOW,
    lt_tol: float = 0.01,
    irv_tol: float = 0.01,
    rv_tol: float = 1e-3,
    d_floor: float = 1e-8,
    subexp_points=None,
) -> ClassReport:
    """Run the finite-grid class tests on a tail.

    Long tail: G(x+1)/G(x) near 1. Dominated variation: liminf G(2x)/G(x)
    bounded away from 0 and not collapsing between windows. IRV: liminf at
    y -> 1 approaches 1. ERV: a positive power envelope on both sides. RV:
    liminf = limsup for every y tested. The declared class must be consistent
    with the class order RV in ERV in IRV in L and D.
    """
    x = np.asarray(x_grid, dtype=float)
    limits: dict = {}

    lt = classify_ratio_limits(t, 1.0, x, window, additive=True)
    limits["additive_1"] = (lt.lower, lt.upper)
    long_tailed = lt.lower >= 1.0 - lt_tol

    d_last = classify_ratio_limits(t, 2.0, x, window)
    try:
        xs_prev = grid_window(x, window, 1)
        d_prev = float(np.exp(log_tail_ratios(t, xs_prev, 2.0, False).min()))
    except InvalidParameterException:
        d_prev = d_last.lower
    dominated = d_last.lower > d_floor and d_last.lower >= 0.5 * d_prev

    irv_lowers = [classify_ratio_limits(t, y, x, window).lower for y in IRV_YS]
    for y, lo in zip(IRV_YS, irv_lowers):
        limits[f"y_{y:g}"] = (lo, None)
    intermediate = dominated and long_tailed and 1.0 - irv_lowers[-1] <= irv_tol

    a_plus, a_minus = math.inf, 0.0
    regular = True
    for y in ENVELOPE_YS:
        rl = classify_ratio_limits(t, y, x, window)
        limits[f"y_{y:g}"] = (rl.lower, rl.upper)
        a_plus = min(a_plus, -math.log(rl.upper) / math.log(y)) if rl.upper > 0 else a_plus
        a_minus = max(a_minus, -math.log(rl.lower) / math.log(y)) if rl.lower > 0 else math.inf
        regular = regular and (rl.upper - rl.lower) <= rv_tol
    extended = intermediate and 0.0 < a_plus and math.isfinite(a_minus)
    regular = regular and extended

    subexp = None
    if subexp_points is not None:
        subexp = subexponential_check(discretize(t), subexp_points).passed

    measured = {
        TailClass.RV: regular,
        TailClass.ERV: extended,
        TailClass.IRV: intermediate,
        TailClass.D: dominated,
        TailClass.L: long_tailed,
        TailClass.LIGHTTAIL: not dominated,
    }
    consistent = True
    if t.declared_class in measured:
        consistent = measured[t.declared_class]
    # class order: each pass implies the next
    consistent = consistent and (not regular or extended) and (not extended or intermediate)
    consistent = consistent and (not intermediate or (dominated and long_tailed))

    LOGGER.info(
        f"classify {t.name}: L={long_tailed} D={dominated} IRV={intermediate} "
        f"ERV={extended} RV={regular} S={subexp}"
    )
    return ClassReport(
        name=t.name,
        long_tailed=long_tailed,
        dominated=dominated,
        intermediate=intermediate,
        extended=extended,
        regular=regular,
        subexponential=subexp,
        alpha_plus=a_plus,
        alpha_minus=a_minus,
        ratio_limits=limits,
        declared_class=t.declared_class,
        consistent=consistent,
    )
