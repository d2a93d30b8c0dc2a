"""Monte Carlo engines and tail estimators.

Replications run in fixed-size blocks. Every block draws from its own
generator keyed by (seed, stream, block), and blocks are merged in block
order, so results depend on the seed and the config but never on the number
of workers. Within a block the replications are advanced together as numpy
arrays; offspring sums are exact sums of iid draws.

(C) 2025 Stephen Jenkins
"""

# std libraries
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Literal, Optional

# external libraries
import numpy as np
from scipy.stats import ks_2samp, norm

# personal libraries
from tails.asymptotics import SecondOrderModel
from tails.dist import INT_LIMIT, ConvolvedDist, DiscreteDist, TailFunction
from tails.exceptions import (
    EmptySampleException,
    InvalidDriftException,
    InvalidParameterException,
    StabilityException,
    StateOverflowException,
    SubcriticalityException,
)
from tails.model import FixedPointModel, QueueModel, queue_components
from utils.rng import block_generator, block_sizes
from utils.time import Stopwatch

LOGGER = logging.getLogger(__name__)

BURN_IN_EPS = 1e-6
SHALLOW_HITS = 50
CI_LEVEL = 0.95


@dataclass(frozen=True)
class SimConfig:
    """Simulation plan.

    ``burn_in`` None means ceil(log(1e-6) / log(rate)) for the contraction
    rate of the simulated mean recursion. With ``record`` = "final" each
    replication returns its state after burn_in + chain_length steps; with
    "trajectory" it returns every ``thin``-th post-burn-in state.
    """

    replications: int = 100_000
    burn_in: Optional[int] = None
    chain_length: int = 1
    seed: int = 0
    workers: int = 1
    block_size: int = 65_536
    record: Literal["final", "trajectory"] = "final"
    thin: int = 1
    hybrid: bool = False
    hybrid_threshold: int = 256

    def __post_init__(self):
        if self.replications < 1:
            raise InvalidParameterException(f"replications must be >= 1, got {self.replications}")
        if self.burn_in is not None and self.burn_in < 0:
            raise InvalidParameterException(f"burn_in must be >= 0, got {self.burn_in}")
        if self.chain_length < 1:
            raise InvalidParameterException(f"chain_length must be >= 1, got {self.chain_length}")
        if self.workers < 1 or self.block_size < 1 or self.thin < 1:
            raise InvalidParameterException("workers, block_size and thin must be >= 1")
        if self.record not in ("final", "trajectory"):
            raise InvalidParameterException(f"record must be 'final' or 'trajectory', got {self.record!r}")


def default_burn_in(rate: float, eps: float = BURN_IN_EPS) -> int:
    """Steps for the mean recursion to come within eps of its limit."""
    if rate <= 0.0:
        return 1
    if rate >= 1.0:
        raise StabilityException(f"contraction rate {rate:.6g} is not below 1")
    return max(1, math.ceil(math.log(eps) / math.log(rate)))


@dataclass(frozen=True)
class SimResult:
    samples: np.ndarray
    burn_in: int
    replications: int
    per_replication: int
    seed: int
    elapsed: float
    warnings: tuple = ()
    diagnostics: dict = field(default_factory=dict)


def _run_blocks(cfg: SimConfig, stream: str, block_fn: Callable[[np.random.Generator, int], np.ndarray]) -> list:
    """Run block_fn(rng, count) over all blocks, results in block order."""
    blocks = list(block_sizes(cfg.replications, cfg.block_size))

    def one(item):
        index, count = item
        return block_fn(block_generator(cfg.seed, stream, index), count)

    if cfg.workers == 1 or len(blocks) == 1:
        return [one(item) for item in blocks]
    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        return list(pool.map(one, blocks))


def _record_steps(cfg: SimConfig, burn_in: int) -> tuple[int, list[int]]:
    """Total steps and the (1-based) steps whose states are kept."""
    total = burn_in + cfg.chain_length
    if cfg.record == "final":
        return total, [total]
    return total, list(range(burn_in + cfg.thin, total + 1, cfg.thin))


def _check_overflow(x: np.ndarray, step: int):
    if x.size and (int(x.max()) > INT_LIMIT or int(x.min()) < 0):
        LOGGER.error(f"state overflow at step {step}")
        raise StateOverflowException(f"population left the int64 range at step {step}")


def offspring_sum(d: DiscreteDist, counts: np.ndarray, rng: np.random.Generator, cfg: SimConfig) -> np.ndarray:
    """Sum of counts[i] iid draws of d; exact unless the biased hybrid mode is on.

    Hybrid mode, for counts above the threshold: the maximum of the draws is
    sampled exactly by inversion of F^k and the other k - 1 draws are replaced
    by a normal with matched mean and variance.
    """
    if not cfg.hybrid or isinstance(d, ConvolvedDist) or not math.isfinite(d.variance):
        return d.sum_iid(counts, rng)
    counts = np.asarray(counts, dtype=np.int64)
    big = counts > cfg.hybrid_threshold
    out = np.zeros(counts.shape, dtype=np.int64)
    out[~big] = d.sum_iid(counts[~big], rng)
    if big.any():
        k = counts[big].astype(float)
        u = -np.expm1(np.log(1.0 - rng.random(k.size)) / k)
        top = d.inverse_tail(np.maximum(u, np.finfo(float).tiny))
        bulk = rng.normal((k - 1.0) * d.mean, np.sqrt((k - 1.0) * d.variance))
        out[big] = top + np.maximum(np.rint(bulk), 0.0).astype(np.int64)
    return out


def _hybrid_warning(cfg: SimConfig) -> list[str]:
    if cfg.hybrid:
        LOGGER.warning("hybrid offspring sums are biased; use for diagnostics only")
        return ["hybrid offspring sums: biased, diagnostics only"]
    return []


def _trajectory_warning(cfg: SimConfig) -> list[str]:
    if cfg.record == "trajectory":
        LOGGER.warning("trajectory mode: samples are autocorrelated and intervals are not widened")
        return ["trajectory samples are autocorrelated; intervals are not widened"]
    return []


def simulate_chain(m: FixedPointModel, cfg: SimConfig) -> SimResult:
    """Run X_n = A_n + sum_{i<=X_{n-1}} B_{i,n} from X_0 = 0."""
    if not m.b < 1.0:
        raise StabilityException(f"chain needs b < 1, got {m.b}")
    burn_in = cfg.burn_in if cfg.burn_in is not None else default_burn_in(m.b)
    total, keep = _record_steps(cfg, burn_in)
    keep_set = set(keep)
    warnings = _hybrid_warning(cfg) + _trajectory_warning(cfg)

    def block(rng: np.random.Generator, count: int) -> np.ndarray:
        x = np.zeros(count, dtype=np.int64)
        rows = []
        for step in range(1, total + 1):
            x = np.asarray(m.A.sample(rng, count), dtype=np.int64) + offspring_sum(m.B, x, rng, cfg)
            _check_overflow(x, step)
            if step in keep_set:
                rows.append(x)
        return np.stack(rows, axis=1).ravel()

    LOGGER.debug(f"simulate_chain: {cfg.replications} replications, burn_in={burn_in}, steps={total}")
    with Stopwatch() as watch:
        samples = np.concatenate(_run_blocks(cfg, "chain", block))
    LOGGER.info(f"simulate_chain: {samples.size} samples in {watch.elapsed:.2f}s")
    return SimResult(samples, burn_in, cfg.replications, len(keep), cfg.seed, watch.elapsed, tuple(warnings))


@dataclass(frozen=True)
class ContinuousDist:
    """Real-valued law for the compound-Poisson model: point, exponential or pareto."""

    kind: Literal["point", "exponential", "pareto"]
    value: float = 0.0
    rate: float = 1.0
    alpha: float = 2.0
    floor: float = 1.0

    def __post_init__(self):
        if self.kind not in ("point", "exponential", "pareto"):
            raise InvalidParameterException(f"unknown continuous kind {self.kind!r}")
        if self.kind == "point" and self.value < 0.0:
            raise InvalidParameterException("point value must be >= 0")
        if self.kind == "exponential" and not self.rate > 0.0:
            raise InvalidParameterException("exponential rate must be > 0")
        if self.kind == "pareto" and not (self.alpha > 0.0 and self.floor > 0.0):
            raise InvalidParameterException("pareto needs alpha > 0 and floor > 0")

    @property
    def mean(self) -> float:
        if self.kind == "point":
            return self.value
        if self.kind == "exponential":
            return 1.0 / self.rate
        return math.inf if self.alpha <= 1.0 else self.alpha * self.floor / (self.alpha - 1.0)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.kind == "point":
            return np.full(size, self.value)
        if self.kind == "exponential":
            return rng.exponential(1.0 / self.rate, size)
        return self.floor * np.power(1.0 - rng.random(size), -1.0 / self.alpha)

    def sum_iid(self, counts: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        counts = np.asarray(counts, dtype=np.int64)
        if self.kind == "point":
            return counts * self.value
        out = np.zeros(counts.shape)
        live = counts > 0
        if not live.any():
            return out
        if self.kind == "exponential":
            out[live] = rng.gamma(counts[live], 1.0 / self.rate)
            return out
        draws = self.sample(rng, int(counts.sum()))
        owner = np.repeat(np.arange(counts.size), counts)
        return np.bincount(owner, weights=draws, minlength=counts.size)


def simulate_continuous(
    a_dist: ContinuousDist,
    lam: float,
    b_dist: ContinuousDist,
    cfg: SimConfig,
) -> SimResult:
    """Iterate X_n = A_n + sum_{i <= N_n} B_i with N_n ~ Poisson(lam X_{n-1}).

    Existence of a stationary solution is not asserted; the result carries the
    mean at mid burn-in and at the end, and warns when they differ by more
    than three standard errors.
    """
    if not lam > 0.0:
        raise InvalidParameterException(f"Poisson intensity must be > 0, got {lam}")
    rate = lam * b_dist.mean
    if not rate < 1.0:
        raise StabilityException(f"continuous model needs lambda E(B) < 1, got {rate:.6g}")
    if not math.isfinite(a_dist.mean):
        raise InvalidParameterException("continuous model needs a finite mean of A")
    burn_in = cfg.burn_in if cfg.burn_in is not None else default_burn_in(rate)
    total, keep = _record_steps(cfg, burn_in)
    keep_set = set(keep)
    checkpoint = max(1, burn_in // 2)

    def block(rng: np.random.Generator, count: int) -> tuple[np.ndarray, np.ndarray]:
        x = np.zeros(count)
        rows, mid = [], None
        for step in range(1, total + 1):
            n = rng.poisson(lam * x)
            x = a_dist.sample(rng, count) + b_dist.sum_iid(n, rng)
            if step == checkpoint:
                mid = x.copy()
            if step in keep_set:
                rows.append(x)
        return np.stack(rows, axis=1).ravel(), mid

    with Stopwatch() as watch:
        parts = _run_blocks(cfg, "continuous", block)
    samples = np.concatenate([p[0] for p in parts])
    mid = np.concatenate([p[1] for p in parts])
    mid_mean, mid_err = mean_with_error(mid)
    end_mean, end_err = mean_with_error(samples)
    gap = abs(end_mean - mid_mean)
    stabilised = gap <= 3.0 * math.hypot(mid_err, end_err) or gap <= 1e-12 * max(1.0, abs(end_mean))
    warnings = _trajectory_warning(cfg)
    if not stabilised:
        LOGGER.warning(f"simulate_continuous: mean moved {mid_mean:.5g} -> {end_mean:.5g} after mid burn-in")
        warnings.append("continuous chain has not stabilised")
    LOGGER.info(f"simulate_continuous: {samples.size} samples in {watch.elapsed:.2f}s")
    return SimResult(
        samples,
        burn_in,
        cfg.replications,
        len(keep),
        cfg.seed,
        watch.elapsed,
        tuple(warnings),
        {"checkpoint": checkpoint, "checkpoint_mean": mid_mean, "final_mean": end_mean, "stabilised": stabilised},
    )


@dataclass(frozen=True)
class SecondOrderResult:
    x: np.ndarray  # X_n
    y: np.ndarray  # X_{n-1}
    combination: np.ndarray  # X_n + delta X_{n-1}
    delta: float
    burn_in: int
    elapsed: float
    warnings: tuple = ()


def simulate_second_order(m2: SecondOrderModel, cfg: SimConfig) -> SecondOrderResult:
    """Two-lag recursion from X_0 = X_{-1} = 0; keeps (X_n, X_{n-1}) pairs."""
    if not m2.b1 + m2.b2 < 1.0:
        raise StabilityException(f"second-order model needs b1 + b2 < 1, got {m2.b1 + m2.b2:.6g}")
    burn_in = cfg.burn_in if cfg.burn_in is not None else default_burn_in(m2.rate)
    total, keep = _record_steps(cfg, burn_in)
    keep_set = set(keep)
    warnings = _hybrid_warning(cfg) + _trajectory_warning(cfg)

    def block(rng: np.random.Generator, count: int) -> tuple[np.ndarray, np.ndarray]:
        prev2 = np.zeros(count, dtype=np.int64)
        prev = np.zeros(count, dtype=np.int64)
        xs, ys = [], []
        for step in range(1, total + 1):
            x = (
                np.asarray(m2.A.sample(rng, count), dtype=np.int64)
                + offspring_sum(m2.B1, prev, rng, cfg)
                + offspring_sum(m2.B2, prev2, rng, cfg)
            )
            _check_overflow(x, step)
            prev2, prev = prev, x
            if step in keep_set:
                xs.append(prev)
                ys.append(prev2)
        return np.stack(xs, axis=1).ravel(), np.stack(ys, axis=1).ravel()

    with Stopwatch() as watch:
        parts = _run_blocks(cfg, "second_order", block)
    x = np.concatenate([p[0] for p in parts])
    y = np.concatenate([p[1] for p in parts])
    LOGGER.info(f"simulate_second_order: {x.size} pairs in {watch.elapsed:.2f}s")
    return SecondOrderResult(x, y, x + m2.delta * y, m2.delta, burn_in, watch.elapsed, tuple(warnings))


def simulate_queue(q: QueueModel, cfg: SimConfig, mode: Literal["reduced", "direct"] = "reduced") -> SimResult:
    """Population seen by the tagged customer, Y = X + k.

    "reduced" simulates the mapped branching chain; "direct" tracks the
    customers: the k permanent ones always stay, each other one rejoins with
    probability p, and every customer served brings xi new ones.
    """
    if not q.load < 1.0:
        raise SubcriticalityException(f"queue is not subcritical: E(xi) + p = {q.load:.6g}")
    A, B = queue_components(q)
    b = B.mean
    if mode == "reduced":
        m = FixedPointModel(A=A, B=B, G=None, c1=0.0, c2=0.0, a=A.mean, b=b, case_label=None, D=None)
        res = simulate_chain(m, cfg)
        return SimResult(
            res.samples + q.k, res.burn_in, res.replications, res.per_replication, res.seed, res.elapsed, res.warnings
        )
    if mode != "direct":
        raise InvalidParameterException(f"queue mode must be 'reduced' or 'direct', got {mode!r}")

    burn_in = cfg.burn_in if cfg.burn_in is not None else default_burn_in(b)
    total, keep = _record_steps(cfg, burn_in)
    keep_set = set(keep)

    def block(rng: np.random.Generator, count: int) -> np.ndarray:
        y = np.full(count, q.k, dtype=np.int64)
        rows = []
        for step in range(1, total + 1):
            stay = rng.binomial(y - q.k, q.p).astype(np.int64)
            y = q.k + stay + q.xi.sum_iid(y, rng)
            _check_overflow(y, step)
            if step in keep_set:
                rows.append(y)
        return np.stack(rows, axis=1).ravel()

    with Stopwatch() as watch:
        samples = np.concatenate(_run_blocks(cfg, "queue_direct", block))
    LOGGER.info(f"simulate_queue(direct): {samples.size} samples in {watch.elapsed:.2f}s")
    return SimResult(
        samples, burn_in, cfg.replications, len(keep), cfg.seed, watch.elapsed, tuple(_trajectory_warning(cfg))
    )


# ---------------------------------------------------------------------------
# random walk maximum
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SigmaRule:
    """Stopping rule: a fixed number of steps, or first passage below -K capped at n_max."""

    kind: Literal["fixed", "first_passage"] = "fixed"
    n: int = 1
    K: float = 0.0
    n_max: int = 10_000

    def __post_init__(self):
        if self.kind == "fixed" and self.n < 1:
            raise InvalidParameterException(f"fixed sigma needs n >= 1, got {self.n}")
        if self.kind == "first_passage" and (self.K < 0.0 or self.n_max < 1):
            raise InvalidParameterException("first passage needs K >= 0 and n_max >= 1")
        if self.kind not in ("fixed", "first_passage"):
            raise InvalidParameterException(f"unknown sigma rule {self.kind!r}")

    @property
    def horizon(self) -> int:
        return self.n if self.kind == "fixed" else self.n_max


@dataclass(frozen=True)
class WalkMaxResult:
    grid: np.ndarray
    p_hat: np.ndarray
    reference: np.ndarray  # increment tail P(xi - shift > x)
    ratio: np.ndarray
    ci_low: np.ndarray
    ci_high: np.ndarray
    mean_sigma: float
    mean_sigma_error: float
    far_ratio: float
    truncated: int  # replications stopped by n_max
    elapsed: float


def random_walk_max_oracle(
    xi: DiscreteDist,
    drift_shift: float,
    sigma_rule: SigmaRule,
    grid,
    cfg: SimConfig,
) -> WalkMaxResult:
    """P(M_sigma > x) / P(xi - shift > x) on the grid, against E sigma.

    M_sigma = max(0, S_1, ..., S_sigma) for the walk with increments
    xi - drift_shift. The far ratio is the last grid point with at least
    SHALLOW_HITS exceedances.

    Raises:
        InvalidDriftException: E(xi) - drift_shift >= 0
    """
    drift = xi.mean - drift_shift
    if not drift < 0.0:
        raise InvalidDriftException(f"increments need negative mean, got {drift:.6g}")
    x = np.asarray(grid, dtype=float)

    def block(rng: np.random.Generator, count: int) -> tuple[np.ndarray, np.ndarray]:
        s = np.zeros(count)
        best = np.zeros(count)
        sigma = np.zeros(count, dtype=np.int64)
        alive = np.ones(count, dtype=bool)
        for _ in range(sigma_rule.horizon):
            idx = np.flatnonzero(alive)
            if idx.size == 0:
                break
            s[idx] += np.asarray(xi.sample(rng, idx.size), dtype=float) - drift_shift
            best[idx] = np.maximum(best[idx], s[idx])
            sigma[idx] += 1
            if sigma_rule.kind == "first_passage":
                alive[idx] = s[idx] >= -sigma_rule.K
        return best, sigma

    with Stopwatch() as watch:
        parts = _run_blocks(cfg, "walk_max", block)
    maxima = np.concatenate([p[0] for p in parts])
    sigma = np.concatenate([p[1] for p in parts])
    truncated = 0
    if sigma_rule.kind == "first_passage":
        truncated = int(np.sum(sigma >= sigma_rule.n_max))
        if truncated:
            LOGGER.warning(f"walkmax: {truncated} replications hit n_max={sigma_rule.n_max}")
    est = estimate_tail(maxima, x)
    reference = xi.tail(np.floor(x + drift_shift).astype(np.int64))
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = est.p_hat / reference
        lo, hi = est.ci_low / reference, est.ci_high / reference
    deep = np.flatnonzero(est.p_hat * est.n_effective >= SHALLOW_HITS)
    far = float(ratio[deep[-1]]) if deep.size else math.nan
    mean_sigma, sigma_err = mean_with_error(sigma)
    LOGGER.info(f"walkmax: E sigma={mean_sigma:.4g} far ratio={far:.4g} in {watch.elapsed:.2f}s")
    return WalkMaxResult(x, est.p_hat, reference, ratio, lo, hi, mean_sigma, sigma_err, far, truncated, watch.elapsed)


# ---------------------------------------------------------------------------
# estimators
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TailEstimate:
    grid: np.ndarray
    p_hat: np.ndarray
    ci_low: np.ndarray
    ci_high: np.ndarray
    n_effective: int
    counts: np.ndarray
    predicted: Optional[np.ndarray] = None
    warnings: tuple = ()

    @property
    def ratio(self) -> Optional[np.ndarray]:
        if self.predicted is None:
            return None
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.p_hat / self.predicted

    @property
    def std_error(self) -> np.ndarray:
        return np.sqrt(self.p_hat * (1.0 - self.p_hat) / self.n_effective)


def wilson_interval(hits: np.ndarray, n: int, level: float = CI_LEVEL) -> tuple[np.ndarray, np.ndarray]:
    """Wilson score interval for binomial proportions."""
    z = float(norm.ppf(0.5 + level / 2.0))
    p = hits / n
    denom = 1.0 + z * z / n
    centre = (p + z * z / (2.0 * n)) / denom
    half = z * np.sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)) / denom
    return np.clip(np.minimum(centre - half, p), 0.0, 1.0), np.clip(np.maximum(centre + half, p), 0.0, 1.0)


def estimate_tail(samples, grid, predicted=None, level: float = CI_LEVEL) -> TailEstimate:
    """Empirical P(X > x) on the grid with Wilson intervals.

    Raises:
        EmptySampleException: no samples
    """
    data = np.sort(np.asarray(samples).ravel())
    n = data.size
    if n == 0:
        raise EmptySampleException("estimate_tail needs at least one sample")
    x = np.asarray(grid, dtype=float)
    if x.ndim != 1 or np.any(np.diff(x) <= 0.0):
        raise InvalidParameterException("estimate grid must be increasing")
    hits = n - np.searchsorted(data, x, side="right")
    p_hat = hits / n
    low, high = wilson_interval(hits.astype(float), n, level)
    warnings = []
    shallow = x[hits < SHALLOW_HITS]
    if shallow.size:
        LOGGER.warning(f"estimate_tail: fewer than {SHALLOW_HITS} exceedances from x={shallow[0]:g} on")
        warnings.append(f"fewer than {SHALLOW_HITS} exceedances for x >= {shallow[0]:g}")
    pred = None if predicted is None else np.asarray(predicted, dtype=float)
    return TailEstimate(x, p_hat, low, high, n, hits, pred, tuple(warnings))


@dataclass(frozen=True)
class WindowEstimate:
    grid: np.ndarray
    ratio: np.ndarray  # P(x < X <= x/b) / G(x)
    hits: np.ndarray
    n: int


def window_estimate(samples, G: TailFunction, b: float, grid) -> WindowEstimate:
    """Empirical P(x < X <= x/b) / G(x)."""
    if not 0.0 < b < 1.0:
        raise InvalidParameterException(f"window estimate needs 0 < b < 1, got {b}")
    data = np.sort(np.asarray(samples).ravel())
    if data.size == 0:
        raise EmptySampleException("window_estimate needs at least one sample")
    x = np.asarray(grid, dtype=float)
    hits = np.searchsorted(data, x / b, side="right") - np.searchsorted(data, x, side="right")
    return WindowEstimate(x, hits / data.size / G.evaluate(x), hits, data.size)


def mean_with_error(samples) -> tuple[float, float]:
    """Sample mean and its standard error."""
    data = np.asarray(samples, dtype=float).ravel()
    if data.size == 0:
        raise EmptySampleException("mean of an empty sample")
    if data.size == 1:
        return float(data[0]), math.inf
    return float(data.mean()), float(data.std(ddof=1) / math.sqrt(data.size))


def empirical_pmf(samples, N: int) -> np.ndarray:
    """Relative frequencies on {0..N}; mass above N is dropped."""
    data = np.asarray(samples, dtype=np.int64).ravel()
    if data.size == 0:
        raise EmptySampleException("empirical pmf of an empty sample")
    counts = np.bincount(data[data <= N], minlength=N + 1)
    return counts / data.size


def total_variation(p, q) -> float:
    """0.5 sum |p - q| over the common support, shorter vector padded with zeros."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    size = max(p.size, q.size)
    p = np.pad(p, (0, size - p.size))
    q = np.pad(q, (0, size - q.size))
    return 0.5 * float(np.abs(p - q).sum()) + 0.5 * abs(float(1.0 - p.sum()) - float(1.0 - q.sum()))


@dataclass(frozen=True)
class KSResult:
    statistic: float
    critical: float
    pvalue: float
    passed: bool


def ks_check(first, second, alpha: float = 0.01) -> KSResult:
    """Two-sample Kolmogorov-Smirnov statistic against its asymptotic critical value."""
    a = np.asarray(first, dtype=float).ravel()
    b = np.asarray(second, dtype=float).ravel()
    if a.size == 0 or b.size == 0:
        raise EmptySampleException("ks_check needs two non-empty samples")
    res = ks_2samp(a, b)
    critical = math.sqrt(-math.log(alpha / 2.0) / 2.0) * math.sqrt((a.size + b.size) / (a.size * b.size))
    return KSResult(float(res.statistic), critical, float(res.pvalue), float(res.statistic) <= critical)
