"""Fixed-point model assembly.

Builds the model X = A + sum_{i=1}^X B_i from its immigration and offspring
laws, checks stability, estimates the tail ratio constants against a
reference tail and assigns the tail case. Also maps the feedback queue with
permanent customers onto the same form.

(C) 2025 Stephen Jenkins
"""

# std libraries
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

# external libraries
import numpy as np

# personal libraries
from tails.dist import (
    DEFAULT_WINDOW,
    Bernoulli,
    ConvolvedDist,
    DiscreteDist,
    TailDiscreteDist,
    TailFunction,
    log_tail_ratios,
    grid_window,
)
from tails.exceptions import (
    DegenerateModelException,
    InvalidParameterException,
    ModelInconsistencyException,
    NoReferenceTailException,
    StabilityException,
    SubcriticalityException,
)

LOGGER = logging.getLogger(__name__)

NEAR_CRITICAL = 0.95
# ratios below this on the whole window count as zero
ZERO_RATIO = 1e-12
DEFAULT_SPREAD = 1.05


class TailCase(str, Enum):
    """Which of A and B carry the reference tail."""

    BOTH_HEAVY = "i"
    OFFSPRING_ONLY = "ii"
    IMMIGRATION_ONLY = "iii"


class StabilityVerdict(str, Enum):
    STABLE = "stable"
    UNSTABLE = "unstable_b_ge_1"
    CRITICAL = "critical_excluded"
    LOG_MOMENT_INFINITE = "log_moment_infinite"
    LOG_MOMENT_UNDECIDED = "log_moment_undecided"


@dataclass(frozen=True)
class RatioEstimate:
    """Limit of P(Z > x)/G(x), exact or windowed."""

    value: float
    converged: bool
    spread: float  # window max/min; 1.0 when analytic
    analytic: bool


@dataclass(frozen=True)
class StabilityReport:
    b_value: float
    b_ok: bool
    log_moment_finite: Optional[bool]
    verdict: StabilityVerdict

    @property
    def stable(self) -> bool:
        return self.verdict == StabilityVerdict.STABLE


@dataclass(frozen=True, eq=False)
class FixedPointModel:
    """Immutable model; ``G`` is None for a light model without a tail case."""

    A: DiscreteDist
    B: DiscreteDist
    G: Optional[TailFunction]
    c1: float
    c2: float
    a: float
    b: float
    case_label: Optional[TailCase]
    D: Optional[float]
    c1_estimate: Optional[RatioEstimate] = None
    c2_estimate: Optional[RatioEstimate] = None
    warnings: tuple = ()

    @property
    def is_heavy(self) -> bool:
        return self.G is not None

    def summary(self) -> dict:
        return {
            "a": self.a,
            "b": self.b,
            "c1": self.c1,
            "c2": self.c2,
            "case": self.case_label.value if self.case_label else None,
            "D": self.D,
            "reference": self.G.name if self.G is not None else None,
            "warnings": list(self.warnings),
        }


@dataclass(frozen=True, eq=False)
class QueueModel:
    """Feedback queue with k permanent customers.

    Each service brings xi new customers; an ordinary customer rejoins with
    probability p.
    """

    k: int
    p: float
    xi: DiscreteDist

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise InvalidParameterException(f"queue needs k >= 1 permanent customers, got {self.k}")
        if not 0.0 <= self.p < 1.0:
            raise InvalidParameterException(f"feedback probability must be in [0,1), got {self.p}")

    @property
    def load(self) -> float:
        return self.xi.mean + self.p


def combine_constant(a: float, c: float) -> float:
    """a * c with a * c = 0 whenever c = 0, including a = inf."""
    return 0.0 if c == 0.0 else a * c


def coefficient_D(a: float, b: float, c1: float, c2: float) -> float:
    """((1-b) c1 + a c2) / (1-b)."""
    return ((1.0 - b) * c1 + combine_constant(a, c2)) / (1.0 - b)


# families whose params pin the tail down completely
_CLOSED_FORM_KINDS = ("pareto", "erv_cycle", "exponential")


def _same_root(first: TailFunction, second: TailFunction) -> bool:
    if first is second:
        return True
    return first.params.get("kind") in _CLOSED_FORM_KINDS and first.params == second.params


def _analytic_ratio(d: DiscreteDist, G: TailFunction) -> Optional[float]:
    """Exact ratio limit when d is built from scaled copies of G, or is light against a heavy G."""
    parts = d.reference_parts()
    if parts is None:
        return None
    if not parts:
        return 0.0 if G.is_heavy else None
    total = 0.0
    for root, factor in parts:
        if not _same_root(root, G.root):
            return None
        total += factor / G.total_factor
    return total


def estimate_ratio_constants(
    tail_num: TailFunction,
    G: TailFunction,
    x_grid,
    window: float = DEFAULT_WINDOW,
    spread: float = DEFAULT_SPREAD,
) -> RatioEstimate:
    """Windowed limit of tail_num(x)/G(x) on the far grid.

    The value is the ratio at the last grid point. ``converged`` is False when
    the window max/min exceeds ``spread``; the estimate is still returned.
    """
    xs = grid_window(np.asarray(x_grid, dtype=float), window)
    ref = G.log_evaluate(xs)
    if not np.all(np.isfinite(ref)):
        # reuse the underflow diagnostic of the ratio classifier
        log_tail_ratios(G, xs, 1.0, True)
    with np.errstate(divide="ignore"):
        ratios = np.exp(tail_num.log_evaluate(xs) - ref)
    if np.all(ratios < ZERO_RATIO):
        return RatioEstimate(value=0.0, converged=True, spread=1.0, analytic=False)
    lo, hi = float(ratios.min()), float(ratios.max())
    observed = hi / lo if lo > 0.0 else math.inf
    converged = observed <= spread
    if not converged:
        LOGGER.warning(
            f"ratio {tail_num.name} / {G.name} has not stabilised on the grid (max/min={observed:.4g} > {spread})"
        )
    return RatioEstimate(value=float(ratios[-1]), converged=converged, spread=observed, analytic=False)


def reference_ratio(
    d: DiscreteDist,
    G: TailFunction,
    x_grid=None,
    window: float = DEFAULT_WINDOW,
    spread: float = DEFAULT_SPREAD,
) -> RatioEstimate:
    """lim P(Z > x)/G(x) for an integer law, exact when possible."""
    exact = _analytic_ratio(d, G)
    if exact is not None:
        return RatioEstimate(value=exact, converged=True, spread=1.0, analytic=True)
    if x_grid is None:
        raise InvalidParameterException(f"no exact ratio for {d!r} against {G.name}; an x_grid is required")
    return estimate_ratio_constants(d.as_tail_function(), G, x_grid, window, spread)


def check_stability(A: DiscreteDist, B: DiscreteDist) -> StabilityReport:
    """Mean offspring below 1 and a finite log moment of A. Never raises for domain outcomes."""
    b = B.mean
    log_moment = A.log_moment_finite
    if b == 1.0:
        verdict = StabilityVerdict.CRITICAL
    elif not b < 1.0:
        verdict = StabilityVerdict.UNSTABLE
    elif log_moment is False:
        verdict = StabilityVerdict.LOG_MOMENT_INFINITE
    elif log_moment is None:
        verdict = StabilityVerdict.LOG_MOMENT_UNDECIDED
    else:
        verdict = StabilityVerdict.STABLE
    LOGGER.debug(f"check_stability: b={b:.6g} log_moment={log_moment} -> {verdict.value}")
    return StabilityReport(b_value=b, b_ok=b < 1.0, log_moment_finite=log_moment, verdict=verdict)


def _model_warnings(A: DiscreteDist, B: DiscreteDist) -> list[str]:
    """Sign conditions on the point masses at zero."""
    if A.prob_zero >= 1.0:
        LOGGER.error("immigration is identically zero; the solution is X = 0")
        raise DegenerateModelException("P(A=0) = 1: the model is degenerate (X = 0)")
    found = []
    if A.prob_zero <= 0.0:
        found.append("P(A=0) = 0: immigration never empty")
    if B.prob_zero >= 1.0:
        found.append("P(B=0) = 1: no offspring, X has the law of A")
    return found


def build_model(
    A: DiscreteDist,
    B: DiscreteDist,
    G: Optional[TailFunction],
    x_grid=None,
    window: float = DEFAULT_WINDOW,
    spread: float = DEFAULT_SPREAD,
) -> FixedPointModel:
    """Assemble a FixedPointModel.

    Args:
        A: immigration law
        B: offspring law
        G: reference tail, or None for a light model with no tail case
        x_grid: grid for windowed ratio estimates (not needed when exact)
        window: far-grid fraction for windowed estimates
        spread: max/min tolerance for windowed convergence

    Raises:
        DegenerateModelException: P(A=0) = 1
        StabilityException: b >= 1 or the log moment of A is infinite
        NoReferenceTailException: c1 = c2 = 0
        ModelInconsistencyException: B heavy while a = inf
    """
    warnings = _model_warnings(A, B)
    report = check_stability(A, B)
    if report.verdict in (StabilityVerdict.UNSTABLE, StabilityVerdict.CRITICAL, StabilityVerdict.LOG_MOMENT_INFINITE):
        LOGGER.error(f"build_model: unstable model, b={report.b_value:.6g} ({report.verdict.value})")
        raise StabilityException(f"model is not stable: b={report.b_value:.6g}, verdict {report.verdict.value}")
    if report.verdict == StabilityVerdict.LOG_MOMENT_UNDECIDED:
        warnings.append("log moment of A could not be decided from family metadata")
    b = report.b_value
    a = A.mean
    if b > NEAR_CRITICAL:
        LOGGER.warning(f"near-critical model b={b:.4f}: burn-in and solver iterations grow like 1/log(1/b)")
        warnings.append(f"near-critical b={b:.4f}")

    if G is None:
        LOGGER.info(f"build_model: light model a={a:.6g} b={b:.6g}")
        return FixedPointModel(A=A, B=B, G=None, c1=0.0, c2=0.0, a=a, b=b, case_label=None, D=None,
                               warnings=tuple(warnings))

    est1 = reference_ratio(A, G, x_grid, window, spread)
    est2 = reference_ratio(B, G, x_grid, window, spread)
    for label, est in (("c1", est1), ("c2", est2)):
        if not est.converged:
            warnings.append(f"{label} ratio has not stabilised (spread {est.spread:.4g})")
    c1, c2 = est1.value, est2.value

    if c1 == 0.0 and c2 == 0.0:
        LOGGER.error(f"build_model: neither A nor B is tail-equivalent to {G.name}")
        raise NoReferenceTailException(f"c1 = c2 = 0 against reference {G.name}")
    if c2 == 0.0:
        case = TailCase.IMMIGRATION_ONLY
    elif c1 == 0.0:
        case = TailCase.OFFSPRING_ONLY
    else:
        case = TailCase.BOTH_HEAVY
    if case != TailCase.IMMIGRATION_ONLY and not math.isfinite(a):
        LOGGER.error(f"build_model: case {case.value} with infinite immigration mean")
        raise ModelInconsistencyException(f"case ({case.value}) requires a finite mean of A, got a = inf")

    D = coefficient_D(a, b, c1, c2)
    LOGGER.info(f"build_model: case ({case.value}) a={a:.6g} b={b:.6g} c1={c1:.6g} c2={c2:.6g} D={D:.6g}")
    return FixedPointModel(
        A=A,
        B=B,
        G=G,
        c1=c1,
        c2=c2,
        a=a,
        b=b,
        case_label=case,
        D=D,
        c1_estimate=est1,
        c2_estimate=est2,
        warnings=tuple(warnings),
    )


def queue_components(q: QueueModel) -> tuple[DiscreteDist, DiscreteDist]:
    """(A, B) of the queue: A is the k-fold sum of xi, B is Bernoulli(p) + xi."""
    A = q.xi if q.k == 1 else ConvolvedDist([q.xi] * q.k)
    B = ConvolvedDist([Bernoulli(q.p), q.xi])
    return A, B


def queue_to_model(
    q: QueueModel,
    G: Optional[TailFunction] = None,
    x_grid=None,
    window: float = DEFAULT_WINDOW,
    spread: float = DEFAULT_SPREAD,
) -> FixedPointModel:
    """Map the queue onto X = Y - k.

    With no reference tail given, a heavy xi built from a tail function
    supplies its own tail as the reference.

    Raises:
        SubcriticalityException: E(xi) + p >= 1
    """
    if not q.load < 1.0:
        LOGGER.error(f"queue_to_model: E(xi) + p = {q.load:.6g} >= 1")
        raise SubcriticalityException(f"queue is not subcritical: E(xi) + p = {q.load:.6g}")
    if G is None and isinstance(q.xi, TailDiscreteDist) and not q.xi.is_light:
        G = q.xi.tail_function
    A, B = queue_components(q)
    return build_model(A, B, G, x_grid, window, spread)
