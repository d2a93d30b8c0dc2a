"""Tail asymptotics of the fixed point.

Geometric-scale tail sums T_c(x) = sum_n G(c^n x), the structural condition
checks that make D * T_{1/b}(x) an exact equivalent of P(X > x), the
predicted tail curves with their sandwich bounds, and the second-order
(two-lag) extension.

(C) 2025 Stephen Jenkins
"""

# std libraries
import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

# external libraries
import numpy as np

# personal libraries
from tails.dist import (
    DEFAULT_WINDOW,
    DiscreteDist,
    TailClass,
    TailDiscreteDist,
    TailFunction,
    grid_window,
    integrated_tail,
    karamata_upper_index,
    subexponential_check,
)
from tails.exceptions import (
    DegenerateModelException,
    GridUnderflowException,
    InvalidParameterException,
    ModelInconsistencyException,
    NonConvergentSumException,
    StabilityException,
    UnsupportedRegimeException,
)
from tails.model import (
    DEFAULT_SPREAD,
    NEAR_CRITICAL,
    FixedPointModel,
    RatioEstimate,
    combine_constant,
    reference_ratio,
)
from utils.series import geometric_tail_sum

LOGGER = logging.getLogger(__name__)

DEFAULT_TOL = 1e-12
DEFAULT_DELTAS = (0.08, 0.04, 0.02, 0.01)
DEFAULT_LAMBDAS = (1.1, 1.25, 1.5, 2.0, 3.0, 4.0)
BOUND_SPREAD = 0.1


@dataclass(frozen=True)
class TailSum:
    value: np.ndarray
    remainder_bound: np.ndarray
    terms: np.ndarray


def tail_sum(t: TailFunction, c: float, x, tol: float = DEFAULT_TOL, max_terms: int = 20000) -> TailSum:
    """T_c(x) = sum_{n>=0} G(c^n x), vectorised over x.

    Truncated where the measured-ratio remainder bound falls below ``tol``
    times the partial sum. Scalars in, scalars out.

    Raises:
        InvalidParameterException: c <= 1, x <= 0 or tol <= 0
        NonConvergentSumException: the step ratios never settle below 1
    """
    if not c > 1.0:
        raise InvalidParameterException(f"tail_sum needs c > 1, got {c}")
    if not tol > 0.0:
        raise InvalidParameterException(f"tail_sum needs tol > 0, got {tol}")
    arr = np.asarray(x, dtype=float)
    xs = np.atleast_1d(arr).ravel()
    if np.any(xs <= 0.0):
        raise InvalidParameterException("tail_sum needs x > 0")

    def term(n: int) -> np.ndarray:
        with np.errstate(over="ignore"):
            arg = xs * np.power(c, float(n))
        finite = np.isfinite(arg)
        return np.where(finite, t.evaluate(np.where(finite, arg, 1.0)), 0.0)

    res = geometric_tail_sum(term, xs.size, tol=tol, max_terms=max_terms)
    if not res.converged.all():
        bad = float(xs[np.argmin(res.converged)])
        LOGGER.error(f"tail_sum: T_{c:g}({bad:g}) of {t.name} did not settle; is the log moment finite?")
        raise NonConvergentSumException(
            f"T_{c:g}(x) of {t.name} does not converge at x={bad:g}: step ratios stay near 1 "
            "(finiteness needs a dominated-varying tail with a finite log moment)"
        )
    if arr.ndim == 0:
        return TailSum(float(res.value[0]), float(res.remainder_bound[0]), int(res.terms[0]))  # type: ignore[arg-type]
    return TailSum(res.value.reshape(arr.shape), res.remainder_bound.reshape(arr.shape), res.terms.reshape(arr.shape))


# ---------------------------------------------------------------------------
# condition checks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScaleContinuityReport:
    """Windowed limsup / liminf of T_c/T_{c0} as c -> c0, extrapolated in delta."""

    upper_limit: float
    lower_limit: float
    passed: bool
    analytic: bool
    deltas: tuple
    uppers: tuple
    lowers: tuple


@dataclass(frozen=True)
class KaramataReport:
    value: float
    passed: bool


@dataclass(frozen=True)
class VarianceRoute:
    """liminf x G(x) > 0 together with a finite offspring variance."""

    C_estimate: float  # inf when x G(x) keeps growing
    variance: float
    passed: bool


@dataclass(frozen=True)
class IntegratedRoute:
    """limsup H_I(x)/G(x) < inf together with a subexponential H_I."""

    window_maxima: tuple
    ratio_final: float
    subexponential_ratios: tuple
    subexponential: bool
    passed: bool


@dataclass(frozen=True)
class ConditionReport:
    scale_continuity: Optional[ScaleContinuityReport] = None
    karamata: Optional[KaramataReport] = None
    variance_route: Optional[VarianceRoute] = None
    integrated_route: Optional[IntegratedRoute] = None

    @property
    def infinite_mean_ok(self) -> bool:
        return bool(
            (self.variance_route is not None and self.variance_route.passed)
            or (self.integrated_route is not None and self.integrated_route.passed)
        )


def check_scale_continuity(
    t: TailFunction,
    b: float,
    x_grid,
    delta_seq: Sequence[float] = DEFAULT_DELTAS,
    window: float = DEFAULT_WINDOW,
    tol: float = 0.02,
) -> ScaleContinuityReport:
    """Continuity of c -> T_c(x)/T_{c0}(x) at c0 = 1/b, uniformly on the far grid.

    For each delta, c = c0 (1 - delta) gives the windowed max and
    c = c0 (1 + delta) the windowed min; both are extrapolated linearly to
    delta = 0. Tails declared RV or ERV pass analytically; the numbers are
    still reported.
    """
    if not 0.0 < b < 1.0:
        raise InvalidParameterException(f"scale continuity needs 0 < b < 1, got {b}")
    c0 = 1.0 / b
    deltas = sorted((d for d in delta_seq if d > 0.0 and c0 * (1.0 - d) > 1.0), reverse=True)
    if not deltas:
        raise InvalidParameterException("delta_seq needs positive values with c0 (1 - delta) > 1")
    xs = grid_window(np.asarray(x_grid, dtype=float), window)
    base = tail_sum(t, c0, xs).value
    if np.any(base <= 0.0):
        where = float(xs[np.argmax(base <= 0.0)])
        LOGGER.error(f"check_scale_continuity: T_c0 of {t.name} underflows at x={where:g}")
        raise GridUnderflowException(f"T_c0 of {t.name} underflows near x={where:g}; shrink the grid")

    uppers, lowers = [], []
    for d in deltas:
        uppers.append(float(np.max(tail_sum(t, c0 * (1.0 - d), xs).value / base)))
        lowers.append(float(np.min(tail_sum(t, c0 * (1.0 + d), xs).value / base)))
    if len(deltas) >= 2:
        upper0 = float(np.polyfit(deltas, uppers, 1)[1])
        lower0 = float(np.polyfit(deltas, lowers, 1)[1])
    else:
        upper0, lower0 = uppers[0], lowers[0]

    analytic = t.declared_class in (TailClass.RV, TailClass.ERV)
    numeric = abs(upper0 - 1.0) <= tol and abs(lower0 - 1.0) <= tol
    LOGGER.info(
        f"scale continuity {t.name} at c0={c0:.4g}: upper->{upper0:.5f} lower->{lower0:.5f} "
        f"numeric={numeric} analytic={analytic}"
    )
    return ScaleContinuityReport(
        upper_limit=upper0,
        lower_limit=lower0,
        passed=numeric or analytic,
        analytic=analytic,
        deltas=tuple(deltas),
        uppers=tuple(uppers),
        lowers=tuple(lowers),
    )


def _window_series(values_fn, x_grid: np.ndarray, window: float, count: int) -> list[np.ndarray]:
    """values_fn on the last ``count`` windows, oldest first."""
    out = []
    for offset in reversed(range(count)):
        out.append(values_fn(grid_window(x_grid, window, offset)))
    return out


def check_infinite_mean_conditions(
    m: FixedPointModel,
    x_grid,
    window: float = DEFAULT_WINDOW,
    growth_tol: float = 0.1,
    subexp_points=None,
    subexp_tol: float = 0.25,
) -> ConditionReport:
    """The two routes that extend the prediction to a = inf.

    Variance route: liminf x G(x) in (0, inf] and Var(B) finite. The liminf is
    called infinite when the window minimum keeps growing by more than
    ``growth_tol`` and zero when it keeps shrinking.

    Integrated route: the window maxima of H_I(x)/G(x) are non-increasing over
    the last three windows, and H_I passes the self-convolution spot check.
    Both are finite-range heuristics; passing means "consistent with".
    """
    if m.G is None:
        raise UnsupportedRegimeException("light model: no reference tail to check against")
    G = m.G
    x = np.asarray(x_grid, dtype=float)

    def x_times_tail(xs):
        return np.exp(np.log(xs) + G.log_evaluate(xs))

    try:
        prev_win, last_win = _window_series(x_times_tail, x, window, 2)
        prev_min, last_min = float(prev_win.min()), float(last_win.min())
    except InvalidParameterException:
        prev_min = last_min = float(x_times_tail(grid_window(x, window)).min())
    if last_min > prev_min * (1.0 + growth_tol):
        C = math.inf
    elif last_min < prev_min * (1.0 - growth_tol):
        C = 0.0
    else:
        C = last_min
    variance = m.B.variance
    variance_route = VarianceRoute(C_estimate=C, variance=variance, passed=C > 0.0 and math.isfinite(variance))

    H = integrated_tail(m.B)
    if H.improper:
        integrated_route = IntegratedRoute((), math.inf, (), False, False)
    else:

        def ratio(xs):
            return H.evaluate(xs) / np.exp(G.log_evaluate(xs))

        try:
            series = _window_series(ratio, x, window, 3)
        except InvalidParameterException:
            series = [ratio(grid_window(x, window))]
        maxima = tuple(float(s.max()) for s in series)
        non_increasing = all(later <= earlier * (1.0 + 1e-9) for earlier, later in zip(maxima, maxima[1:]))
        if subexp_points is None:
            subexp_points = np.unique(np.geomspace(8, 512, 8).astype(np.int64))
        sub = subexponential_check(TailDiscreteDist(H), subexp_points, tol=subexp_tol)
        integrated_route = IntegratedRoute(
            window_maxima=maxima,
            ratio_final=float(series[-1][-1]),
            subexponential_ratios=tuple(float(r) for r in sub.ratios),
            subexponential=sub.passed,
            passed=non_increasing and sub.passed,
        )
    LOGGER.info(
        f"infinite-mean routes: variance={variance_route.passed} (C={C:.4g}, var={variance:.4g}) "
        f"integrated={integrated_route.passed}"
    )
    return ConditionReport(variance_route=variance_route, integrated_route=integrated_route)


def check_conditions(
    m: FixedPointModel,
    x_grid,
    delta_seq: Sequence[float] = DEFAULT_DELTAS,
    lambda_grid: Sequence[float] = DEFAULT_LAMBDAS,
    window: float = DEFAULT_WINDOW,
    tol: float = 0.02,
) -> ConditionReport:
    """Every structural check that applies to the model."""
    if m.G is None:
        raise UnsupportedRegimeException("light model: no reference tail to check against")
    continuity = check_scale_continuity(m.G, m.b, x_grid, delta_seq, window, tol) if m.b > 0.0 else None
    c_plus = karamata_upper_index(m.G, lambda_grid, x_grid, window)
    karamata = KaramataReport(value=c_plus, passed=c_plus < 0.0)
    variance_route = integrated_route = None
    if not math.isfinite(m.a):
        fragment = check_infinite_mean_conditions(m, x_grid, window)
        variance_route, integrated_route = fragment.variance_route, fragment.integrated_route
    return ConditionReport(
        scale_continuity=continuity,
        karamata=karamata,
        variance_route=variance_route,
        integrated_route=integrated_route,
    )


# ---------------------------------------------------------------------------
# predictions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PredictedTail:
    """D * T_{1/b}(x) with sandwich bounds D * T_{d2} <= . <= D * T_{d1}."""

    x: np.ndarray
    curve: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    remainder_bound: np.ndarray
    G_tail: np.ndarray
    D: float
    b: float
    d1: float
    d2: float
    regime: str
    rv_coefficient: Optional[float] = None
    notes: tuple = field(default=())


def default_bound_ratios(c0: float, spread: float = BOUND_SPREAD) -> tuple[float, float]:
    """(d1, d2) = c0 (1 -/+ spread), with d1 pulled back above 1 when needed."""
    d1 = c0 * (1.0 - spread)
    if d1 <= 1.0:
        d1 = 0.5 * (1.0 + c0)
    return d1, c0 * (1.0 + spread)


def _curve(
    G: TailFunction,
    coefficient: float,
    rate: float,
    x: np.ndarray,
    tol: float,
    d1: Optional[float],
    d2: Optional[float],
):
    """Curve, bounds and remainder for coefficient * T_{1/rate} on the grid."""
    g = G.evaluate(x)
    if rate == 0.0:
        # only the n = 0 term survives
        return g * coefficient, g * coefficient, g * coefficient, np.zeros_like(x), g, math.inf, math.inf
    c0 = 1.0 / rate
    dd1, dd2 = default_bound_ratios(c0)
    d1 = dd1 if d1 is None else d1
    d2 = dd2 if d2 is None else d2
    if not 1.0 < d1 < c0 < d2:
        raise InvalidParameterException(f"bounds need 1 < d1 < 1/b < d2, got d1={d1}, d2={d2}, 1/b={c0:.6g}")
    main = tail_sum(G, c0, x, tol)
    upper = tail_sum(G, d1, x, tol).value
    lower = tail_sum(G, d2, x, tol).value
    return (
        coefficient * main.value,
        coefficient * lower,
        coefficient * upper,
        coefficient * main.remainder_bound,
        g,
        d1,
        d2,
    )


def predict_tail_rv(m: FixedPointModel, alpha: float) -> float:
    """Coefficient of G(x) for a regularly varying reference: D / (1 - b^alpha)."""
    if not alpha > 0.0:
        raise InvalidParameterException(f"tail index must be positive, got {alpha}")
    if m.D is None:
        raise UnsupportedRegimeException("light model has no tail coefficient")
    return m.D / (1.0 - m.b**alpha)


def window_ratio_prediction(m: FixedPointModel) -> float:
    """Limit of P(x < X <= x/b)/G(x), which is D."""
    if m.D is None:
        raise UnsupportedRegimeException("light model has no tail coefficient")
    return m.D


def predict_tail(
    m: FixedPointModel,
    x_grid,
    tol: float = DEFAULT_TOL,
    d1: Optional[float] = None,
    d2: Optional[float] = None,
    conditions: Optional[ConditionReport] = None,
) -> PredictedTail:
    """Predicted P(X > x) = D T_{1/b}(x) on the grid, with bounds at d1 < 1/b < d2.

    With a = inf the prediction needs the variance or the integrated route;
    they are checked here unless ``conditions`` is given.

    Raises:
        UnsupportedRegimeException: light model, or a = inf with neither route passing
        NonConvergentSumException: propagated from tail_sum
    """
    if m.G is None or m.D is None:
        raise UnsupportedRegimeException("light model: no heavy-tail prediction applies")
    x = np.asarray(x_grid, dtype=float)
    notes = []
    if math.isfinite(m.a):
        regime = "finite_mean"
    else:
        if conditions is None or (conditions.variance_route is None and conditions.integrated_route is None):
            conditions = check_infinite_mean_conditions(m, x)
        if conditions.variance_route is not None and conditions.variance_route.passed:
            regime = "infinite_mean_variance"
        elif conditions.integrated_route is not None and conditions.integrated_route.passed:
            regime = "infinite_mean_integrated"
        else:
            LOGGER.error("predict_tail: a = inf and neither infinite-mean condition holds")
            raise UnsupportedRegimeException(
                "a = inf: neither liminf x G(x) > 0 with finite Var(B) nor the integrated-tail condition holds"
            )
    if m.b > NEAR_CRITICAL:
        notes.append("near-critical b; T_{1/b} converges slowly")
    curve, lower, upper, remainder, g, dd1, dd2 = _curve(m.G, m.D, m.b, x, tol, d1, d2)
    rv = None
    if m.G.root.declared_class == TailClass.RV and m.G.declared_alpha is not None:
        rv = predict_tail_rv(m, m.G.declared_alpha)
    LOGGER.info(f"predict_tail: regime={regime} D={m.D:.6g} b={m.b:.6g} rv_coefficient={rv}")
    return PredictedTail(
        x=x,
        curve=curve,
        lower=lower,
        upper=upper,
        remainder_bound=remainder,
        G_tail=g,
        D=m.D,
        b=m.b,
        d1=dd1,
        d2=dd2,
        regime=regime,
        rv_coefficient=rv,
        notes=tuple(notes),
    )


# ---------------------------------------------------------------------------
# second-order process
# ---------------------------------------------------------------------------


def second_order_delta(b1: float, b2: float) -> float:
    """Positive root of delta (b1 + delta) = b2.

    Computed as 2 b2 / (sqrt(b1^2 + 4 b2) + b1), which avoids the
    cancellation of the textbook form when b2 is small.
    """
    if b1 < 0.0 or b2 < 0.0:
        raise InvalidParameterException(f"offspring means must be non-negative, got b1={b1}, b2={b2}")
    if not b1 + b2 < 1.0:
        raise StabilityException(f"second-order model needs b1 + b2 < 1, got {b1 + b2:.6g}")
    if b2 == 0.0:
        return 0.0
    delta = 2.0 * b2 / (math.sqrt(b1 * b1 + 4.0 * b2) + b1)
    if not b1 + delta < 1.0:
        raise StabilityException(f"b1 + delta = {b1 + delta:.6g} is not below 1")
    return delta


@dataclass(frozen=True, eq=False)
class SecondOrderModel:
    """X_n = A_n + sum_{X_{n-1}} B1 + sum_{X_{n-2}} B2."""

    A: DiscreteDist
    B1: DiscreteDist
    B2: DiscreteDist
    G: Optional[TailFunction]
    c1: float
    c2: float
    c3: float
    a: float
    b1: float
    b2: float
    delta: float
    m: float
    estimates: tuple = ()
    warnings: tuple = ()

    @property
    def rate(self) -> float:
        """b1 + delta, the contraction rate of the mean recursion."""
        return self.b1 + self.delta

    @property
    def coefficient(self) -> Optional[float]:
        """c1 + E X (c2 + c3)."""
        if self.G is None:
            return None
        return self.c1 + combine_constant(self.m, self.c2 + self.c3)

    def summary(self) -> dict:
        return {
            "a": self.a,
            "b1": self.b1,
            "b2": self.b2,
            "delta": self.delta,
            "m": self.m,
            "c1": self.c1,
            "c2": self.c2,
            "c3": self.c3,
            "coefficient": self.coefficient,
            "reference": self.G.name if self.G is not None else None,
            "warnings": list(self.warnings),
        }


def build_second_order(
    A: DiscreteDist,
    B1: DiscreteDist,
    B2: DiscreteDist,
    G: Optional[TailFunction],
    x_grid=None,
    window: float = DEFAULT_WINDOW,
    spread: float = DEFAULT_SPREAD,
) -> SecondOrderModel:
    """Assemble the two-lag model with the same ratio machinery as build_model."""
    if A.prob_zero >= 1.0:
        raise DegenerateModelException("P(A=0) = 1: the model is degenerate (X = 0)")
    b1, b2 = B1.mean, B2.mean
    delta = second_order_delta(b1, b2)
    a = A.mean
    mean_x = a / (1.0 - b1 - b2)
    warnings = []
    c = [0.0, 0.0, 0.0]
    estimates: list[RatioEstimate] = []
    if G is not None:
        for i, d in enumerate((A, B1, B2)):
            est = reference_ratio(d, G, x_grid, window, spread)
            estimates.append(est)
            c[i] = est.value
            if not est.converged:
                warnings.append(f"c{i + 1} ratio has not stabilised (spread {est.spread:.4g})")
        if not any(c):
            raise ModelInconsistencyException(f"none of A, B1, B2 is tail-equivalent to {G.name}")
        if not math.isfinite(a) and c[1] + c[2] > 0.0:
            raise ModelInconsistencyException("heavy offspring with an infinite immigration mean")
    LOGGER.info(f"build_second_order: a={a:.6g} b1={b1:.6g} b2={b2:.6g} delta={delta:.6g} c={c}")
    return SecondOrderModel(
        A=A,
        B1=B1,
        B2=B2,
        G=G,
        c1=c[0],
        c2=c[1],
        c3=c[2],
        a=a,
        b1=b1,
        b2=b2,
        delta=delta,
        m=mean_x,
        estimates=tuple(estimates),
        warnings=tuple(warnings),
    )


def predict_second_order(
    m2: SecondOrderModel,
    x_grid,
    tol: float = DEFAULT_TOL,
    d1: Optional[float] = None,
    d2: Optional[float] = None,
) -> PredictedTail:
    """Predicted tail of X + delta Y: (c1 + E X (c2 + c3)) T_{1/(b1+delta)}(x).

    The window form P(x < X + delta Y <= x/(b1+delta)) ~ coefficient * G(x)
    is carried in the ``D`` field.
    """
    if m2.G is None or m2.coefficient is None:
        raise UnsupportedRegimeException("light model: no heavy-tail prediction applies")
    x = np.asarray(x_grid, dtype=float)
    coef = m2.coefficient
    curve, lower, upper, remainder, g, dd1, dd2 = _curve(m2.G, coef, m2.rate, x, tol, d1, d2)
    LOGGER.info(f"predict_second_order: coefficient={coef:.6g} rate={m2.rate:.6g}")
    return PredictedTail(
        x=x,
        curve=curve,
        lower=lower,
        upper=upper,
        remainder_bound=remainder,
        G_tail=g,
        D=coef,
        b=m2.rate,
        d1=dd1,
        d2=dd2,
        regime="second_order",
    )
