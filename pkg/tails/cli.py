#!/usr/bin/env python3
"""
Command line for bpi-tails.

Each subcommand is a thin adapter: it picks the stages to run and hands a
resolved ExperimentSpec to ``run``. Stages always execute in the order
classify, stability, conditions, predict, solve, simulate, verify, walkmax.
Settings resolve as defaults < config file < BPI_TAILS_* environment <
command-line flags, and the result is written to ``resolved_config.json``
before any work starts.

Exit codes: 0 success, 1 unexpected error, 2 validation failure,
3 non-convergence, 4 unsupported regime, 5 verification failed.

tails/cli.py for bpi-tails

(C) 2025 Stephen Jenkins

"""

# standard imports
import argparse
import json
import logging
import math
import os
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Optional

# external imports
import numpy as np
from pydantic import ValidationError

# personal libraries
from tails.asymptotics import (
    DEFAULT_LAMBDAS,
    PredictedTail,
    check_conditions,
    check_scale_continuity,
    predict_second_order,
    predict_tail,
    window_ratio_prediction,
)
from tails.config import (
    ExperimentSpec,
    build_continuous,
    build_dist,
    build_fixed_point,
    build_queue,
    build_queue_model,
    build_sigma,
    build_tail,
    build_two_lag,
)
from tails.dist import TailFunction, classify, grid_window, karamata_upper_index
from tails.exact import solve_stationary, stationary_mean
from tails.exceptions import (
    InvalidInputException,
    StabilityException,
    SubcriticalityException,
    TailsException,
    UnsupportedRegimeException,
    VerificationFailedException,
)
from tails.model import check_stability, queue_components
from tails.montecarlo import (
    empirical_pmf,
    estimate_tail,
    ks_check,
    mean_with_error,
    random_walk_max_oracle,
    simulate_chain,
    simulate_continuous,
    simulate_queue,
    simulate_second_order,
    total_variation,
    window_estimate,
)
from utils.config_validation import (
    parse_grid,
    read_env_overrides,
    validate_count,
    validate_grid,
    validate_out_dir,
    validate_seed,
    validate_tol,
)
from utils.report_funcs import (
    ESTIMATE_FIELDS,
    PMF_FIELDS,
    PREDICTION_FIELDS,
    VERIFY_FIELDS,
    WALKMAX_FIELDS,
    WINDOW_FIELDS,
    to_jsonable,
    write_csv,
    write_json,
)
from utils.time import Stopwatch, get_iso_utc_now

LOGGER = logging.getLogger(__name__)

# stages each subcommand runs; "run" takes them from the config
COMMAND_STAGES = {
    "classify": ["classify"],
    "stability": ["stability"],
    "conditions": ["stability", "conditions"],
    "predict": ["stability", "predict"],
    "solve": ["stability", "solve"],
    "simulate": ["stability", "simulate"],
    "verify": ["stability", "predict", "simulate", "verify"],
    "walkmax": ["walkmax"],
    "run": None,
}

SUBEXP_POINTS = np.geomspace(8, 512, 8).astype(np.int64)
# grid points need this many expected exceedances to count in verify
VERIFY_MIN_HITS = 50
# window ratio tolerance around D and the hits a point needs to be judged
WINDOW_TOL = 0.25
WINDOW_MIN_HITS = 500
EXIT_CATEGORIES = {2: "validation", 3: "non_convergence", 4: "unsupported_regime", 5: "verification_failed"}


@dataclass
class RunContext:
    """Everything the stages share during one run."""

    spec: ExperimentSpec
    out_dir: Path
    x_grid: np.ndarray
    stage: str = ""
    model: Any = None
    conditions: Any = None
    prediction: Optional[PredictedTail] = None
    samples: Optional[np.ndarray] = None
    sim: Any = None
    results: dict = field(default_factory=dict)
    artifacts: list = field(default_factory=list)

    def require(self, *subjects: str) -> str:
        if self.spec.subject not in subjects:
            raise UnsupportedRegimeException(
                f"stage '{self.stage}' does not apply to a {self.spec.subject} experiment"
            )
        return self.spec.subject

    def write_csv(self, name: str, src: dict, fields: dict, header: Optional[dict] = None):
        self.artifacts.append(str(write_csv(self.out_dir / name, src, fields, header)))

    def write_json(self, name: str, payload: Any):
        self.artifacts.append(str(write_json(self.out_dir / name, payload)))


def _echo(line: str = ""):
    print(line, file=sys.stdout)


def _model(ctx: RunContext):
    """Build (once) the lattice model of the experiment subject."""
    if ctx.model is None:
        spec = ctx.spec
        subject = ctx.require("model", "queue", "second_order")
        if subject == "model":
            ctx.model = build_fixed_point(spec.model, ctx.x_grid, spec.window)
        elif subject == "queue":
            ctx.model = build_queue_model(spec.queue, ctx.x_grid, spec.window)
        else:
            ctx.model = build_two_lag(spec.second_order, ctx.x_grid, spec.window)
    return ctx.model


def _reference_tail(ctx: RunContext) -> TailFunction:
    spec = ctx.spec
    if spec.tail is not None:
        return build_tail(spec.tail)
    holder = spec.model or spec.queue or spec.second_order
    if holder is None or holder.G is None:
        raise InvalidInputException(f"a {spec.subject} experiment carries no tail to classify")
    return build_tail(holder.G)


# ---------------------------------------------------------------------------
# stages
# ---------------------------------------------------------------------------


def _stage_classify(ctx: RunContext):
    t = _reference_tail(ctx)
    report = classify(t, ctx.x_grid, ctx.spec.window, subexp_points=SUBEXP_POINTS)
    c_plus = karamata_upper_index(t, DEFAULT_LAMBDAS, ctx.x_grid, ctx.spec.window)
    payload = asdict(report)
    payload["karamata_upper_index"] = c_plus
    ctx.write_json("classify.json", payload)
    ctx.results["classify"] = {"consistent": report.consistent, "karamata_upper_index": c_plus}

    _echo(f"{report.name}  declared={report.declared_class.value if report.declared_class else '-'}")
    for label, passed in (
        ("L", report.long_tailed),
        ("D", report.dominated),
        ("IRV", report.intermediate),
        ("ERV", report.extended),
        ("RV", report.regular),
        ("S", report.subexponential),
    ):
        _echo(f"  {label:<4}{'pass' if passed else ('n/a' if passed is None else 'fail')}")
    _echo(f"  envelope alpha+={report.alpha_plus:.6g} alpha-={report.alpha_minus:.6g} c+={c_plus:.6g}")
    for key, (lower, upper) in report.ratio_limits.items():
        upper_text = "" if upper is None else f" limsup={upper:.6g}"
        _echo(f"  {key:<12}liminf={lower:.6g}{upper_text}")
    if not report.consistent:
        LOGGER.warning(f"classify: measured classes disagree with the declared class of {report.name}")


def _stage_stability(ctx: RunContext):
    spec = ctx.spec
    subject = ctx.require("model", "queue", "second_order", "continuous")
    if subject == "continuous":
        c = spec.continuous
        a_dist, b_dist = build_continuous(c.A), build_continuous(c.B)
        rate = c.lam * b_dist.mean
        result = {"b": rate, "a": a_dist.mean, "stable": rate < 1.0 and math.isfinite(a_dist.mean)}
    elif subject == "second_order":
        s = spec.second_order
        b1, b2 = build_dist(s.B1).mean, build_dist(s.B2).mean
        result = {"b1": b1, "b2": b2, "b": b1 + b2, "stable": b1 + b2 < 1.0}
    else:
        if subject == "queue":
            q = build_queue(spec.queue)
            if not q.load < 1.0:
                ctx.results["stability"] = {"load": q.load, "stable": False}
                raise SubcriticalityException(f"queue is not subcritical: E(xi) + p = {q.load:.6g}")
            A, B = queue_components(q)
        else:
            A, B = build_dist(spec.model.A), build_dist(spec.model.B)
        report = check_stability(A, B)
        result = {
            "b": report.b_value,
            "b_ok": report.b_ok,
            "log_moment_finite": report.log_moment_finite,
            "verdict": report.verdict,
            "stable": report.stable,
        }
    ctx.results["stability"] = result
    ctx.write_json("stability.json", result)
    _echo(f"stability: b={result['b']:.6g} stable={result['stable']}")
    if not result["stable"]:
        LOGGER.error(f"stability: {subject} experiment is not stable (b={result['b']:.6g})")
        raise StabilityException(f"stability check failed: b={result['b']:.6g} ({result.get('verdict', 'b >= 1')})")


def _stage_conditions(ctx: RunContext):
    m = _model(ctx)
    if ctx.spec.subject == "second_order":
        if m.G is None:
            raise UnsupportedRegimeException("light model: no reference tail to check against")
        report = check_scale_continuity(m.G, m.rate, ctx.x_grid, window=ctx.spec.window)
        payload = {"scale_continuity": asdict(report)}
    else:
        report = check_conditions(m, ctx.x_grid, window=ctx.spec.window)
        ctx.conditions = report
        payload = asdict(report)
        payload["infinite_mean_ok"] = report.infinite_mean_ok
    ctx.write_json("conditions.json", payload)
    ctx.results["conditions"] = payload
    _echo(f"conditions: {json.dumps(to_jsonable(payload), sort_keys=True)}")


def _stage_predict(ctx: RunContext):
    if "verify" in ctx.spec.stages and (ctx.spec.subject == "continuous" or _model(ctx).G is None):
        # verify checks these against the exact law or the mean formula instead
        LOGGER.info(f"predict: no tail curve for a light {ctx.spec.subject} experiment")
        ctx.results["predict"] = {"skipped": "no heavy-tail prediction"}
        return
    m = _model(ctx)
    if ctx.spec.subject == "second_order":
        pred = predict_second_order(m, ctx.x_grid, ctx.spec.tol)
        header = {"subject": "second_order", "delta": m.delta, "coefficient": m.coefficient}
    else:
        pred = predict_tail(m, ctx.x_grid, ctx.spec.tol, conditions=ctx.conditions)
        header = {"subject": ctx.spec.subject, "case": m.case_label, "c1": m.c1, "c2": m.c2, "a": m.a}
    ctx.prediction = pred
    src = {name: getattr(pred, name) for name in PREDICTION_FIELDS}
    ctx.write_csv("prediction.csv", src, PREDICTION_FIELDS, header)
    ctx.results["predict"] = {
        "regime": pred.regime,
        "D": pred.D,
        "rv_coefficient": pred.rv_coefficient,
        "d1": pred.d1,
        "d2": pred.d2,
        "notes": list(pred.notes),
    }
    rv = "" if pred.rv_coefficient is None else f" rv_coefficient={pred.rv_coefficient:.6g}"
    _echo(f"predict: regime={pred.regime} D={pred.D:.6g}{rv}")


def _stage_solve(ctx: RunContext):
    ctx.require("model", "queue")
    m = _model(ctx)
    spec = ctx.spec
    px = solve_stationary(m, spec.truncation, eps=spec.tol, budget=spec.leak_budget)
    formula = stationary_mean(m)
    ctx.results["solve"] = {
        "N": px.N,
        "mean": px.mean(),
        "formula_mean": formula,
        "leaked": px.leaked,
        "iterations": px.iterations,
    }
    src = {
        "n": np.arange(px.N + 1),
        "p": px.values,
        "tail": px.tail(),
        "mean": px.mean(),
        "iterations": px.iterations,
        "leaked": px.leaked,
    }
    ctx.write_csv("stationary_pmf.csv", src, PMF_FIELDS, {"formula_mean": formula})
    _echo(f"solve: mean={px.mean():.10g} a/(1-b)={formula:.10g} leaked={px.leaked:.3g} in {px.iterations} steps")


def _observable(ctx: RunContext) -> np.ndarray:
    """Samples whose tail the stages estimate."""
    if ctx.samples is None:
        _stage_simulate(ctx)
    return ctx.samples


def _stage_simulate(ctx: RunContext):
    spec = ctx.spec
    subject = ctx.require("model", "queue", "second_order", "continuous")
    cfg = spec.sim.to_config()
    extra: dict = {}
    if subject == "model":
        res = simulate_chain(_model(ctx), cfg)
        samples, elapsed, burn_in, warnings = res.samples, res.elapsed, res.burn_in, res.warnings
    elif subject == "queue":
        res = simulate_queue(build_queue(spec.queue), cfg, spec.queue.mode)
        samples = res.samples - spec.queue.k
        elapsed, burn_in, warnings = res.elapsed, res.burn_in, res.warnings
        extra["mean_population"] = mean_with_error(res.samples)[0]
    elif subject == "second_order":
        res = simulate_second_order(_model(ctx), cfg)
        samples, elapsed, burn_in, warnings = res.combination, res.elapsed, res.burn_in, res.warnings
        ks = ks_check(res.x, res.y)
        extra["ks_x_vs_y"] = asdict(ks)
        extra["mean_x"] = mean_with_error(res.x)[0]
        extra["delta"] = res.delta
    else:
        c = spec.continuous
        res = simulate_continuous(build_continuous(c.A), c.lam, build_continuous(c.B), cfg)
        samples, elapsed, burn_in, warnings = res.samples, res.elapsed, res.burn_in, res.warnings
        extra.update(res.diagnostics)
    ctx.sim = res
    ctx.samples = samples

    predicted = ctx.prediction.curve if ctx.prediction is not None else None
    est = estimate_tail(samples, ctx.x_grid, predicted)
    src = {
        "x": est.grid,
        "p_hat": est.p_hat,
        "ci_low": est.ci_low,
        "ci_high": est.ci_high,
        "n_effective": est.n_effective,
    }
    if predicted is not None:
        src["predicted"] = est.predicted
        src["ratio"] = est.ratio
    header = {"subject": subject, "seed": cfg.seed, "replications": cfg.replications, "burn_in": burn_in}
    ctx.write_csv("tail_estimate.csv", src, ESTIMATE_FIELDS, header)

    mean, err = mean_with_error(samples)
    ctx.results["simulate"] = {
        "mean": mean,
        "mean_std_error": err,
        "samples": int(np.size(samples)),
        "seed": cfg.seed,
        "replications": cfg.replications,
        "burn_in": burn_in,
        "runtime_seconds": elapsed,
        "warnings": list(warnings) + list(est.warnings),
        **extra,
    }
    _echo(f"simulate: {np.size(samples)} samples mean={mean:.6g} +- {err:.2g} ({elapsed:.2f}s)")


def _stage_verify(ctx: RunContext):
    spec = ctx.spec
    subject = ctx.require("model", "queue", "second_order", "continuous")
    samples = _observable(ctx)
    result: dict = {}

    if subject == "continuous":
        c = spec.continuous
        a, b = build_continuous(c.A).mean, c.lam * build_continuous(c.B).mean
        mean, err = mean_with_error(samples)
        formula = a / (1.0 - b)
        result = {"mean": mean, "formula_mean": formula, "within_3_sigma": abs(mean - formula) <= 3.0 * err}
    else:
        m = _model(ctx)
        if m.G is None:
            if subject == "second_order":
                raise UnsupportedRegimeException("light second-order model: no exact solver for two lags")
            px = solve_stationary(m, spec.truncation, eps=spec.tol, budget=spec.leak_budget)
            N = min(px.N, spec.tv_support)
            tv = total_variation(empirical_pmf(samples, N), px.values[: N + 1])
            result = {"tv_distance": tv, "mean_exact": px.mean(), "mean_sim": mean_with_error(samples)[0], "N": N}
        else:
            if ctx.prediction is None:
                _stage_predict(ctx)
            pred = ctx.prediction
            est = estimate_tail(samples, ctx.x_grid, pred.curve)
            se = est.std_error
            within = (est.p_hat + 3.0 * se >= pred.lower) & (est.p_hat - 3.0 * se <= pred.upper)
            deep = est.counts >= VERIFY_MIN_HITS
            far = np.isin(est.grid, grid_window(est.grid, spec.window))
            judged = far & deep
            src = {
                "x": est.grid,
                "p_hat": est.p_hat,
                "predicted": pred.curve,
                "ratio": est.ratio,
                "lower": pred.lower,
                "upper": pred.upper,
                "within": within.astype(int),
                "pre_asymptotic": (~far).astype(int),
                "coefficient": pred.D,
                "within_fraction": float(within[deep].mean()) if deep.any() else math.nan,
            }
            ctx.write_csv("verify.csv", src, VERIFY_FIELDS, {"subject": subject, "regime": pred.regime})
            failures = []
            result = {
                "within_fraction": src["within_fraction"],
                "deep_points": int(deep.sum()),
                "pre_asymptotic": [float(x) for x in est.grid[~far]],
                "sandwich_points": int(judged.sum()),
                "sandwich_failures": [float(x) for x in est.grid[judged & ~within]],
            }
            if deep.any():
                result["far_ratio"] = float(est.ratio[deep][-1])
            if result["sandwich_failures"]:
                failures.append(f"estimate outside the sandwich bounds at x={result['sandwich_failures']}")
            if subject != "second_order" and 0.0 < m.b < 1.0:
                D = window_ratio_prediction(m)
                w = window_estimate(samples, m.G, m.b, ctx.x_grid)
                slack = WINDOW_TOL * D + 3.0 * w.ratio / np.sqrt(np.maximum(w.hits, 1))
                w_within = np.abs(w.ratio - D) <= slack
                w_judged = far & (w.hits >= WINDOW_MIN_HITS)
                ctx.write_csv(
                    "window.csv",
                    {"x": w.grid, "hits": w.hits, "ratio": w.ratio, "within": w_within.astype(int), "D": D},
                    WINDOW_FIELDS,
                    {"subject": subject},
                )
                result["window_D"] = D
                result["window_points"] = int(w_judged.sum())
                result["window_failures"] = [float(x) for x in w.grid[w_judged & ~w_within]]
                if result["window_failures"]:
                    failures.append(
                        f"window ratio off D={D:.6g} by more than {WINDOW_TOL:.0%} at x={result['window_failures']}"
                    )
            _echo("verify:        x        p_hat    predicted        ratio")
            for x, p, q, r in zip(est.grid, est.p_hat, pred.curve, est.ratio):
                _echo(f"  {x:12.6g} {p:12.6g} {q:12.6g} {r:12.6g}")
            if result["pre_asymptotic"]:
                LOGGER.info(f"verify: pre-asymptotic grid points left out of the verdict: {result['pre_asymptotic']}")
            if not judged.any():
                LOGGER.warning("verify: no far grid point has enough exceedances to judge; raise --replications")
            result["status"] = "failed" if failures else "ok"
            ctx.results["verify"] = result
            if failures:
                LOGGER.error(f"verify: {'; '.join(failures)}")
                raise VerificationFailedException("; ".join(failures))
    ctx.results["verify"] = result
    _echo(f"verify: {json.dumps(to_jsonable(result), sort_keys=True)}")


def _stage_walkmax(ctx: RunContext):
    ctx.require("oracle")
    o = ctx.spec.oracle
    res = random_walk_max_oracle(
        build_dist(o.xi), o.drift_shift, build_sigma(o.sigma), ctx.x_grid, ctx.spec.sim.to_config()
    )
    src = {
        "x": res.grid,
        "p_hat": res.p_hat,
        "reference": res.reference,
        "ratio": res.ratio,
        "ci_low": res.ci_low,
        "ci_high": res.ci_high,
        "mean_sigma": res.mean_sigma,
        "far_ratio": res.far_ratio,
    }
    ctx.write_csv("walkmax.csv", src, WALKMAX_FIELDS, {"sigma": o.sigma.kind, "drift_shift": o.drift_shift})
    ctx.results["walkmax"] = {
        "mean_sigma": res.mean_sigma,
        "mean_sigma_error": res.mean_sigma_error,
        "far_ratio": res.far_ratio,
        "far_ratio_over_mean_sigma": res.far_ratio / res.mean_sigma,
        "truncated": res.truncated,
        "runtime_seconds": res.elapsed,
    }
    _echo(f"walkmax: E sigma={res.mean_sigma:.6g} far ratio={res.far_ratio:.6g}")
    _echo("        x        ratio   ratio/E sigma")
    for x, r in zip(res.grid, res.ratio):
        _echo(f"  {x:12.6g} {r:12.6g} {r / res.mean_sigma:12.6g}")


# Dispatch map from stage name to its handler.
_STAGE_MAP = {
    "classify": _stage_classify,
    "stability": _stage_stability,
    "conditions": _stage_conditions,
    "predict": _stage_predict,
    "solve": _stage_solve,
    "simulate": _stage_simulate,
    "verify": _stage_verify,
    "walkmax": _stage_walkmax,
}


def _diagnostic(exc: BaseException, stage: str, code: int) -> dict:
    return {
        "status": "error",
        "exit_code": code,
        "error": type(exc).__name__,
        "category": EXIT_CATEGORIES.get(code, "internal"),
        "message": str(exc),
        "stage": stage,
        "timestamp": get_iso_utc_now(),
    }


def run(spec: ExperimentSpec) -> int:
    """Execute the stages of spec in order and write the artifacts.

    Returns the exit status. Failures are written as a JSON diagnostic to
    ``diagnostics.json`` and to stderr.
    """
    out_dir = Path(spec.out_dir)
    ctx = RunContext(spec=spec, out_dir=out_dir, x_grid=spec.grid.points())
    ctx.write_json("resolved_config.json", spec.model_dump(mode="json"))
    LOGGER.info(f"run: subject={spec.subject} stages={spec.stages} out_dir={out_dir}")
    code = 0
    diagnostic = None
    with Stopwatch() as watch:
        try:
            for stage in spec.stages:
                ctx.stage = stage
                LOGGER.debug(f"enter stage {stage}")
                _STAGE_MAP[stage](ctx)
                LOGGER.debug(f"exit stage {stage}")
        except TailsException as exc:
            code = exc.exit_code
            LOGGER.error(f"stage {ctx.stage} failed: {exc}", exc_info=True)
            diagnostic = _diagnostic(exc, ctx.stage, code)
        except Exception as exc:  # noqa: BLE001
            code = 1
            LOGGER.error(f"stage {ctx.stage} crashed: {exc}", exc_info=True)
            diagnostic = _diagnostic(exc, ctx.stage, code)

    if diagnostic is not None:
        ctx.write_json("diagnostics.json", diagnostic)
        print(json.dumps(to_jsonable(diagnostic), sort_keys=True), file=sys.stderr)
    summary = {
        "status": {0: "ok", 5: "failed"}.get(code, "error"),
        "exit_code": code,
        "timestamp": get_iso_utc_now(),
        "runtime_seconds": watch.elapsed,
        "subject": spec.subject,
        "stages": spec.stages,
        "results": ctx.results,
        "artifacts": ctx.artifacts,
    }
    write_json(out_dir / "summary.json", summary)
    LOGGER.info(f"run: exit {code} after {watch.elapsed:.2f}s")
    return code


# ---------------------------------------------------------------------------
# argument handling
# ---------------------------------------------------------------------------


def _common_flags() -> argparse.ArgumentParser:
    """Flags accepted before or after the subcommand; absent flags leave no attribute."""
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--config", "-c", type=str, help="experiment JSON file")
    common.add_argument("--out-dir", "-o", type=str, help="output directory")
    common.add_argument("--seed", type=str, help="64-bit seed")
    common.add_argument("--workers", "-j", type=str, help="worker threads")
    common.add_argument("--grid", type=str, help="log grid min,max,count")
    common.add_argument("--replications", "-n", type=str, help="Monte Carlo replications")
    common.add_argument("--burn-in", type=str, help="burn-in steps (default from the mean recursion)")
    common.add_argument("--tol", type=str, help="relative tolerance of tail sums")
    common.add_argument("--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR"], help="logging level (INFO)")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_flags()
    parser = argparse.ArgumentParser(
        prog="bpi-tails",
        description="Tail asymptotics of branching processes with immigration.",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        parents=[common],
        epilog=(
            "Examples:\n"
            "  bpi-tails predict model.json --grid 30,300,25\n"
            "  bpi-tails verify model.json --replications 10000000 --workers 8\n"
            "  bpi-tails walkmax oracle.json --seed 7\n"
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "classify": "finite-grid heavy-tail class tests of a tail spec",
        "stability": "stability of a model",
        "conditions": "structural conditions behind the tail asymptotics",
        "predict": "predicted tail curve and bounds",
        "solve": "exact stationary pmf by truncated iteration",
        "simulate": "Monte Carlo samples and tail estimates",
        "verify": "predict, simulate and compare",
        "walkmax": "random walk maximum oracle",
        "run": "the stages listed in the config",
    }
    for name, text in helps.items():
        cmd = sub.add_parser(name, help=text, parents=[common])
        cmd.add_argument("spec_file", nargs="?", default=None, help="experiment JSON file")
    return parser


# Dispatch map from flag to (validator, converter, setter).
_FLAG_MAP = {
    "seed": (validate_seed, int, lambda d, v: d.setdefault("sim", {}).__setitem__("seed", v)),
    "workers": (
        lambda v: validate_count(v, "workers"),
        int,
        lambda d, v: d.setdefault("sim", {}).__setitem__("workers", v),
    ),
    "replications": (
        lambda v: validate_count(v, "replications"),
        int,
        lambda d, v: d.setdefault("sim", {}).__setitem__("replications", v),
    ),
    "burn_in": (
        lambda v: validate_count(v, "burn_in", minimum=0),
        int,
        lambda d, v: d.setdefault("sim", {}).__setitem__("burn_in", v),
    ),
    "tol": (validate_tol, float, lambda d, v: d.__setitem__("tol", v)),
    "grid": (
        validate_grid,
        parse_grid,
        lambda d, v: d.__setitem__("grid", {"x_min": v[0], "x_max": v[1], "count": v[2]}),
    ),
    "out_dir": (validate_out_dir, str, lambda d, v: d.__setitem__("out_dir", v)),
}


def resolve_spec(args: argparse.Namespace, environ) -> ExperimentSpec:
    """Merge config file, environment and flags into a validated spec.

    Raises:
        InvalidInputException: unreadable config or a bad flag / env value
        pydantic.ValidationError: the merged config fails its schema
    """
    config = getattr(args, "config", None)
    path = args.spec_file or config
    if args.spec_file and config and Path(args.spec_file) != Path(config):
        raise InvalidInputException("give the experiment file either positionally or with --config, not both")
    data: dict = {}
    if path:
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            LOGGER.error(f"cannot read config {path}: {exc}")
            raise InvalidInputException(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise InvalidInputException(f"config {path} must hold a JSON object")

    env, errors = read_env_overrides(environ)
    if errors:
        raise InvalidInputException("; ".join(errors))
    for key, value in env.items():
        _FLAG_MAP[key][2](data, value)

    for key, (validator, convert, setter) in _FLAG_MAP.items():
        raw = getattr(args, key, None)
        if raw is None:
            continue
        ok, message = validator(raw)
        if not ok:
            raise InvalidInputException(f"--{key.replace('_', '-')}: {message}")
        setter(data, convert(raw))

    stages = COMMAND_STAGES[args.command]
    if stages is not None:
        data["stages"] = stages
    spec = ExperimentSpec.model_validate(data)

    if path and (Path(spec.out_dir) / "resolved_config.json").resolve() == Path(path).resolve():
        raise InvalidInputException("the output directory would overwrite the input config")
    return spec


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, getattr(args, "log_level", "INFO")),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        force=True,
    )
    try:
        spec = resolve_spec(args, os.environ)
    except TailsException as exc:
        LOGGER.error(f"configuration rejected: {exc}")
        print(json.dumps(_diagnostic(exc, "config", exc.exit_code), sort_keys=True), file=sys.stderr)
        return exc.exit_code
    except ValidationError as exc:
        LOGGER.error(f"configuration rejected: {exc}")
        print(json.dumps(_diagnostic(exc, "config", 2), sort_keys=True), file=sys.stderr)
        return 2
    return run(spec)


if __name__ == "__main__":
    sys.exit(main())
