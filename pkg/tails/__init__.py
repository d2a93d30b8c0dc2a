"""Tail asymptotics toolkit for branching processes with immigration."""

__version__ = "0.1.0"

from .dist import (
    TailClass,
    TailFunction,
    DiscreteDist,
    PointMass,
    Bernoulli,
    Geometric,
    TableDist,
    TailDiscreteDist,
    ConvolvedDist,
    make_pareto,
    make_erv_cycle,
    make_exponential,
    scale_tail,
    discretize,
    integrated_tail,
    classify,
    classify_ratio_limits,
    karamata_upper_index,
)
from .model import (
    FixedPointModel,
    QueueModel,
    TailCase,
    build_model,
    check_stability,
    queue_to_model,
    estimate_ratio_constants,
)
from .asymptotics import (
    PredictedTail,
    SecondOrderModel,
    tail_sum,
    check_conditions,
    predict_tail,
    predict_second_order,
    second_order_delta,
    build_second_order,
)
from .exact import PmfVector, compound_step, solve_stationary, stationary_mean
from .montecarlo import SimConfig, simulate_chain, estimate_tail

__all__ = [
    "TailClass",
    "TailFunction",
    "DiscreteDist",
    "PointMass",
    "Bernoulli",
    "Geometric",
    "TableDist",
    "TailDiscreteDist",
    "ConvolvedDist",
    "make_pareto",
    "make_erv_cycle",
    "make_exponential",
    "scale_tail",
    "discretize",
    "integrated_tail",
    "classify",
    "classify_ratio_limits",
    "karamata_upper_index",
    "FixedPointModel",
    "QueueModel",
    "TailCase",
    "build_model",
    "check_stability",
    "queue_to_model",
    "estimate_ratio_constants",
    "PredictedTail",
    "SecondOrderModel",
    "tail_sum",
    "check_conditions",
    "predict_tail",
    "predict_second_order",
    "second_order_delta",
    "build_second_order",
    "PmfVector",
    "compound_step",
    "solve_stationary",
    "stationary_mean",
    "SimConfig",
    "simulate_chain",
    "estimate_tail",
]
