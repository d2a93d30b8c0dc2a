"""Experiment configuration.

JSON experiment files are validated by the pydantic schemas below and turned
into distribution and model objects by the ``build_*`` helpers. A resolved
ExperimentSpec dumps back to JSON that validates to an equal spec, so a run
can be repeated from its own ``resolved_config.json``.

(C) 2025 Stephen Jenkins
"""

# std libraries
import logging
import math
from pathlib import Path
from typing import Literal, Optional

# external libraries
import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationInfo, field_validator, model_validator

# personal libraries
from tails.asymptotics import SecondOrderModel, build_second_order
from tails.dist import (
    DEFAULT_WINDOW,
    Bernoulli,
    DiscreteDist,
    Geometric,
    PointMass,
    TableDist,
    TailFunction,
    discretize,
    make_erv_cycle,
    make_exponential,
    make_pareto,
    scale_tail,
)
from tails.model import FixedPointModel, QueueModel, build_model, queue_to_model
from tails.montecarlo import ContinuousDist, SigmaRule, SimConfig

LOGGER = logging.getLogger(__name__)

TAIL_KINDS = ("pareto", "erv_cycle", "exponential")
STAGES = ("classify", "stability", "conditions", "predict", "solve", "simulate", "verify", "walkmax")
SUBJECTS = ("model", "queue", "second_order", "continuous", "tail", "oracle")


class DistSpec(BaseModel):
    """Integer law. Tail kinds are discretized as P(Z > n) = G(n)."""

    model_config = ConfigDict(extra="forbid")

    kind: Literal["pareto", "erv_cycle", "exponential", "geometric", "bernoulli", "point", "table"]
    alpha: Optional[float] = Field(None, gt=0, description="Pareto tail index")
    floor: float = Field(1.0, ge=1.0, description="Pareto scale")
    c: Optional[float] = Field(None, gt=1.0, description="ERV cycle ratio")
    a1: Optional[float] = Field(None, gt=1.0)
    a2: Optional[float] = Field(None, gt=1.0)
    rate: Optional[float] = Field(None, gt=0)
    q: Optional[float] = Field(None, ge=0.0, lt=1.0, description="geometric ratio")
    p: Optional[float] = Field(None, ge=0.0, le=1.0, description="Bernoulli success probability")
    value: Optional[int] = Field(None, ge=0, description="point mass location")
    pmf: Optional[list[float]] = None
    scale: Optional[float] = Field(None, gt=0, description="capped multiple of the tail")

    @field_validator("pmf")
    @classmethod
    def validate_pmf(cls, v):
        if v is None:
            return v
        if not v:
            raise ValueError("pmf must not be empty")
        if any(p < 0.0 for p in v):
            raise ValueError("pmf entries must be non-negative")
        if abs(math.fsum(v) - 1.0) > 1e-9:
            raise ValueError(f"pmf must sum to 1, got {math.fsum(v):.12g}")
        return v

    @model_validator(mode="after")
    def check_parameters(self):
        needed = {
            "pareto": ("alpha",),
            "erv_cycle": ("c", "a1", "a2"),
            "exponential": ("rate",),
            "geometric": ("q",),
            "bernoulli": ("p",),
            "point": ("value",),
            "table": ("pmf",),
        }[self.kind]
        missing = [name for name in needed if getattr(self, name) is None]
        if missing:
            raise ValueError(f"kind '{self.kind}' needs {', '.join(missing)}")
        if self.kind == "erv_cycle" and not self.a1 < self.a2:
            raise ValueError("erv_cycle needs a1 < a2")
        if self.scale is not None and self.kind not in TAIL_KINDS:
            raise ValueError(f"scale applies to tail kinds only, not '{self.kind}'")
        return self


class TailSpec(DistSpec):
    """Reference tail function: pareto, erv_cycle or exponential."""

    @field_validator("kind")
    @classmethod
    def validate_kind(cls, v):
        if v not in TAIL_KINDS:
            raise ValueError(f"a tail must be one of {', '.join(TAIL_KINDS)}, got '{v}'")
        return v


class ModelSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    A: DistSpec
    B: DistSpec
    G: Optional[TailSpec] = Field(None, description="reference tail; omitted for a light model")


class QueueSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    k: int = Field(1, ge=1, description="permanent customers")
    p: float = Field(..., ge=0.0, lt=1.0, description="rejoin probability")
    xi: DistSpec
    G: Optional[TailSpec] = None
    mode: Literal["reduced", "direct"] = "reduced"


class SecondOrderSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    A: DistSpec
    B1: DistSpec
    B2: DistSpec
    G: Optional[TailSpec] = None


class ContinuousDistSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["point", "exponential", "pareto"]
    value: float = Field(0.0, ge=0.0)
    rate: float = Field(1.0, gt=0.0)
    alpha: float = Field(2.0, gt=0.0)
    floor: float = Field(1.0, gt=0.0)


class ContinuousSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    A: ContinuousDistSpec
    lam: float = Field(..., gt=0.0, description="Poisson intensity per unit of state")
    B: ContinuousDistSpec


class SigmaSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["fixed", "first_passage"] = "fixed"
    n: int = Field(1, ge=1)
    K: float = Field(0.0, ge=0.0)
    n_max: int = Field(10_000, ge=1)


class OracleSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    xi: DistSpec
    drift_shift: float
    sigma: SigmaSpec = Field(default_factory=SigmaSpec)


class GridSpec(BaseModel):
    """Log-spaced grid of x values."""

    model_config = ConfigDict(extra="forbid")

    x_min: float = Field(10.0, gt=0.0)
    x_max: float = Field(1000.0, gt=0.0)
    count: int = Field(40, ge=2)

    @field_validator("x_max")
    @classmethod
    def validate_x_max(cls, v, info: ValidationInfo):
        lo = info.data.get("x_min")
        if lo is not None and not v > lo:
            raise ValueError(f"x_max {v:g} must exceed x_min {lo:g}")
        return v

    def points(self) -> np.ndarray:
        return np.geomspace(self.x_min, self.x_max, self.count)


class SimSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    replications: int = Field(100_000, ge=1)
    burn_in: Optional[int] = Field(None, ge=0)
    chain_length: int = Field(1, ge=1)
    seed: int = Field(0, ge=0, lt=2**64)
    workers: int = Field(1, ge=1)
    block_size: int = Field(65_536, ge=1)
    record: Literal["final", "trajectory"] = "final"
    thin: int = Field(1, ge=1)
    hybrid: bool = False
    hybrid_threshold: int = Field(256, ge=1)

    def to_config(self) -> SimConfig:
        return SimConfig(**self.model_dump())


class ExperimentSpec(BaseModel):
    """One experiment: a single subject, a grid, a simulation plan and the stages to run."""

    model_config = ConfigDict(extra="forbid")

    model: Optional[ModelSpec] = None
    queue: Optional[QueueSpec] = None
    second_order: Optional[SecondOrderSpec] = None
    continuous: Optional[ContinuousSpec] = None
    tail: Optional[TailSpec] = None
    oracle: Optional[OracleSpec] = None

    grid: GridSpec = Field(default_factory=GridSpec)
    sim: SimSpec = Field(default_factory=SimSpec)
    out_dir: str = "out"
    stages: list[str] = Field(default_factory=lambda: ["stability", "conditions", "predict"])
    tol: float = Field(1e-12, gt=0.0, lt=1.0, description="relative tolerance of tail sums")
    window: float = Field(DEFAULT_WINDOW, gt=0.0, le=1.0, description="far-grid fraction")
    truncation: int = Field(1024, ge=1, description="exact solver support bound N")
    leak_budget: float = Field(1e-8, gt=0.0)
    tv_support: int = Field(256, ge=1, description="pmf points compared in the TV distance")

    @field_validator("stages")
    @classmethod
    def validate_stages(cls, v):
        unknown = [s for s in v if s not in STAGES]
        if unknown:
            raise ValueError(f"unknown stages {unknown}; choose from {', '.join(STAGES)}")
        # run order is fixed, duplicates dropped
        return [s for s in STAGES if s in v]

    @model_validator(mode="after")
    def check_subject(self):
        present = [name for name in SUBJECTS if getattr(self, name) is not None]
        if len(present) != 1:
            raise ValueError(f"exactly one of {', '.join(SUBJECTS)} is required, got {present or 'none'}")
        return self

    @property
    def subject(self) -> str:
        return next(name for name in SUBJECTS if getattr(self, name) is not None)


# ---------------------------------------------------------------------------
# builders
# ---------------------------------------------------------------------------

# Dispatch map from tail kind to its constructor.
_TAIL_BUILDERS = {
    "pareto": lambda s: make_pareto(s.alpha, s.floor),
    "erv_cycle": lambda s: make_erv_cycle(s.c, s.a1, s.a2),
    "exponential": lambda s: make_exponential(s.rate),
}

# Dispatch map from integer kind to its constructor.
_DIST_BUILDERS = {
    "geometric": lambda s: Geometric(s.q),
    "bernoulli": lambda s: Bernoulli(s.p),
    "point": lambda s: PointMass(s.value),
    "table": lambda s: TableDist(s.pmf),
}


def build_tail(spec: DistSpec) -> TailFunction:
    t = _TAIL_BUILDERS[spec.kind](spec)
    return t if spec.scale is None else scale_tail(t, spec.scale)


def build_dist(spec: DistSpec) -> DiscreteDist:
    if spec.kind in TAIL_KINDS:
        return discretize(build_tail(spec))
    return _DIST_BUILDERS[spec.kind](spec)


def build_fixed_point(spec: ModelSpec, x_grid, window: float = DEFAULT_WINDOW) -> FixedPointModel:
    G = build_tail(spec.G) if spec.G is not None else None
    return build_model(build_dist(spec.A), build_dist(spec.B), G, x_grid, window)


def build_queue(spec: QueueSpec) -> QueueModel:
    return QueueModel(k=spec.k, p=spec.p, xi=build_dist(spec.xi))


def build_queue_model(spec: QueueSpec, x_grid, window: float = DEFAULT_WINDOW) -> FixedPointModel:
    G = build_tail(spec.G) if spec.G is not None else None
    return queue_to_model(build_queue(spec), G, x_grid, window)


def build_two_lag(spec: SecondOrderSpec, x_grid, window: float = DEFAULT_WINDOW) -> SecondOrderModel:
    G = build_tail(spec.G) if spec.G is not None else None
    return build_second_order(build_dist(spec.A), build_dist(spec.B1), build_dist(spec.B2), G, x_grid, window)


def build_continuous(spec: ContinuousDistSpec) -> ContinuousDist:
    return ContinuousDist(**spec.model_dump())


def build_sigma(spec: SigmaSpec) -> SigmaRule:
    return SigmaRule(**spec.model_dump())


def load_experiment(path) -> ExperimentSpec:
    """Read and validate an experiment JSON file. The file is only read."""
    path = Path(path)
    LOGGER.debug(f"loading experiment from {path}")
    return ExperimentSpec.model_validate_json(path.read_text())
