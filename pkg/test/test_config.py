"""Tests for the experiment schemas and builders.

(C) 2025 Stephen Jenkins
"""

from pathlib import Path

import numpy as np
import pytest
from pydantic import ValidationError

from tails.config import (
    ContinuousDistSpec,
    DistSpec,
    ExperimentSpec,
    GridSpec,
    QueueSpec,
    SigmaSpec,
    TailSpec,
    build_continuous,
    build_dist,
    build_fixed_point,
    build_queue_model,
    build_sigma,
    build_tail,
    load_experiment,
)
from tails.dist import Bernoulli, TableDist, TailDiscreteDist
from tails.model import TailCase

EXAMPLE = Path(__file__).resolve().parents[1] / "exampleConfigFile.json"

LIGHT_MODEL = {"A": {"kind": "bernoulli", "p": 0.5}, "B": {"kind": "bernoulli", "p": 0.4}}


class TestDistSpec:
    """Tests for DistSpec and TailSpec validation."""

    @pytest.mark.parametrize(
        "data",
        [
            {"kind": "pareto"},
            {"kind": "erv_cycle", "c": 2.0, "a1": 2.5, "a2": 1.5},
            {"kind": "bernoulli", "p": 0.5, "scale": 2.0},
            {"kind": "table", "pmf": [0.5, 0.4]},
            {"kind": "table", "pmf": []},
            {"kind": "geometric", "q": 1.0},
            {"kind": "point", "value": 1, "colour": "red"},
            {"kind": "poisson", "rate": 1.0},
        ],
    )
    def test_invalid(self, data):
        """Test missing, inconsistent or unknown parameters are rejected."""
        with pytest.raises(ValidationError):
            DistSpec.model_validate(data)

    def test_tail_kind_restricted(self):
        """Test a reference tail must be a tail family."""
        with pytest.raises(ValidationError):
            TailSpec.model_validate({"kind": "bernoulli", "p": 0.5})
        assert TailSpec.model_validate({"kind": "pareto", "alpha": 2.0}).kind == "pareto"


class TestExperimentSpec:
    """Tests for ExperimentSpec."""

    def test_needs_one_subject(self):
        """Test zero or two subjects are rejected."""
        with pytest.raises(ValidationError):
            ExperimentSpec.model_validate({})
        with pytest.raises(ValidationError):
            ExperimentSpec.model_validate({"model": LIGHT_MODEL, "tail": {"kind": "pareto", "alpha": 2.0}})

    def test_stage_order(self):
        """Test stages are put in run order without duplicates."""
        spec = ExperimentSpec.model_validate({"model": LIGHT_MODEL, "stages": ["verify", "stability", "verify"]})
        assert spec.stages == ["stability", "verify"]
        assert spec.subject == "model"

    def test_unknown_stage(self):
        """Test unknown stage names are rejected."""
        with pytest.raises(ValidationError):
            ExperimentSpec.model_validate({"model": LIGHT_MODEL, "stages": ["plot"]})

    def test_defaults(self):
        """Test grid, sim and the numeric settings default sensibly."""
        spec = ExperimentSpec.model_validate({"model": LIGHT_MODEL})
        assert spec.grid.count == 40
        assert spec.sim.seed == 0 and spec.sim.workers == 1
        assert spec.tol == 1e-12
        assert spec.out_dir == "out"

    def test_dump_validates_to_equal_spec(self):
        """Test a resolved spec can be re-read from its own dump."""
        spec = load_experiment(EXAMPLE)
        again = ExperimentSpec.model_validate(spec.model_dump(mode="json"))
        assert again == spec

    def test_example_config(self):
        """Test the shipped example is the Pareto immigration benchmark."""
        spec = load_experiment(EXAMPLE)
        assert spec.subject == "model"
        assert spec.sim.replications == 10_000_000
        assert spec.stages == ["stability", "conditions", "predict", "simulate", "verify"]


class TestGridAndQueue:
    """Tests for GridSpec and QueueSpec."""

    def test_grid_points(self):
        """Test the grid is log-spaced from x_min to x_max."""
        pts = GridSpec(x_min=10.0, x_max=1000.0, count=3).points()
        np.testing.assert_allclose(pts, [10.0, 100.0, 1000.0])

    def test_grid_order(self):
        """Test x_max must exceed x_min."""
        with pytest.raises(ValidationError):
            GridSpec(x_min=10.0, x_max=10.0, count=3)

    def test_queue_p_below_one(self):
        """Test a rejoin probability of 1 is rejected."""
        with pytest.raises(ValidationError):
            QueueSpec.model_validate({"k": 1, "p": 1.0, "xi": {"kind": "bernoulli", "p": 0.1}})


class TestBuilders:
    """Tests for the schema to object builders."""

    def test_build_dist(self):
        """Test each kind builds the matching law."""
        assert isinstance(build_dist(DistSpec(kind="bernoulli", p=0.3)), Bernoulli)
        assert isinstance(build_dist(DistSpec(kind="table", pmf=[0.5, 0.5])), TableDist)
        d = build_dist(DistSpec(kind="pareto", alpha=2.5, scale=0.2))
        assert isinstance(d, TailDiscreteDist)
        assert d.mean == pytest.approx(0.2 * 2.341487257, rel=1e-8)

    def test_build_tail_scale(self):
        """Test scale wraps the tail."""
        t = build_tail(DistSpec(kind="erv_cycle", c=2.0, a1=1.5, a2=2.5, scale=0.5))
        assert t.total_factor == 0.5
        assert t.root.params["kind"] == "erv_cycle"

    def test_build_fixed_point(self):
        """Test the benchmark model assembles with D = 1."""
        spec = load_experiment(EXAMPLE)
        m = build_fixed_point(spec.model, spec.grid.points(), spec.window)
        assert m.case_label == TailCase.IMMIGRATION_ONLY
        assert m.D == pytest.approx(1.0)

    def test_build_queue_model(self):
        """Test the queue spec maps with its reference tail."""
        spec = QueueSpec.model_validate(
            {
                "k": 2,
                "p": 0.3,
                "xi": {"kind": "pareto", "alpha": 2.5, "scale": 0.1},
                "G": {"kind": "pareto", "alpha": 2.5},
            }
        )
        m = build_queue_model(spec, np.geomspace(10.0, 1000.0, 20))
        assert m.c1 == pytest.approx(0.2)
        assert m.c2 == pytest.approx(0.1)

    def test_build_continuous_and_sigma(self):
        """Test the continuous law and the stopping rule."""
        assert build_continuous(ContinuousDistSpec(kind="exponential", rate=2.0)).mean == 0.5
        assert build_sigma(SigmaSpec(kind="first_passage", K=1.0, n_max=100)).horizon == 100
