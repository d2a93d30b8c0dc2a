"""Tests for the config validation module.

(C) 2025 Stephen Jenkins
"""

import pytest

from utils.config_validation import (
    ENV_PREFIX,
    parse_grid,
    read_env_overrides,
    validate_count,
    validate_grid,
    validate_out_dir,
    validate_seed,
    validate_tol,
)


class TestValidateGrid:
    """Tests for validate_grid."""

    @pytest.mark.parametrize("text", ["10,1000,40", " 30 , 300 , 25 ", "1e1,1e3,2", "0.5,2.5,3"])
    def test_valid(self, text):
        """Test well-formed grids pass."""
        assert validate_grid(text) == (True, "")

    @pytest.mark.parametrize(
        "text,fragment",
        [
            ("", "required"),
            ("10,1000", "Invalid grid"),
            ("a,b,c", "Invalid grid"),
            ("0,10,5", "positive"),
            ("100,10,5", "exceed"),
            ("10,100,1", "at least 2"),
            ("10,100,2.5", "Invalid grid"),
        ],
    )
    def test_invalid(self, text, fragment):
        """Test malformed grids fail with a readable message."""
        ok, message = validate_grid(text)
        assert ok is False
        assert fragment in message

    def test_parse_grid(self):
        """Test parse_grid returns typed parts."""
        assert parse_grid("30, 300, 25") == (30.0, 300.0, 25)


class TestScalarValidators:
    """Tests for seed, count, tolerance and directory validators."""

    def test_seed_range(self):
        """Test the seed must fit in 64 unsigned bits."""
        assert validate_seed("0")[0] is True
        assert validate_seed(2**64 - 1)[0] is True
        assert validate_seed(2**64)[0] is False
        assert validate_seed(-1)[0] is False
        assert validate_seed("seven")[0] is False

    def test_count_minimum(self):
        """Test counts respect their minimum."""
        assert validate_count("4", "workers") == (True, "")
        ok, message = validate_count("0", "workers")
        assert ok is False and "workers" in message
        assert validate_count("0", "burn_in", minimum=0)[0] is True
        assert validate_count("1.5", "replications")[0] is False

    def test_tol_open_interval(self):
        """Test the tolerance lies strictly between 0 and 1."""
        assert validate_tol("1e-12")[0] is True
        assert validate_tol("0")[0] is False
        assert validate_tol("1")[0] is False
        assert validate_tol("x")[0] is False

    def test_out_dir(self):
        """Test empty or multi-line directories are rejected."""
        assert validate_out_dir("out/run1")[0] is True
        assert validate_out_dir("  ")[0] is False
        assert validate_out_dir(None)[0] is False
        assert validate_out_dir("a\nb")[0] is False


class TestEnvOverrides:
    """Tests for read_env_overrides."""

    def test_reads_and_converts(self):
        """Test known keys are converted and unknown ones ignored."""
        env = {
            ENV_PREFIX + "SEED": "42",
            ENV_PREFIX + "WORKERS": "8",
            ENV_PREFIX + "GRID": "30,300,25",
            ENV_PREFIX + "TOL": "1e-10",
            ENV_PREFIX + "OTHER": "ignored",
            "PATH": "/usr/bin",
        }
        overrides, errors = read_env_overrides(env)
        assert errors == []
        assert overrides == {"seed": 42, "workers": 8, "grid": (30.0, 300.0, 25), "tol": 1e-10}

    def test_collects_errors(self):
        """Test bad values are reported, not converted."""
        overrides, errors = read_env_overrides({ENV_PREFIX + "REPLICATIONS": "0", ENV_PREFIX + "BURN_IN": "5"})
        assert overrides == {"burn_in": 5}
        assert len(errors) == 1 and "REPLICATIONS" in errors[0]

    def test_empty_values_skipped(self):
        """Test empty strings count as unset."""
        assert read_env_overrides({ENV_PREFIX + "SEED": ""}) == ({}, [])
