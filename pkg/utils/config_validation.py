"""Configuration validation utilities for bpi-tails.

This module checks command-line and environment values before any work
starts, so a bad flag fails fast with a readable message.

(C) 2025 Stephen Jenkins
"""

import re
import logging
from typing import Mapping

LOGGER = logging.getLogger(__name__)

ENV_PREFIX = "BPI_TAILS_"
ENV_KEYS = ("SEED", "WORKERS", "REPLICATIONS", "BURN_IN", "TOL", "GRID", "OUT_DIR")

_NUMBER = r"[-+]?(\d+(\.\d*)?|\.\d+)([eE][-+]?\d+)?"


def validate_grid(text: str) -> tuple[bool, str]:
    """Validate a log-spaced grid given as 'min,max,count'.

    Args:
        text: grid string

    Returns:
        Tuple of (is_valid, error_message)

    Examples:
        >>> validate_grid("10,1000,40")
        (True, "")
        >>> validate_grid("10,1000")
        (False, "Invalid grid...")
    """
    if not text:
        return False, "Grid is required as min,max,count"

    text = text.strip()
    pattern = rf"^\s*({_NUMBER})\s*,\s*({_NUMBER})\s*,\s*(\d+)\s*$"
    match = re.match(pattern, text)
    if not match:
        return False, (
            f"Invalid grid: '{text}'. "
            "Expected format: min,max,count (for example 10,1000,40)"
        )

    lo, hi, count = float(match.group(1)), float(match.group(5)), int(match.group(9))
    if lo <= 0.0:
        return False, f"Grid minimum must be positive, got {lo:g}"
    if hi <= lo:
        return False, f"Grid maximum {hi:g} must exceed the minimum {lo:g}"
    if count < 2:
        return False, f"Grid needs at least 2 points, got {count}"

    LOGGER.debug(f"Grid valid: {lo:g}..{hi:g} with {count} points")
    return True, ""


def parse_grid(text: str) -> tuple[float, float, int]:
    """Split a grid string already accepted by validate_grid."""
    lo, hi, count = (part.strip() for part in text.split(","))
    return float(lo), float(hi), int(count)


def validate_seed(value) -> tuple[bool, str]:
    """Validate a 64-bit unsigned seed."""
    try:
        seed = int(str(value).strip())
    except (TypeError, ValueError):
        return False, f"Seed must be an integer, got '{value}'"
    if not 0 <= seed < 2**64:
        return False, f"Seed must be in [0, 2^64), got {seed}"

    LOGGER.debug(f"Seed valid: {seed}")
    return True, ""


def validate_count(value, name: str, minimum: int = 1) -> tuple[bool, str]:
    """Validate an integer count such as workers, replications or burn-in."""
    try:
        count = int(str(value).strip())
    except (TypeError, ValueError):
        return False, f"{name} must be an integer, got '{value}'"
    if count < minimum:
        return False, f"{name} must be >= {minimum}, got {count}"

    LOGGER.debug(f"{name} valid: {count}")
    return True, ""


def validate_tol(value) -> tuple[bool, str]:
    """Validate a positive tolerance."""
    try:
        tol = float(str(value).strip())
    except (TypeError, ValueError):
        return False, f"Tolerance must be a number, got '{value}'"
    if not 0.0 < tol < 1.0:
        return False, f"Tolerance must be in (0, 1), got {tol:g}"

    LOGGER.debug(f"Tolerance valid: {tol:g}")
    return True, ""


def validate_out_dir(value) -> tuple[bool, str]:
    """Validate an output directory path (created later if missing)."""
    if value is None or not str(value).strip():
        return False, "Output directory must not be empty"
    if "\n" in str(value) or "\r" in str(value):
        return False, "Output directory contains line breaks"

    LOGGER.debug(f"Output directory valid: {value}")
    return True, ""


# Dispatch map from environment key to (validator, converter).
_ENV_MAP = {
    "SEED": (validate_seed, int),
    "WORKERS": (lambda v: validate_count(v, "workers"), int),
    "REPLICATIONS": (lambda v: validate_count(v, "replications"), int),
    "BURN_IN": (lambda v: validate_count(v, "burn_in", minimum=0), int),
    "TOL": (validate_tol, float),
    "GRID": (validate_grid, parse_grid),
    "OUT_DIR": (validate_out_dir, str),
}


def read_env_overrides(environ: Mapping[str, str]) -> tuple[dict, list[str]]:
    """Collect BPI_TAILS_* overrides.

    Returns:
        Tuple of (overrides keyed by lower-case name, error messages)
    """
    overrides: dict = {}
    errors: list[str] = []
    for key in ENV_KEYS:
        raw = environ.get(ENV_PREFIX + key)
        if raw is None or raw == "":
            continue
        validator, convert = _ENV_MAP[key]
        ok, message = validator(raw)
        if not ok:
            errors.append(f"{ENV_PREFIX}{key}: {message}")
            continue
        overrides[key.lower()] = convert(raw)
    if overrides:
        LOGGER.debug(f"Environment overrides: {sorted(overrides)}")
    return overrides, errors
