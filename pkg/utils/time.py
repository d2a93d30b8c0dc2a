#!/usr/bin/env python3
"""
Timing helpers for run summaries.

utils/time.py for bpi-tails

(C) 2025 Stephen Jenkins

"""

# standard imports
import time
from datetime import datetime, timezone


def get_iso_utc_now():
    """Returns current UTC time in ISO 8601 format with 'Z' suffix and millisecond precision."""
    return (
        datetime.now(timezone.utc)
        .isoformat(timespec="milliseconds")
        .replace("+00:00", "Z")
    )


class Stopwatch:
    """Wall-clock timer usable as a context manager.

    ``elapsed`` is live while running and frozen after exit.
    """

    def __init__(self):
        self._start = None
        self._stop = None

    def __enter__(self):
        self._start = time.perf_counter()
        self._stop = None
        return self

    def __exit__(self, *exc):
        self._stop = time.perf_counter()
        return False

    @property
    def elapsed(self) -> float:
        if self._start is None:
            return 0.0
        end = self._stop if self._stop is not None else time.perf_counter()
        return end - self._start
