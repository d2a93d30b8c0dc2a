"""Tests for the time utility module.

(C) 2025 Stephen Jenkins
"""

import time
from datetime import datetime, timezone

from utils.time import Stopwatch, get_iso_utc_now


class TestGetIsoUtcNow:
    """Tests for get_iso_utc_now function."""

    def test_ends_with_z(self):
        """Test that result ends with 'Z' suffix."""
        assert get_iso_utc_now().endswith("Z")

    def test_contains_milliseconds(self):
        """Test that result carries three millisecond digits."""
        ms_part = get_iso_utc_now().split(".")[-1].rstrip("Z")
        assert len(ms_part) == 3

    def test_is_current_utc(self):
        """Test that the timestamp parses and is close to now."""
        dt = datetime.fromisoformat(get_iso_utc_now().replace("Z", "+00:00"))
        assert dt.tzinfo is not None
        assert abs((datetime.now(timezone.utc) - dt).total_seconds()) < 5


class TestStopwatch:
    """Tests for the Stopwatch context manager."""

    def test_zero_before_start(self):
        """Test elapsed is 0 before the watch is entered."""
        assert Stopwatch().elapsed == 0.0

    def test_frozen_after_exit(self):
        """Test elapsed stops moving after the block exits."""
        with Stopwatch() as watch:
            time.sleep(0.01)
        first = watch.elapsed
        time.sleep(0.01)
        assert first >= 0.009
        assert watch.elapsed == first

    def test_live_while_running(self):
        """Test elapsed grows inside the block."""
        with Stopwatch() as watch:
            a = watch.elapsed
            time.sleep(0.005)
            assert watch.elapsed > a

    def test_exception_not_swallowed(self):
        """Test the watch does not suppress exceptions."""
        watch = Stopwatch()
        try:
            with watch:
                raise KeyError("boom")
        except KeyError:
            pass
        else:
            raise AssertionError("exception was swallowed")
        assert watch.elapsed >= 0.0
