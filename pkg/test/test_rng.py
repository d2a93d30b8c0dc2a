"""Tests for the deterministic random streams.

(C) 2025 Stephen Jenkins
"""

import numpy as np
import pytest

from utils.rng import STREAMS, block_generator, block_sizes


class TestBlockGenerator:
    """Tests for block_generator."""

    def test_same_key_same_draws(self):
        """Test identical (seed, stream, block) reproduce the stream."""
        a = block_generator(7, "chain", 3).random(5)
        b = block_generator(7, "chain", 3).random(5)
        np.testing.assert_array_equal(a, b)

    @pytest.mark.parametrize("other", [(8, "chain", 3), (7, "walk_max", 3), (7, "chain", 4)])
    def test_any_key_change_changes_draws(self, other):
        """Test seed, stream and block all enter the key."""
        a = block_generator(7, "chain", 3).random(5)
        b = block_generator(*other).random(5)
        assert not np.array_equal(a, b)

    def test_unknown_stream(self):
        """Test an unknown stream name raises ValueError."""
        with pytest.raises(ValueError):
            block_generator(0, "nope", 0)

    def test_large_seed(self):
        """Test seeds up to 2^64 - 1 are accepted."""
        assert block_generator(2**64 - 1, "chain", 0).integers(10) in range(10)

    def test_stream_ids_unique(self):
        """Test no two engines share a stream id."""
        assert len(set(STREAMS.values())) == len(STREAMS)


class TestBlockSizes:
    """Tests for block_sizes."""

    def test_covers_replications(self):
        """Test blocks add up to the replication count."""
        blocks = list(block_sizes(10, 4))
        assert blocks == [(0, 4), (1, 4), (2, 2)]

    def test_exact_multiple(self):
        """Test no empty trailing block."""
        assert list(block_sizes(8, 4)) == [(0, 4), (1, 4)]

    def test_bad_block_size(self):
        """Test non-positive block size raises."""
        with pytest.raises(ValueError):
            list(block_sizes(10, 0))
