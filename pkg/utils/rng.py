#!/usr/bin/env python3
"""
Deterministic random streams for parallel simulation.

A simulation is split into fixed-size blocks of replications. Each block gets
its own generator keyed by (seed, stream, block index), so the sample stream is
a pure function of the seed and the block layout and never of how many workers
ran the blocks.

utils/rng.py for bpi-tails

(C) 2025 Stephen Jenkins

"""

# standard imports
import logging
from typing import Iterator

# external imports
import numpy as np

LOGGER = logging.getLogger(__name__)

# stream ids keep engines that share a seed from sharing draws
STREAMS = {
    "chain": 1,
    "continuous": 2,
    "second_order": 3,
    "queue_direct": 4,
    "walk_max": 5,
}


def block_generator(seed: int, stream: str, block: int) -> np.random.Generator:
    """Return the generator for one replication block.

    Args:
        seed: 64-bit experiment seed
        stream: engine name, a key of STREAMS
        block: block index, 0-based

    Returns:
        numpy Generator on a Philox bit generator seeded from the
        (seed, stream, block) counter mix.
    """
    try:
        stream_id = STREAMS[stream]
    except KeyError:
        LOGGER.error(f"Unknown random stream: {stream!r}")
        raise ValueError(f"unknown random stream {stream!r}") from None
    seq = np.random.SeedSequence(entropy=int(seed) & (2**64 - 1), spawn_key=(stream_id, block))
    return np.random.Generator(np.random.Philox(seq))


def block_sizes(replications: int, block_size: int) -> Iterator[tuple[int, int]]:
    """Yield (block index, replications in block) covering ``replications``."""
    if block_size <= 0:
        raise ValueError("block_size must be positive")
    full, rest = divmod(replications, block_size)
    for i in range(full):
        yield i, block_size
    if rest:
        yield full, rest
