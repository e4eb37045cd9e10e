"""Counter-based random streams for reproducible parallel replicates.

Every replicate owns a bundle of independent Philox4x64 streams, one per
purpose (initial sampling, event clocks, event selection, lesion motion,
irradiation source). Streams are keyed by (master_seed, replicate*8 + purpose),
so derivation is collision-free by construction and independent of the order
in which replicates run.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

RNG_ALGORITHM = "numpy.random.Philox (Philox4x64), key=(master_seed, replicate*8+purpose)"

# Purpose offsets within a replicate's stream block.
PURPOSE_INIT = 0
PURPOSE_CLOCK = 1
PURPOSE_SELECT = 2
PURPOSE_MOTION = 3
PURPOSE_SOURCE = 4

_STREAMS_PER_REPLICATE = 8

_MASK64 = (1 << 64) - 1


def substream(master_seed: int, stream_id: int) -> np.random.Generator:
    """Independent generator for the given stream id under a master seed."""
    key = np.array([master_seed & _MASK64, stream_id & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


@dataclass(frozen=True)
class ReplicateStreams:
    """The per-purpose generators owned by a single replicate."""

    init: np.random.Generator
    clock: np.random.Generator
    select: np.random.Generator
    motion: np.random.Generator
    source: np.random.Generator


def replicate_streams(master_seed: int, replicate: int) -> ReplicateStreams:
    base = replicate * _STREAMS_PER_REPLICATE
    return ReplicateStreams(
        init=substream(master_seed, base + PURPOSE_INIT),
        clock=substream(master_seed, base + PURPOSE_CLOCK),
        select=substream(master_seed, base + PURPOSE_SELECT),
        motion=substream(master_seed, base + PURPOSE_MOTION),
        source=substream(master_seed, base + PURPOSE_SOURCE),
    )
