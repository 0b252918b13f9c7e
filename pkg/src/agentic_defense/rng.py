"""Named random streams derived from a run seed.

Every consumer of randomness (train traffic, eval traffic, exploration,
baseline coin flips) gets its own generator keyed by ``(seed, purpose)``,
so changing how much one consumer draws never shifts another's sequence.
"""

from __future__ import annotations

import zlib

import numpy as np

TRAIN_TRAFFIC = "traffic/train"
EVAL_TRAFFIC = "traffic/eval"
TRAIN_EXPLORE = "explore/train"
EVAL_EXPLORE = "explore/eval"
BASELINE = "baseline/eval"


def stream(seed: int, purpose: str) -> np.random.Generator:
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    tag = zlib.crc32(purpose.encode("utf-8"))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, tag])))
