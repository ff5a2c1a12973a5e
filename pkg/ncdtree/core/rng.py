"""Seeded random generators.

All randomized code draws from numpy's PCG64 bit generator (PCG-XSL-RR 128/64),
which is portable across platforms, so the same seed yields the same trees,
corpora and traces everywhere. Wall-clock seeding is never used.
"""
from typing import List

import numpy as np

from ncdtree.core.exceptions import InvalidInput


def check_seed(seed: int) -> int:
    if seed < 0:
        raise InvalidInput(f"seed must be a non-negative integer, got {seed}", details={"seed": seed})
    return seed


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(check_seed(seed)))


def spawn_rngs(seed: int, count: int) -> List[np.random.Generator]:
    """Independent child generators for parallel workers."""
    children = np.random.SeedSequence(check_seed(seed)).spawn(count)
    return [np.random.Generator(np.random.PCG64(child)) for child in children]
