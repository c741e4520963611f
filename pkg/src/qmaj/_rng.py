"""Seeded random streams.

Every random draw in the package comes from a Philox counter-based
generator keyed by one 64-bit seed, so instances are reproducible from the
seed alone.
"""

import numpy as np


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(int(seed) & 0xFFFFFFFFFFFFFFFF))


def instance_rng(seed: int, index: int) -> np.random.Generator:
    """Independent stream for instance ``index`` of a seeded batch."""
    ss = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, int(index)])
    return np.random.Generator(np.random.Philox(ss))
