"""
Seeded random streams.

Every consumer receives its own numpy Generator backed by Philox, a
64-bit counter-based bit generator. Streams are derived from
(seed, index) through SeedSequence, so restart k or partition k draws
the same numbers no matter how many workers run alongside it.
"""
import numpy as np


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def stream(seed: int, index: int) -> np.random.Generator:
    """Private stream number ``index`` of ``seed``"""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(index,))))