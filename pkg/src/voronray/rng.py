"""Deterministic, splittable random streams.

Every stochastic operation draws from a stream derived from
``(seed, purpose, index)`` so results are reproducible and independent of
scheduling or the order in which cells are processed.
"""

import numpy as np

_PURPOSES = {
    "descent": 0,
    "mc": 1,
    "bench": 2,
    "test": 3,
}


def stream(seed, purpose, index=0):
    """Return a ``numpy.random.Generator`` for the given (seed, purpose, index).

    Args:
        seed: base integer seed shared by a whole run.
        purpose: one of the registered purpose tags.
        index: substream index, typically a cell or instance number.
    """
    tag = _PURPOSES[purpose]
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(tag, index))
    return np.random.Generator(np.random.PCG64(ss))
