"""Seeded random streams.

All stochastic routines take an explicit seed and derive independent
counter-based (Philox) streams from it, so every run is bit-reproducible
and replicas/workers can be given non-overlapping streams cheaply.
"""

import numpy as np


def stream(seed, *path):
    """Return a Generator on an independent Philox stream.

    ``path`` is a tuple of small integers naming the sub-stream, e.g.
    ``stream(seed, 2, worker)``.  The same (seed, path) always yields the
    same stream; distinct paths are statistically independent.
    """
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(p) for p in path))
    return np.random.Generator(np.random.Philox(ss))


def substreams(seed, n, *path):
    """n independent streams under a common path prefix."""
    return [stream(seed, *path, i) for i in range(n)]
