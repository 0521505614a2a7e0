"""Seed derivation.

Every random quantity in the lab is drawn from a stream derived from one
root seed through ``numpy.random.SeedSequence`` spawn keys.  The spawn
key is ``(*indices, purpose)`` where ``purpose`` is one of the constants
below and ``indices`` identify the replication (grid point, outer label
draw, inner replication, ...).  Sampling functions accept either a bare
root seed or a tuple ``(root, *indices)``; they append their purpose
constant themselves.  Two calls with the same root and key yield
bit-identical streams, so graphs, weights, beliefs and signals are
independently reproducible.
"""

import numpy as np

LABELS = 0
EDGES = 1
WEIGHTS = 2
BELIEFS = 3
INIT = 4
SIGNALS = 5
STATIONARY = 6
TREE = 7
VALUES = 8
CONCENTRATION = 9


def substream(seed, *key):
    """Generator for replication/purpose ``key`` derived from ``seed``,
    which is a root integer or a tuple ``(root, *indices)``."""
    if isinstance(seed, tuple):
        root, prefix = seed[0], tuple(int(k) for k in seed[1:])
    else:
        root, prefix = seed, ()
    seq = np.random.SeedSequence(int(root), spawn_key=prefix + tuple(int(k) for k in key))
    return np.random.default_rng(seq)


def as_generator(seed_or_rng):
    """Accept either a raw seed or an existing Generator."""
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    return np.random.default_rng(seed_or_rng)
