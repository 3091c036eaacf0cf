"""Reproducible random streams.

Every stream is a NumPy ``Generator`` over the counter-based Philox bit
generator, keyed by a ``SeedSequence`` whose spawn key encodes the
position of the stream in the experiment (cell, replicate, role). Streams
are therefore independent of the order in which replicates execute, and
Philox output is identical on every platform.
"""
import numpy as np

_MASK64 = (1 << 64) - 1


def substream(seed, *key):
    """Generator for the stream addressed by ``(seed, *key)``."""
    seed = int(seed)
    if seed < 0 or seed > _MASK64:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    ss = np.random.SeedSequence(entropy=seed, spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def rng_streams(seed, replicate):
    """Independent, reproducible stream for replicate ``replicate`` of ``seed``."""
    return substream(seed, replicate)


def as_generator(rng):
    """Accept a Generator, an int seed or None (seed 0)."""
    if isinstance(rng, np.random.Generator):
        return rng
    return substream(0 if rng is None else rng)
