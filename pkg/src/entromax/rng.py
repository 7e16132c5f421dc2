"""Counter-based random streams.

Every consumer asks for a stream by name (and an optional integer key), so
draws do not depend on the order in which streams are used or on how a
batch is split.  Streams are Philox generators keyed through
:class:`numpy.random.SeedSequence`.
"""
from zlib import crc32

import numpy as np

from .errors import ValidationError


class RandomStreams:
    """A family of independent generators derived from one integer seed.

    Parameters
    ----------
    seed : int
        Non-negative master seed.

    Notes
    -----
    ``stream(name, *key)`` returns the same generator object on repeated
    calls, so consecutive draws continue the stream rather than restart it.
    """

    def __init__(self, seed=0):
        seed = int(seed)
        if seed < 0:
            raise ValidationError("seed must be non-negative")
        self.seed = seed
        self._streams = {}

    def stream(self, name, *key):
        ident = (name,) + tuple(int(k) for k in key)
        gen = self._streams.get(ident)
        if gen is None:
            ss = np.random.SeedSequence(
                self.seed, spawn_key=(crc32(name.encode()),) + ident[1:]
            )
            gen = np.random.Generator(np.random.Philox(ss))
            self._streams[ident] = gen
        return gen

    def __repr__(self):
        return f"RandomStreams(seed={self.seed})"


def as_streams(rng):
    """Accept a :class:`RandomStreams` or an integer seed."""
    if isinstance(rng, RandomStreams):
        return rng
    if isinstance(rng, (int, np.integer)):
        return RandomStreams(int(rng))
    raise ValidationError(
        f"expected RandomStreams or an integer seed, got {type(rng).__name__}"
    )
