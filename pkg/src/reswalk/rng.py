"""Deterministic counter-based random streams.

Every value is a pure function of (key, stream_id, counter): a 64-bit
avalanche mix applied to an affine combination of the three. Streams carry
no shared state, so any number of logical lanes can draw concurrently and
any draw can be replayed by rebuilding the stream at the same counter.

The same mixing constants are re-implemented inside the compiled kernels
(see ``_kernels``); ``tests/test_kernels.py`` pins the two implementations
to bit-identical output.
"""

import numpy as np

MASK64 = 0xFFFFFFFFFFFFFFFF
GOLDEN = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB

# top 53 bits of the mix become the mantissa; output is in [0, 1 - 2^-53]
_INV53 = 1.0 / (1 << 53)


def mix64(z):
    """Avalanche finalizer: bijective on 64-bit ints, all bits influence all."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * MIX1) & MASK64
    z = ((z ^ (z >> 27)) * MIX2) & MASK64
    return z ^ (z >> 31)


def stream_base(key, stream_id):
    """Per-stream offset; distinct (key, stream_id) land far apart."""
    h = mix64((key & MASK64) + GOLDEN)
    return mix64(h ^ ((stream_id & MASK64) * MIX1 & MASK64))


def value_at(key, stream_id, counter):
    """The raw map: uniform double in [0, 1) for one (key, stream, counter)."""
    z = mix64((stream_base(key, stream_id) + (counter & MASK64) * GOLDEN) & MASK64)
    return (z >> 11) * _INV53


class RngStream:
    """One logical lane of randomness.

    ``next_uniform`` advances the counter by exactly one; ``next_block(n)``
    advances it by n and is bit-identical to n scalar calls.
    """

    __slots__ = ("key", "stream_id", "counter", "_base")

    def __init__(self, key, stream_id, counter=0):
        self.key = key & MASK64
        self.stream_id = stream_id & MASK64
        self.counter = counter
        self._base = stream_base(key, stream_id)

    def next_uniform(self):
        z = mix64((self._base + (self.counter & MASK64) * GOLDEN) & MASK64)
        self.counter += 1
        return (z >> 11) * _INV53

    def next_block(self, n):
        ctrs = (np.uint64(self._base) +
                (np.arange(self.counter, self.counter + n, dtype=np.uint64)) *
                np.uint64(GOLDEN))
        self.counter += n
        z = ctrs
        z = (z ^ (z >> np.uint64(30))) * np.uint64(MIX1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(MIX2)
        z = z ^ (z >> np.uint64(31))
        return (z >> np.uint64(11)).astype(np.float64) * _INV53

    def clone(self):
        return RngStream(self.key, self.stream_id, self.counter)

    def __repr__(self):
        return (f"RngStream(key={self.key:#x}, stream={self.stream_id:#x}, "
                f"counter={self.counter})")


def make_stream(seed, stream_id):
    """Build the stream for one logical lane; pure in (seed, stream_id)."""
    return RngStream(seed, stream_id)


class SequenceStream:
    """Stream stand-in that replays a fixed list of draws (tests, oracles)."""

    def __init__(self, values):
        self.values = list(values)
        self.pos = 0

    def next_uniform(self):
        v = self.values[self.pos]
        self.pos += 1
        return v

    def remaining(self):
        return len(self.values) - self.pos
