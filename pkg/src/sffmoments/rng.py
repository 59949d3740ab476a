"""Deterministic per-sample random streams.

Every Monte Carlo sample gets its own stream, derived from a 64-bit master
seed and the sample index, so results do not depend on how samples are
distributed over workers.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidParameterError

_MASK64 = (1 << 64) - 1
_GOLDEN_GAMMA = 0x9E3779B97F4A7C15


def splitmix64_mix(x: int) -> int:
    """SplitMix64 finishing function (Steele/Lea/Flood avalanche mixer)."""
    x &= _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def derive_stream_seed(master_seed: int, stream_index: int) -> int:
    """Mix a stream index into the master seed.

    Distinct indices land in uncorrelated regions of the seed space thanks to
    the avalanche properties of the SplitMix64 mixer.
    """
    if stream_index < 0:
        raise InvalidParameterError("stream_index must be non-negative")
    x = (master_seed + _GOLDEN_GAMMA * (stream_index + 1)) & _MASK64
    return splitmix64_mix(x)


class RngStream:
    """A single-owner random stream bound to (master_seed, stream_index).

    Identical (master_seed, stream_index) pairs reproduce the identical draw
    sequence.  Streams are never shared between workers; each is handed whole
    to exactly one consumer.
    """

    __slots__ = ("master_seed", "stream_index", "_gen")

    def __init__(self, master_seed: int, stream_index: int = 0):
        self.master_seed = int(master_seed) & _MASK64
        self.stream_index = int(stream_index)
        seed = derive_stream_seed(self.master_seed, self.stream_index)
        self._gen = np.random.Generator(np.random.PCG64(seed))

    def standard_normal(self, size=None):
        return self._gen.standard_normal(size)

    def uniform(self, low=0.0, high=1.0, size=None):
        return self._gen.uniform(low, high, size)

    def __repr__(self):
        return f"RngStream(master_seed={self.master_seed}, stream_index={self.stream_index})"


def complex_gaussian(stream: RngStream, variance: float, size=None):
    """Circularly symmetric complex Gaussian draws with E|z|^2 = variance.

    Real and imaginary parts are independent normals of variance
    ``variance / 2``.  With ``size=None`` a single complex scalar is
    returned, otherwise an array of the requested shape.
    """
    if not variance > 0:
        raise InvalidParameterError(f"variance must be positive, got {variance}")
    scale = np.sqrt(variance / 2.0)
    if size is None:
        g = stream.standard_normal(2)
        return complex(scale * g[0], scale * g[1])
    shape = (size,) if np.isscalar(size) else tuple(size)
    g = stream.standard_normal((2,) + shape)
    return scale * (g[0] + 1j * g[1])
