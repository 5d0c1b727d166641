"""Counter-based random streams keyed by (seed, purpose, entity, counter).

Every stochastic quantity in a simulation is drawn from a stream addressed by
a 4-tuple key, never from a shared sequential generator.  Two draws with the
same key are identical; draws with different keys are statistically
independent.  This makes results reproducible bit-for-bit and independent of
the order in which entities (synapses, neurons, realizations) are evaluated.

The generator is a splitmix64 chain over the key words.  It is compiled with
numba so the simulation kernel can draw noise per synapse event without
leaving machine code.
"""

from __future__ import annotations

import numpy as np
from numba import njit, uint64

# purpose tags; distinct constants keep streams for different uses disjoint
TAG_WRITE_NOISE = 0x1
TAG_READ_NOISE = 0x2
TAG_DEVICE_INIT = 0x3
TAG_TOPOLOGY = 0x4
TAG_FIRST_SUBSET = 0x5
TAG_FAILURE = 0x6
TAG_GENERIC = 0x7

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)


@njit(uint64(uint64), cache=True, inline="always")
def _mix(z):
    z = (z + _GOLDEN) & uint64(0xFFFFFFFFFFFFFFFF)
    z = (z ^ (z >> uint64(30))) * uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> uint64(27))) * uint64(0x94D049BB133111EB)
    return z ^ (z >> uint64(31))


@njit(uint64(uint64, uint64, uint64, uint64), cache=True, inline="always")
def key_hash(seed, tag, entity, counter):
    """64-bit hash of a stream key; basis for all keyed draws."""
    h = _mix(seed ^ (tag * _GOLDEN))
    h = _mix(h ^ entity)
    return _mix(h ^ counter)


@njit(cache=True, inline="always")
def keyed_uniform(seed, tag, entity, counter):
    """Uniform draw in (0, 1], keyed.  Never returns 0 (safe for log())."""
    bits = key_hash(seed, tag, entity, counter)
    return (np.float64(bits >> uint64(11)) + 1.0) * (1.0 / 9007199254740992.0)


@njit(cache=True, inline="always")
def keyed_normal(seed, tag, entity, counter):
    """Standard-normal draw via Box-Muller on two derived uniforms, keyed."""
    u1 = keyed_uniform(seed, tag, entity, counter)
    bits2 = key_hash(seed ^ uint64(0x5851F42D4C957F2D), tag, entity, counter)
    u2 = np.float64(bits2 >> uint64(11)) * (1.0 / 9007199254740992.0)
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)


def substream_seed(master_seed: int, realization: int) -> int:
    """Fold a realization index into a master seed, giving one 64-bit root
    seed per realization that all keyed draws of that run derive from."""
    return int(key_hash(np.uint64(master_seed), np.uint64(0xFF), np.uint64(realization), np.uint64(0)))


class RandomStream:
    """Stateful view onto the keyed generator for one entity.

    Bookkeeps one counter per purpose tag so repeated calls walk the stream;
    two `RandomStream`s with the same (seed, entity) replay identically.
    """

    def __init__(self, seed: int, entity: int = 0):
        self.seed = np.uint64(seed)
        self.entity = np.uint64(entity)
        self._counters: dict[int, int] = {}

    def _next(self, tag: int) -> int:
        c = self._counters.get(tag, 0)
        self._counters[tag] = c + 1
        return c

    def normal(self, tag: int = TAG_GENERIC) -> float:
        return float(keyed_normal(self.seed, np.uint64(tag), self.entity, np.uint64(self._next(tag))))

    def uniform(self, lo: float = 0.0, hi: float = 1.0, tag: int = TAG_GENERIC) -> float:
        u = float(keyed_uniform(self.seed, np.uint64(tag), self.entity, np.uint64(self._next(tag))))
        return lo + (hi - lo) * u

    def numpy_rng(self, tag: int = TAG_GENERIC) -> np.random.Generator:
        """numpy Generator for bulk draws (topology wiring, subset sampling);
        seeded from the stream key so it is as reproducible as keyed draws."""
        root = key_hash(self.seed, np.uint64(tag), self.entity, np.uint64(self._next(tag)))
        return np.random.default_rng(int(root))
