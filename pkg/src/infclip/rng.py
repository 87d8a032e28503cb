"""Seedable counter-based randomness.

Every stochastic component owns a (seed, stream_id) pair mapped onto a Philox
counter-based generator, so parallel repetitions replay identically no matter
how work is scheduled.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

_MASK64 = (1 << 64) - 1


def splitmix64(value: int) -> int:
    """One round of the splitmix64 mixer; used to derive substream ids."""
    z = (value + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


@dataclass
class SeededRng:
    """A reproducible random stream keyed by (seed, stream_id).

    Identical keys yield bitwise-identical sample sequences for the same
    build.  The underlying bit generator is Philox with the 128-bit key
    (seed, stream_id), so distinct stream ids never collide.
    """

    seed: int
    stream_id: int = 0
    generator: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        if not 0 <= self.seed <= _MASK64 or not 0 <= self.stream_id <= _MASK64:
            raise ValueError("seed and stream_id must be unsigned 64-bit integers")
        key = np.array([self.seed, self.stream_id], dtype=np.uint64)
        self.generator = np.random.Generator(np.random.Philox(key=key))

    def derive(self, *tags: int) -> "SeededRng":
        """A new independent stream obtained by mixing tags into stream_id."""
        stream = self.stream_id
        for tag in tags:
            stream = splitmix64(stream ^ splitmix64(tag & _MASK64))
        return SeededRng(self.seed, stream)


def as_generator(rng: "SeededRng | np.random.Generator") -> np.random.Generator:
    """Accept either a SeededRng or a raw numpy Generator."""
    if isinstance(rng, SeededRng):
        return rng.generator
    return rng
