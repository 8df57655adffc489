"""Reproducible randomness.

One master seed per execution; every consumer (the adversary, each backoff
station) gets its own substream derived by hashing (seed, consumer id)
through ``SeedSequence``.  Adding consumers therefore never perturbs the
draws of existing ones.

All derived draws (integers, Poisson, shuffles) are built from uniform
doubles only, so the compiled kernel can reproduce them bit-for-bit from the
same underlying PCG64 state.
"""

from __future__ import annotations

import math

from numpy.random import PCG64, Generator, SeedSequence

ADVERSARY_STREAM = 0


def station_stream_id(station: int) -> int:
    return 1 + station


def substream(seed: int, consumer: int) -> PCG64:
    """Derive the PCG64 bit generator for one (seed, consumer) pair."""
    return PCG64(SeedSequence([seed, consumer]))


# Safety cutoff for the Poisson sequential search; at lambda <= 1 the
# probability of ever reaching it is far below 2**-500.
_POISSON_CUTOFF = 512


class Stream:
    """A single consumer's uniform-double stream with derived draws."""

    __slots__ = ("bitgen", "_random")

    def __init__(self, bitgen: PCG64):
        self.bitgen = bitgen
        self._random = Generator(bitgen).random

    @classmethod
    def for_consumer(cls, seed: int, consumer: int) -> "Stream":
        return cls(substream(seed, consumer))

    def uniform(self) -> float:
        return self._random()

    def randint(self, k: int) -> int:
        """Uniform integer in [0, k) via one uniform double."""
        i = int(self._random() * k)
        return k - 1 if i >= k else i

    def poisson(self, lam: float) -> int:
        """Poisson draw by sequential-search inversion; one uniform per draw."""
        if lam <= 0.0:
            raise ValueError(f"poisson parameter must be positive, got {lam}")
        u = self._random()
        p = math.exp(-lam)
        f = p
        x = 0
        while u > f and x < _POISSON_CUTOFF:
            x += 1
            p = p * (lam / x)
            f = f + p
        return x

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates using this stream's uniforms."""
        for i in range(len(items) - 1, 0, -1):
            j = int(self._random() * (i + 1))
            if j > i:
                j = i
            items[i], items[j] = items[j], items[i]
