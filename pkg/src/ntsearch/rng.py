"""Seedable random stream shared by the Python engine and the compiled kernels.

Every random decision in a run is drawn from a single numpy ``PCG64`` bit
generator.  Bounded integers use Lemire's multiply-shift method with
rejection on the raw 64-bit output, implemented identically here and in
``_kernels.pyx`` so that the compiled and pure-Python step functions consume
the stream in lockstep.
"""

from __future__ import annotations

from collections.abc import Iterator

import numpy as np

RNG_ALGORITHM = "numpy.PCG64/raw64-lemire"

_MASK64 = (1 << 64) - 1
_TWO64 = 1 << 64


class Rng:
    __slots__ = ("bitgen", "_raw")

    def __init__(self, seed: int):
        if seed < 0:
            raise ValueError(f"seed must be non-negative, got {seed}")
        self.bitgen = np.random.PCG64(seed)
        self._raw = self.bitgen.random_raw

    @property
    def capsule(self):
        """``BitGenerator`` capsule consumed by the Cython kernels."""
        return self.bitgen.capsule

    def next64(self) -> int:
        return self._raw()

    def randbelow(self, n: int) -> int:
        """Uniform integer in ``[0, n)``."""
        if n <= 0:
            raise ValueError("randbelow requires n >= 1")
        m = self._raw() * n
        low = m & _MASK64
        if low < n:
            threshold = (_TWO64 - n) % n
            while low < threshold:
                m = self._raw() * n
                low = m & _MASK64
        return m >> 64

    def random(self) -> float:
        """Uniform float in ``[0, 1)`` with 53 random bits."""
        return (self._raw() >> 11) * (1.0 / 9007199254740992.0)

    def choice(self, seq):
        return seq[self.randbelow(len(seq))]

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates, last position first."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randbelow(i + 1)
            items[i], items[j] = items[j], items[i]

    def permutation_stream(self, m: int) -> Iterator[int]:
        """Lazily yield a uniform permutation of ``range(m)``.

        One draw per yielded item, so an early ``break`` leaves the stream
        exactly where the compiled kernels leave it.
        """
        displaced: dict[int, int] = {}
        for t in range(m):
            j = t + self.randbelow(m - t)
            picked = displaced.get(j, j)
            displaced[j] = displaced.get(t, t)
            yield picked
