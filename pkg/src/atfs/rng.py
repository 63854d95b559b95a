"""Seeded 64-bit LCG used everywhere randomness is needed.

All weight initialisation, noise, probe perturbations and procedural
fixtures draw from this generator so that runs are reproducible bit-for-bit
from their integer seeds alone, independent of numpy's RNG internals.

State update (Knuth MMIX constants, mod 2**64):

    s <- s * 6364136223846793005 + 1442695040888963407

Uniform doubles take the top 53 bits of the state; gaussians come from the
Box-Muller transform on consecutive uniform pairs.
"""

import math

import numpy as np

_MUL = 6364136223846793005
_INC = 1442695040888963407
_MASK = (1 << 64) - 1


class Lcg64:
    def __init__(self, seed: int):
        self.state = (int(seed) ^ 0x9E3779B97F4A7C15) & _MASK
        # burn a step so nearby seeds decorrelate immediately
        self._step()

    def _step(self) -> int:
        self.state = (self.state * _MUL + _INC) & _MASK
        return self.state

    def uniform(self) -> float:
        """Uniform double in [0, 1)."""
        return (self._step() >> 11) / float(1 << 53)

    def uniforms(self, n: int) -> np.ndarray:
        return np.array([self.uniform() for _ in range(n)], dtype=np.float64)

    def gauss(self) -> float:
        u1 = self.uniform()
        u2 = self.uniform()
        # avoid log(0)
        u1 = max(u1, 1e-300)
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)

    def gaussians(self, n: int) -> np.ndarray:
        return np.array([self.gauss() for _ in range(n)], dtype=np.float64)

    def randint(self, lo: int, hi: int) -> int:
        """Integer uniform in [lo, hi)."""
        return lo + int(self.uniform() * (hi - lo))

    def shuffle(self, items: list) -> list:
        """Fisher-Yates shuffle, in place; returns the list."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randint(0, i + 1)
            items[i], items[j] = items[j], items[i]
        return items
