"""
Portable seeded pseudo-random generator.

xorshift64* seeded through splitmix64. Everything is plain Python integer
arithmetic, so a given seed produces the same stream on every platform and
numpy version. Weight initialization, data generation, splitting and
per-epoch shuffling all draw from this generator.
"""

import math
from typing import Tuple

import numpy as np

from core.errors import ContractViolation

MASK64 = (1 << 64) - 1


def splitmix64(state: int) -> Tuple[int, int]:
    """
    Advance a splitmix64 state.

    Args:
        state: Current 64-bit state

    Returns:
        Tuple of (next state, output value)
    """
    state = (state + 0x9E3779B97F4A7C15) & MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return state, z ^ (z >> 31)


class Prng:
    """xorshift64* generator (shifts 12, 25, 27; multiplier 0x2545F4914F6CDD1D)."""

    MULTIPLIER = 0x2545F4914F6CDD1D

    def __init__(self, seed: int = 0):
        """
        Initialize the generator.

        Args:
            seed: Unsigned 64-bit seed
        """
        if not 0 <= seed <= MASK64:
            raise ContractViolation(f"seed must be an unsigned 64-bit integer, got {seed}")
        self.seed = seed
        _, state = splitmix64(seed)
        # xorshift has a fixed point at zero
        self._state = state or 0x9E3779B97F4A7C15

    def next_u64(self) -> int:
        x = self._state
        x ^= x >> 12
        x ^= (x << 25) & MASK64
        x ^= x >> 27
        self._state = x
        return (x * self.MULTIPLIER) & MASK64

    def random(self) -> float:
        """Uniform double in [0, 1) built from the top 53 bits."""
        return (self.next_u64() >> 11) * (1.0 / 9007199254740992.0)

    def uniform(self, low: float, high: float) -> float:
        return low + (high - low) * self.random()

    def uniform_array(self, low: float, high: float, shape) -> np.ndarray:
        """Fill an array of `shape` in row-major order with uniform draws."""
        count = int(np.prod(shape, dtype=np.int64))
        values = [self.uniform(low, high) for _ in range(count)]
        return np.array(values, dtype=np.float64).reshape(shape)

    def below(self, n: int) -> int:
        """Integer in [0, n) by multiply-shift reduction."""
        if n <= 0:
            raise ContractViolation(f"upper bound must be positive, got {n}")
        return (self.next_u64() * n) >> 64

    def permutation(self, n: int) -> np.ndarray:
        """Fisher-Yates shuffle of range(n)."""
        order = list(range(n))
        for i in range(n - 1, 0, -1):
            j = self.below(i + 1)
            order[i], order[j] = order[j], order[i]
        return np.array(order, dtype=np.int64)

    def glorot_uniform(self, fan_in: int, fan_out: int, shape) -> np.ndarray:
        """Uniform on +-sqrt(6 / (fan_in + fan_out))."""
        limit = math.sqrt(6.0 / (fan_in + fan_out))
        return self.uniform_array(-limit, limit, shape)
