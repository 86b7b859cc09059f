"""Deterministic counter-based random numbers (SplitMix64).

Every randomized operation in the toolkit draws from this generator so that
a given seed produces bit-identical results on any platform, independent of
process or thread count. The algorithm is pinned here so that other
implementations can reproduce the same streams.

Draw ``i`` (1-based) is the SplitMix64 finalizer applied to the counter:

    z = (seed + i * 0x9E3779B97F4A7C15) mod 2**64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) mod 2**64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) mod 2**64
    out = z ^ (z >> 31)

Derived draws:

    uniform01:    (out >> 11) * 2**-53            in [0, 1)
    randrange(n): out % n                         (n far below 2**64)
    normal:       Box-Muller on two uniforms, the first mapped to (0, 1]
                  as ((out >> 11) + 1) * 2**-53
"""

from __future__ import annotations

import numpy as np

GOLDEN = 0x9E3779B97F4A7C15
MASK64 = (1 << 64) - 1

_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


def _mix(z: np.ndarray) -> np.ndarray:
    # uint64 multiplication wraps mod 2**64 by design
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
        return z ^ (z >> np.uint64(31))


class SplitMix64:
    """Counter-based 64-bit generator; cheap to fork and fully deterministic."""

    def __init__(self, seed: int):
        self._seed = int(seed) & MASK64
        self._counter = 0

    def next_u64(self) -> int:
        self._counter += 1
        z = (self._seed + self._counter * GOLDEN) & MASK64
        return int(_mix(np.uint64(z)))

    def u64_array(self, n: int) -> np.ndarray:
        """Next n raw draws as a uint64 array (single counter advance)."""
        idx = np.arange(self._counter + 1, self._counter + n + 1, dtype=np.uint64)
        self._counter += n
        with np.errstate(over="ignore"):
            z = np.uint64(self._seed) + idx * np.uint64(GOLDEN)
            return _mix(z)

    def uniform01(self) -> float:
        return (self.next_u64() >> 11) * 2.0**-53

    def uniform(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.uniform01()

    def randrange(self, n: int) -> int:
        if n <= 0:
            raise ValueError("randrange needs n >= 1")
        return self.next_u64() % n

    def uniform01_array(self, n: int) -> np.ndarray:
        return (self.u64_array(n) >> np.uint64(11)).astype(np.float64) * 2.0**-53

    def normal_array(self, n: int, sigma: float = 1.0) -> np.ndarray:
        """n standard-normal draws scaled by sigma (Box-Muller, cos branch)."""
        u1 = ((self.u64_array(n) >> np.uint64(11)).astype(np.float64) + 1.0) * 2.0**-53
        u2 = self.uniform01_array(n)
        return sigma * np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)


def derive_seed(seed: int, index: int) -> int:
    """Per-item seed for parallel-safe iteration: seed xor item index."""
    return (int(seed) ^ int(index)) & MASK64
