"""Portable seeded randomness.

Splits and poison selections must be reproducible across platforms and Python versions, so
shuffling does not go through `random`. The generator is SplitMix64:

    state += 0x9E3779B97F4A7C15
    z = state
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    return z ^ (z >> 31)

all arithmetic modulo 2**64. Bounded draws use rejection sampling (no modulo bias) and
shuffles are Fisher-Yates from the last index down.
"""

import hashlib
from collections.abc import Sequence

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN_GAMMA) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def below(self, bound: int) -> int:
        """Uniform integer in [0, bound)"""
        if bound <= 0:
            raise ValueError("bound must be positive")
        # Largest multiple of bound that fits in 64 bits; draws above it are rejected
        limit = (1 << 64) - ((1 << 64) % bound)
        while True:
            value = self.next_u64()
            if value < limit:
                return value % bound

    def permutation(self, n: int) -> list[int]:
        indices = list(range(n))
        for i in range(n - 1, 0, -1):
            j = self.below(i + 1)
            indices[i], indices[j] = indices[j], indices[i]
        return indices

    def shuffled[T](self, items: Sequence[T]) -> list[T]:
        return [items[i] for i in self.permutation(len(items))]

    def sample_indices(self, n: int, k: int) -> list[int]:
        """Choose k of n indices without replacement, returned in ascending order"""
        if k > n:
            raise ValueError(f"cannot sample {k} of {n}")
        indices = list(range(n))
        for i in range(k):
            j = i + self.below(n - i)
            indices[i], indices[j] = indices[j], indices[i]
        return sorted(indices[:k])

    @classmethod
    def derive(cls, seed: int, label: str) -> "SplitMix64":
        """Independent stream for a named partition (e.g. one language) of a seeded run"""
        salt = int.from_bytes(hashlib.sha256(label.encode("utf-8")).digest()[:8], "big")
        return cls((seed ^ salt) & MASK64)
