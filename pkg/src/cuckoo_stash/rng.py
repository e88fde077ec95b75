"""Seeded 64-bit random streams shared by the reference objects and the JIT kernels.

Everything random in this package is drawn from a SplitMix64 stream so that
the pure-Python structures and the numba trial kernels produce identical
samples from identical seeds.
"""

from __future__ import annotations

import hashlib

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


def mix64(z: int) -> int:
    """SplitMix64 finalizer; a bijection on 64-bit words."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def _as_word(part: int | str) -> int:
    if isinstance(part, str):
        return int.from_bytes(hashlib.blake2b(part.encode(), digest_size=8).digest(), "little")
    return int(part) & MASK64


def derive_seed(master: int, *parts: int | str) -> int:
    """Fold ``parts`` into ``master``: ``h <- mix64(h ^ mix64(part))`` per part.

    Strings are first reduced to a word with an 8-byte BLAKE2b digest. A
    trial seed is ``derive_seed(base, trial)``, which the kernels recompute as
    ``mix64(base ^ mix64(trial))``.
    """
    h = int(master) & MASK64
    for part in parts:
        h = mix64(h ^ mix64(_as_word(part)))
    return h


class SplitMix64:
    """Sequential SplitMix64 generator."""

    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = int(seed) & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN) & MASK64
        return mix64(self.state)

    def below(self, r: int) -> int:
        """Uniform integer in ``[0, r)`` by rejection (no modulo bias)."""
        if r < 1:
            raise ValueError("range must be positive")
        threshold = (1 << 64) % r
        while True:
            v = self.next_u64()
            if v >= threshold:
                return v % r
