"""Hash function families: polynomial k-wise hashing, the table-augmented pair
family, a fully random baseline, and the g-part deficiency diagnostics.

Keys are non-negative integers below the field prime, ``MERSENNE61 = 2**61 - 1``
by default. Reducing a field element to a smaller range ``[r]`` by residue
adds a bias of at most ``r / p`` per coordinate, which is below ``2**-40`` for
every table size used here.
"""

from __future__ import annotations

import struct
import threading
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence, Union

from .rng import SplitMix64, mix64

MERSENNE61 = (1 << 61) - 1


@dataclass(frozen=True, slots=True)
class KWiseHash:
    """A polynomial ``a_0 + a_1 x + ... + a_{kappa-1} x^{kappa-1}`` over GF(p),
    reduced to ``[r]``.

    ``coeffs`` is stored lowest degree first, so ``(5, 1)`` is ``x + 5``.
    """

    coeffs: tuple[int, ...]
    r: int
    p: int = MERSENNE61

    def __post_init__(self):
        if len(self.coeffs) < 2:
            raise ValueError("independence kappa must be >= 2")
        if not 1 <= self.r <= self.p:
            raise ValueError(f"range {self.r} must lie in [1, p={self.p}]")
        if any(not 0 <= a < self.p for a in self.coeffs):
            raise ValueError("coefficients must lie in [0, p)")

    @property
    def kappa(self) -> int:
        return len(self.coeffs)

    def field_value(self, x: int) -> int:
        """Horner evaluation in GF(p), before the range reduction."""
        if not 0 <= x < self.p:
            raise ValueError(f"key {x} outside universe [0, {self.p})")
        p = self.p
        acc = 0
        for a in reversed(self.coeffs):
            acc = (acc * x + a) % p
        return acc

    def __call__(self, x: int) -> int:
        return self.field_value(x) % self.r


def sample_kwise(kappa: int, r: int, seed: int | SplitMix64, p: int = MERSENNE61) -> KWiseHash:
    """Draw a member of the degree-(kappa-1) polynomial family with range ``[r]``.

    ``seed`` may be an integer or a live :class:`SplitMix64` stream; in the
    latter case exactly ``kappa`` field elements are consumed from it.
    """
    if kappa < 2:
        raise ValueError("independence kappa must be >= 2")
    if r < 1:
        raise ValueError("range must be >= 1")
    if r > p:
        raise ValueError(f"range {r} exceeds field size {p}")
    rng = seed if isinstance(seed, SplitMix64) else SplitMix64(seed)
    return KWiseHash(tuple(rng.below(p) for _ in range(kappa)), r, p)


def eval_kwise(h: KWiseHash, x: int) -> int:
    return h(x)


@dataclass(frozen=True, slots=True)
class ZHashPair:
    """A pair ``(h1, h2)`` from the family combining 2k-wise independent
    polynomials with ``c`` random lookup tables of length ``ell``:

        h_i(x) = (f_i(x) + sum_j z[i][j][g_j(x)]) mod m
    """

    k: int
    c: int
    ell: int
    m: int
    f: tuple[KWiseHash, KWiseHash]
    g: tuple[KWiseHash, ...]
    z: tuple[tuple[tuple[int, ...], ...], tuple[tuple[int, ...], ...]]

    def __post_init__(self):
        if self.k < 1 or self.c < 1 or self.ell < 1 or self.m < 1:
            raise ValueError("k, c, ell, m must all be >= 1")
        if len(self.g) != self.c or len(self.z) != 2 or any(len(zi) != self.c for zi in self.z):
            raise ValueError("expected c g-functions and 2c z-tables")
        for fn in (*self.f, *self.g):
            if fn.kappa != 2 * self.k:
                raise ValueError("all component functions must have kappa = 2k")
        if any(fi.r != self.m for fi in self.f) or any(gj.r != self.ell for gj in self.g):
            raise ValueError("f must map to [m] and g to [ell]")
        for zi in self.z:
            for table in zi:
                if len(table) != self.ell or any(not 0 <= v < self.m for v in table):
                    raise ValueError("z-tables must hold ell entries in [0, m)")

    @property
    def p(self) -> int:
        return self.f[0].p

    def g_values(self, x: int) -> tuple[int, ...]:
        return tuple(gj(x) for gj in self.g)

    def __call__(self, x: int) -> tuple[int, int]:
        gx = self.g_values(x)
        z1, z2 = self.z
        h1 = self.f[0](x) + sum(z1[j][gx[j]] for j in range(self.c))
        h2 = self.f[1](x) + sum(z2[j][gx[j]] for j in range(self.c))
        return h1 % self.m, h2 % self.m

    def to_bytes(self) -> bytes:
        """Flat little-endian dump: magic, (k, c, ell, m, p), f1, f2, g_1..g_c
        coefficients, then z^(1)_1..z^(1)_c, z^(2)_1..z^(2)_c."""
        words = [self.k, self.c, self.ell, self.m, self.p]
        for fn in (*self.f, *self.g):
            words.extend(fn.coeffs)
        for zi in self.z:
            for table in zi:
                words.extend(table)
        return b"ZHP1" + struct.pack(f"<{len(words)}Q", *words)

    @classmethod
    def from_bytes(cls, blob: bytes) -> "ZHashPair":
        if blob[:4] != b"ZHP1":
            raise ValueError("not a ZHashPair dump")
        k, c, ell, m, p = struct.unpack_from("<5Q", blob, 4)
        count = (len(blob) - 4) // 8
        words = struct.unpack_from(f"<{count}Q", blob, 4)[5:]
        kappa = 2 * k
        fns = [tuple(words[i * kappa:(i + 1) * kappa]) for i in range(2 + c)]
        rest = words[(2 + c) * kappa:]
        tables = [tuple(rest[i * ell:(i + 1) * ell]) for i in range(2 * c)]
        if len(rest) != 2 * c * ell:
            raise ValueError("truncated ZHashPair dump")
        return cls(
            k, c, ell, m,
            f=(KWiseHash(fns[0], m, p), KWiseHash(fns[1], m, p)),
            g=tuple(KWiseHash(fn, ell, p) for fn in fns[2:]),
            z=(tuple(tables[:c]), tuple(tables[c:])),
        )


def sample_zpair(k: int, c: int, ell: int, m: int, seed: int | SplitMix64, p: int = MERSENNE61) -> ZHashPair:
    """Sample a pair; draw order is f1, f2, g_1..g_c, then the 2c z-tables.

    The numba kernels replicate this order exactly.
    """
    if k < 1 or c < 1:
        raise ValueError("k and c must be >= 1")
    if ell < 1 or m < 1:
        raise ValueError("ell and m must be >= 1")
    rng = seed if isinstance(seed, SplitMix64) else SplitMix64(seed)
    f = (sample_kwise(2 * k, m, rng, p), sample_kwise(2 * k, m, rng, p))
    g = tuple(sample_kwise(2 * k, ell, rng, p) for _ in range(c))
    z = tuple(
        tuple(tuple(rng.below(m) for _ in range(ell)) for _ in range(c))
        for _ in range(2)
    )
    return ZHashPair(k, c, ell, m, f, g, z)


def eval_zpair(pair: ZHashPair, x: int) -> tuple[int, int]:
    return pair(x)


class FullyRandomPair:
    """Baseline pair standing in for fully random ``(h1, h2)``.

    Values come from a counter-based generator keyed by ``x``:
    ``h_i(x) = mix64(mix64(x ^ salt_i)) mod m``, with the two salts drawn from
    the seed. Results are memoized under a lock, so concurrent queries for one
    key always agree.
    """

    def __init__(self, m: int, seed: int | SplitMix64):
        if m < 1:
            raise ValueError("m must be >= 1")
        rng = seed if isinstance(seed, SplitMix64) else SplitMix64(seed)
        self.m = m
        self.salts = (rng.next_u64(), rng.next_u64())
        self._memo: dict[int, tuple[int, int]] = {}
        self._lock = threading.Lock()

    def _draw(self, x: int) -> tuple[int, int]:
        s1, s2 = self.salts
        return mix64(mix64(x ^ s1)) % self.m, mix64(mix64(x ^ s2)) % self.m

    def __call__(self, x: int) -> tuple[int, int]:
        hit = self._memo.get(x)
        if hit is None:
            with self._lock:
                hit = self._memo.setdefault(x, self._draw(x))
        return hit


HashPairSource = Union[ZHashPair, FullyRandomPair, "ExplicitPair"]


class SetClass(str, Enum):
    GOOD = "good"
    CRIT = "crit"
    BAD = "bad"


def deficiency(pair: ZHashPair, keys: Iterable[int]) -> int:
    """``|T| - max(k, |g_1(T)|, ..., |g_c(T)|)``.

    Only ``pair.k`` and ``pair.g`` are read, so any object carrying those works.
    """
    keys = set(keys)
    images = [len({gj(x) for x in keys}) for gj in pair.g]
    return len(keys) - max(pair.k, *images)


def classify_set(pair: ZHashPair, keys: Iterable[int]) -> SetClass:
    """Three-way tag: BAD if d_T > k, CRIT if d_T == k, GOOD if d_T < k.

    Note that the "good" event in the usual sense (d_T <= k) is GOOD or CRIT.
    """
    d = deficiency(pair, keys)
    if d > pair.k:
        return SetClass.BAD
    if d == pair.k:
        return SetClass.CRIT
    return SetClass.GOOD


def random_keys(n: int, seed: int | SplitMix64, universe: int = MERSENNE61) -> list[int]:
    """``n`` distinct keys drawn uniformly from ``[0, universe)``, duplicates rejected."""
    if n > universe:
        raise ValueError("cannot draw more distinct keys than the universe holds")
    rng = seed if isinstance(seed, SplitMix64) else SplitMix64(seed)
    seen: set[int] = set()
    out: list[int] = []
    while len(out) < n:
        x = rng.below(universe)
        if x not in seen:
            seen.add(x)
            out.append(x)
    return out


def sample_source(kind: str, m: int, seed: int, *, k: int = 1, c: int = 1, ell: int = 1) -> HashPairSource:
    if kind in ("z", "z-family"):
        return sample_zpair(k, c, ell, m, seed)
    if kind in ("random", "fully-random"):
        return FullyRandomPair(m, seed)
    raise ValueError(f"unknown hash source {kind!r}")


def pair_values(pair: HashPairSource, keys: Sequence[int]) -> list[tuple[int, int]]:
    return [pair(x) for x in keys]


class ExplicitPair:
    """A pair given by an explicit key -> (h1, h2) table; for hand-built instances."""

    def __init__(self, m: int, values: dict[int, tuple[int, int]]):
        if any(not (0 <= a < m and 0 <= b < m) for a, b in values.values()):
            raise ValueError("hash values must lie in [0, m)")
        self.m = m
        self.values = dict(values)

    def __call__(self, x: int) -> tuple[int, int]:
        return self.values[x]
