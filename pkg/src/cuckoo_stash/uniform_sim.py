"""A data structure that simulates a uniform hash function ``U -> [2**w]``.

    h(x) = t1[h1(x)] ^ t2[h2(x)] ^ f(x) ^ y_1[g_1(x)] ^ ... ^ y_c[g_c(x)]

where ``(h1, h2)`` is a table-augmented pair, ``t1, t2`` have ``m`` random
words, each ``y_j`` has ``ell`` random words, and ``f`` is 2k-wise independent.
The group is ``[2**w]`` under XOR.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from operator import xor

from .cuckoo_table import as_fraction, lookup_size, min_lookup_tables, table_size
from .hash_families import KWiseHash, ZHashPair, sample_kwise, sample_zpair
from .rng import SplitMix64

_LIMB = 32


@dataclass
class EvalCost:
    function_evals: int = 0  # f1, f2, f and the 2c z-table lookups
    g_evals: int = 0
    table_reads: int = 0  # reads of t1, t2, y_1..y_c


@dataclass(frozen=True)
class MemoryReport:
    t_words: int
    y_words: int
    z_words: int
    functions: int
    coefficient_words: int

    @property
    def r_words(self) -> int:
        return self.t_words + self.y_words


@dataclass(frozen=True)
class UniformDS:
    n: int
    eps: Fraction
    delta: Fraction
    s: int
    k: int
    w: int
    seed: int
    pair: ZHashPair
    f: tuple[KWiseHash, ...]  # one limb for w <= 32, else (low 32 bits, high w-32 bits)
    t1: tuple[int, ...]
    t2: tuple[int, ...]
    y: tuple[tuple[int, ...], ...]

    @property
    def m(self) -> int:
        return self.pair.m

    @property
    def ell(self) -> int:
        return self.pair.ell

    @property
    def c(self) -> int:
        return self.pair.c

    def f_value(self, x: int) -> int:
        if len(self.f) == 1:
            return self.f[0](x)
        lo, hi = self.f
        return (hi(x) << _LIMB) | lo(x)

    def evaluate(self, x: int, cost: EvalCost | None = None) -> int:
        pair = self.pair
        gx = pair.g_values(x)
        z1, z2 = pair.z
        h1 = (pair.f[0](x) + sum(z1[j][gx[j]] for j in range(pair.c))) % pair.m
        h2 = (pair.f[1](x) + sum(z2[j][gx[j]] for j in range(pair.c))) % pair.m
        out = self.t1[h1] ^ self.t2[h2] ^ self.f_value(x)
        for j, gj in enumerate(gx):
            out ^= self.y[j][gj]
        if cost is not None:
            cost.function_evals += 3 + 2 * pair.c
            cost.g_evals += pair.c
            cost.table_reads += 2 + pair.c
        return out

    __call__ = evaluate

    def terms(self, x: int) -> list[int]:
        """The ``c + 3`` group elements XORed together to form ``h(x)``."""
        h1, h2 = self.pair(x)
        gx = self.pair.g_values(x)
        return [self.t1[h1], self.t2[h2], self.f_value(x), *(self.y[j][g] for j, g in enumerate(gx))]

    def to_bytes(self) -> bytes:
        header = [self.n, self.eps.numerator, self.eps.denominator, self.delta.numerator,
                  self.delta.denominator, self.s, self.k, self.w, self.c, self.seed]
        blob = self.pair.to_bytes()
        words = [len(self.f)]
        for limb in self.f:
            words.extend((limb.r, *limb.coeffs))
        words.extend(self.t1)
        words.extend(self.t2)
        for table in self.y:
            words.extend(table)
        return b"".join((
            b"UDS1",
            struct.pack(f"<{len(header)}Q", *header),
            struct.pack("<Q", len(blob)),
            blob,
            struct.pack(f"<{len(words)}Q", *words),
        ))

    @classmethod
    def from_bytes(cls, data: bytes) -> "UniformDS":
        if data[:4] != b"UDS1":
            raise ValueError("not a UniformDS dump")
        n, en, ed, dn, dd, s, k, w, c, seed = struct.unpack_from("<10Q", data, 4)
        off = 4 + 80
        (blob_len,) = struct.unpack_from("<Q", data, off)
        off += 8
        pair = ZHashPair.from_bytes(data[off:off + blob_len])
        off += blob_len
        rest = struct.unpack_from(f"<{(len(data) - off) // 8}Q", data, off)
        limbs, pos = [], 1
        for _ in range(rest[0]):
            r = rest[pos]
            limbs.append(KWiseHash(tuple(rest[pos + 1:pos + 1 + 2 * k]), r, pair.p))
            pos += 1 + 2 * k
        m, ell = pair.m, pair.ell
        t1, t2 = rest[pos:pos + m], rest[pos + m:pos + 2 * m]
        pos += 2 * m
        y = tuple(tuple(rest[pos + j * ell:pos + (j + 1) * ell]) for j in range(c))
        return cls(n, Fraction(en, ed), Fraction(dn, dd), s, k, w, seed, pair, tuple(limbs),
                   tuple(t1), tuple(t2), y)


def _sample_f(k: int, w: int, rng: SplitMix64) -> tuple[KWiseHash, ...]:
    # limbs of at most 32 bits keep the residue bias below 2**-29
    if w <= _LIMB:
        return (sample_kwise(2 * k, 1 << w, rng),)
    return sample_kwise(2 * k, 1 << _LIMB, rng), sample_kwise(2 * k, 1 << (w - _LIMB), rng)


def build_uniform(n: int, eps=0.25, delta=0.5, s: int = 0, k: int = 1, w: int = 16, seed: int = 0) -> UniformDS:
    """Sample a structure for key sets of size ``n``.

    Draw order from the seed stream: the pair, then ``f``, ``t1``, ``t2`` and
    ``y_1..y_c``.
    """
    eps, delta = as_fraction(eps), as_fraction(delta)
    if n < 1 or eps <= 0 or not 0 < delta < 1 or s < 0 or k < 1:
        raise ValueError("need n >= 1, eps > 0, 0 < delta < 1, s >= 0, k >= 1")
    if not 1 <= w <= 64:
        raise ValueError("word width w must lie in [1, 64]")
    m, ell, c = table_size(n, eps), lookup_size(n, delta), min_lookup_tables(s, k, delta)
    rng = SplitMix64(seed)
    pair = sample_zpair(k, c, ell, m, rng)
    f = _sample_f(k, w, rng)
    size = 1 << w
    t1 = tuple(rng.below(size) for _ in range(m))
    t2 = tuple(rng.below(size) for _ in range(m))
    y = tuple(tuple(rng.below(size) for _ in range(ell)) for _ in range(c))
    return UniformDS(n, eps, delta, s, k, w, seed, pair, f, t1, t2, y)


def eval_uniform(ds: UniformDS, x: int) -> int:
    return ds.evaluate(x)


def memory_report(ds: UniformDS) -> MemoryReport:
    """Word counts per component; checks the two big tables hold ``2 ceil((1 + eps) n)`` words."""
    t_words = len(ds.t1) + len(ds.t2)
    expected = 2 * table_size(ds.n, ds.eps)
    if t_words != expected:
        raise AssertionError(f"t1 + t2 hold {t_words} words, expected {expected}")
    y_words = sum(len(t) for t in ds.y)
    if y_words != ds.c * ds.ell:
        raise AssertionError(f"y-tables hold {y_words} words, expected {ds.c * ds.ell}")
    fns = (*ds.pair.f, *ds.pair.g, *ds.f)
    return MemoryReport(
        t_words=t_words,
        y_words=y_words,
        z_words=sum(len(t) for zi in ds.pair.z for t in zi),
        functions=len(ds.pair.f) + len(ds.pair.g) + 1,
        coefficient_words=sum(fn.kappa for fn in fns),
    )


def xor_all(values) -> int:
    return reduce(xor, values, 0)


__all__ = ["UniformDS", "EvalCost", "MemoryReport", "build_uniform", "eval_uniform", "memory_report",
           "xor_all"]
