"""Cuckoo hash table with a stash.

Insertion is the classic nestless-key walk: swap the nestless key into
``T_i[h_i(key)]``, alternate ``i``, and give up after ``maxloop`` rounds by
moving the current nestless key into the stash (or rehashing when the stash
is full).
"""

from __future__ import annotations

import math
import warnings
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterator, Optional

from .hash_families import FullyRandomPair, HashPairSource, ZHashPair, sample_source
from .rng import derive_seed

DEFAULT_REHASH_RETRIES = 100
MAXLOOP_FLOOR = 8


class RehashFailure(RuntimeError):
    """Every rehash attempt in the retry budget failed to place all keys."""


class StashOverflow(RuntimeError):
    """The stash is full and rehashing is disabled."""


def as_fraction(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(str(x))


def table_size(n: int, eps) -> int:
    """``ceil((1 + eps) n)``, computed exactly from the decimal form of ``eps``."""
    return math.ceil((1 + as_fraction(eps)) * n)


def lookup_size(n: int, delta) -> int:
    """Smallest power of two that is ``>= n ** delta``."""
    if n <= 1:
        return 1
    target = float(as_fraction(delta)) * math.log2(n)
    e = math.ceil(target - 1e-9)
    return 1 << max(e, 0)


def default_maxloop(n: int, eps, s: int) -> int:
    """``ceil(3 (s + 2) log_{1+eps} n)``, floored at 8."""
    if n <= 1:
        return MAXLOOP_FLOOR
    loop = math.ceil(3 * (s + 2) * math.log(n) / math.log1p(float(eps)))
    return max(loop, MAXLOOP_FLOOR)


def min_lookup_tables(s: int, k: int, delta) -> int:
    """Smallest ``c`` with ``c >= (s + 2) / (delta k)``."""
    return math.ceil(Fraction(s + 2) / (as_fraction(delta) * k))


@dataclass(frozen=True)
class TableConfig:
    n: int
    eps: float
    s: int
    k: int
    c: int
    delta: float
    seed: int
    source: str = "z"
    m: int = 0
    ell: int = 0
    maxloop: int = 0


@dataclass
class InsertOutcome:
    tag: str  # "placed" | "stashed" | "rehashed"
    rounds: int = 0
    rehash_attempts: int = 0


@dataclass
class TableStats:
    insertions: int = 0
    total_rounds: int = 0
    round_histogram: Counter = field(default_factory=Counter)
    rehashes: int = 0
    rehash_rounds: int = 0
    stash_occupancy: int = 0


_EMPTY = None


class CuckooTable:
    """Two tables of ``m`` cells plus a stash of capacity ``s``."""

    def __init__(self, config: TableConfig, pair: HashPairSource | None = None, *, rehash: bool = True,
                 rehash_retries: int = DEFAULT_REHASH_RETRIES):
        self.config = config
        self.m = config.m
        self.s = config.s
        self.maxloop = config.maxloop
        self.rehash_enabled = rehash
        self.rehash_retries = rehash_retries
        self._generation = 0
        self.pair = pair if pair is not None else self._sample_pair(config.seed)
        # cells hold [key, value, (h1, h2)] lists; the hash pair is cached per entry
        self.t = ([_EMPTY] * self.m, [_EMPTY] * self.m)
        self.stash: list[list] = []
        self._stats = TableStats()
        self._size = 0

    @classmethod
    def from_pair(cls, pair: HashPairSource, *, s: int, maxloop: int, rehash: bool = False) -> "CuckooTable":
        """Table over a fixed, caller-supplied pair (e.g. an ExplicitPair).

        Rehashing needs a samplable source, so it is off unless the pair is
        one of the standard families.
        """
        source = "z" if isinstance(pair, ZHashPair) else "random" if isinstance(pair, FullyRandomPair) else "explicit"
        if rehash and source == "explicit":
            raise ValueError("an explicit pair cannot be resampled; use rehash=False")
        k, c, ell = (pair.k, pair.c, pair.ell) if isinstance(pair, ZHashPair) else (1, 1, 1)
        cfg = TableConfig(0, 0.0, s, k, c, 0.5, 0, source, m=pair.m, ell=ell, maxloop=maxloop)
        return cls(cfg, pair, rehash=rehash)

    def _sample_pair(self, seed: int) -> HashPairSource:
        cfg = self.config
        return sample_source(cfg.source, cfg.m, seed, k=cfg.k, c=cfg.c, ell=cfg.ell)

    def __len__(self) -> int:
        return self._size

    def __contains__(self, key) -> bool:
        return self._find(key) is not None

    def items(self) -> Iterator[tuple[Any, Any]]:
        for table in self.t:
            for cell in table:
                if cell is not _EMPTY:
                    yield cell[0], cell[1]
        for key, value, _ in self.stash:
            yield key, value

    def _find(self, key, h=None) -> Optional[list]:
        if h is None:
            h = self.pair(key)
        for i in (0, 1):
            cell = self.t[i][h[i]]
            if cell is not _EMPTY and cell[0] == key:
                return cell
        for entry in self.stash:
            if entry[0] == key:
                return entry
        return None

    def lookup(self, key, default=None):
        cell = self._find(key)
        return default if cell is None else cell[1]

    def _walk(self, entry: list, maxloop: int) -> tuple[Optional[list], int]:
        """Run the eviction loop; returns the final nestless entry (or None) and rounds used."""
        nestless = entry
        i = 0
        for rounds in range(1, maxloop + 1):
            table = self.t[i]
            pos = nestless[2][i]
            nestless, table[pos] = table[pos], nestless
            if nestless is _EMPTY:
                return None, rounds
            i = 1 - i
        return nestless, maxloop

    def _store(self, entry: list, maxloop: int) -> tuple[str, int, int]:
        nestless, rounds = self._walk(entry, maxloop)
        if nestless is None:
            return "placed", rounds, 0
        if len(self.stash) < self.s:
            self.stash.append(nestless)
            return "stashed", rounds, 0
        if not self.rehash_enabled:
            # keep the dictionary consistent before surfacing the overflow
            self.stash.append(nestless)
            raise StashOverflow(f"stash of capacity {self.s} overflowed")
        attempts = self._rehash(extra=nestless)
        return "rehashed", rounds, attempts

    def _insert(self, key, value, maxloop: int) -> InsertOutcome:
        h = self.pair(key)
        cell = self._find(key, h)
        if cell is not None:
            cell[1] = value
            return InsertOutcome("placed", 0)
        self._size += 1
        try:
            tag, rounds, attempts = self._store([key, value, h], maxloop)
        finally:
            st = self._stats
            st.insertions += 1
            st.stash_occupancy = len(self.stash)
        st.total_rounds += rounds
        st.round_histogram[rounds] += 1
        return InsertOutcome(tag, rounds, attempts)

    def insert(self, key, value=None) -> InsertOutcome:
        """Insert or update; an existing key is overwritten in place."""
        return self._insert(key, value, self.maxloop)

    def insert_complete(self, key, value=None) -> InsertOutcome:
        """Insert with the loop bound raised to ``2 |S| + 4`` so a key is only
        stashed when the walk could never end."""
        return self._insert(key, value, 2 * (self._size + 1) + 4)

    def delete(self, key) -> bool:
        h = self.pair(key)
        found = False
        for i in (0, 1):
            cell = self.t[i][h[i]]
            if cell is not _EMPTY and cell[0] == key:
                self.t[i][h[i]] = _EMPTY
                found = True
                break
        else:
            for j, entry in enumerate(self.stash):
                if entry[0] == key:
                    del self.stash[j]
                    found = True
                    break
        if not found:
            return False
        self._size -= 1
        self._drain_stash()
        self._stats.stash_occupancy = len(self.stash)
        return True

    def _drain_stash(self) -> None:
        # each stashed key gets one more walk; whatever is nestless afterwards goes back
        pending, self.stash = self.stash, []
        for entry in pending:
            nestless, _ = self._walk(entry, self.maxloop)
            if nestless is not None:
                self.stash.append(nestless)

    def _rehash(self, extra: Optional[list] = None) -> int:
        entries = [[k, v, None] for k, v in self.items()]
        if extra is not None:
            entries.append([extra[0], extra[1], None])
        for attempt in range(1, self.rehash_retries + 1):
            self._generation += 1
            self._stats.rehashes += 1
            self.pair = self._sample_pair(derive_seed(self.config.seed, "rehash", self._generation))
            for entry in entries:
                entry[2] = self.pair(entry[0])
            self.t = ([_EMPTY] * self.m, [_EMPTY] * self.m)
            self.stash = []
            if self._reinsert(entries):
                self._stats.stash_occupancy = len(self.stash)
                return attempt
        self._stats.stash_occupancy = len(self.stash)
        raise RehashFailure(f"no hash pair placed {len(entries)} keys in {self.rehash_retries} attempts")

    def _reinsert(self, entries: list[list]) -> bool:
        for entry in entries:
            nestless, rounds = self._walk(entry, self.maxloop)
            self._stats.rehash_rounds += rounds
            if nestless is not None:
                if len(self.stash) >= self.s:
                    return False
                self.stash.append(nestless)
        return True

    def rehash(self) -> bool:
        """Resample the hash pair and reinsert everything; False after retry exhaustion."""
        try:
            self._rehash()
        except RehashFailure:
            return False
        return True

    def stats(self) -> TableStats:
        st = self._stats
        return TableStats(st.insertions, st.total_rounds, Counter(st.round_histogram), st.rehashes,
                          st.rehash_rounds, len(self.stash))

    def check_placement(self) -> None:
        """Raise AssertionError if any key sits outside its two cells or is stored twice."""
        seen = set()
        for i, table in enumerate(self.t):
            for pos, cell in enumerate(table):
                if cell is _EMPTY:
                    continue
                assert self.pair(cell[0])[i] == pos, f"key {cell[0]} misplaced in T{i + 1}[{pos}]"
                assert cell[0] not in seen, f"key {cell[0]} stored twice"
                seen.add(cell[0])
        for key, _, _ in self.stash:
            assert key not in seen, f"key {key} stored twice"
            seen.add(key)
        assert len(self.stash) <= self.s or not self.rehash_enabled
        assert len(seen) == self._size

    def snapshot(self) -> str:
        """Human-readable dump of configuration, seeds, tables and stash."""
        cfg = self.config
        lines = [
            f"config n={cfg.n} eps={cfg.eps} s={cfg.s} k={cfg.k} c={cfg.c} delta={cfg.delta} "
            f"source={cfg.source} seed={cfg.seed}",
            f"m={self.m} ell={cfg.ell} maxloop={self.maxloop} generation={self._generation} size={self._size}",
        ]
        for i, table in enumerate(self.t):
            for pos, cell in enumerate(table):
                if cell is not _EMPTY:
                    lines.append(f"T{i + 1}[{pos}] {cell[0]!r} {cell[1]!r}")
        for key, value, _ in self.stash:
            lines.append(f"stash {key!r} {value!r}")
        return "\n".join(lines) + "\n"


def new_table(n: int, eps=0.2, s: int = 1, k: int = 1, c: int | None = None, delta=0.5, seed: int = 0,
              *, source: str = "z", maxloop: int | None = None, rehash: bool = True) -> CuckooTable:
    """Configure a table for ``n`` keys.

    ``m = ceil((1 + eps) n)``, ``ell`` is the next power of two above
    ``n ** delta``, and ``maxloop`` defaults to ``ceil(3 (s + 2) log_{1+eps} n)``
    (at least 8). ``c`` defaults to the smallest value with
    ``c >= (s + 2) / (delta k)``; smaller values are accepted with a warning.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not as_fraction(eps) > 0:
        raise ValueError("eps must be > 0")
    if not 0 < as_fraction(delta) < 1:
        raise ValueError("delta must lie in (0, 1)")
    if s < 0 or k < 1:
        raise ValueError("need s >= 0 and k >= 1")
    need_c = min_lookup_tables(s, k, delta)
    if c is None:
        c = need_c
    elif c < 1:
        raise ValueError("c must be >= 1")
    elif c < need_c:
        warnings.warn(f"c={c} is below (s+2)/(delta k) = {need_c}; failure bounds no longer apply",
                      stacklevel=2)
    if maxloop is None:
        maxloop = default_maxloop(n, eps, s)
    elif maxloop < 1:
        raise ValueError("maxloop must be positive")
    cfg = TableConfig(n, eps, s, k, c, delta, seed, source,
                      m=table_size(n, eps), ell=lookup_size(n, delta), maxloop=maxloop)
    return CuckooTable(cfg, rehash=rehash)
