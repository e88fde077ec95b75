"""JIT-compiled trial loops for the Monte Carlo experiments.

Each trial reproduces, draw for draw, what the reference objects do:

    trial_seed = derive_seed(base, t)
    keys       = random_keys(n, derive_seed(trial_seed, 1))
    pair       = sample_source(kind, m, derive_seed(trial_seed, 2), ...)

so a kernel result can always be replayed with :mod:`cuckoo_stash.hash_families`,
:mod:`cuckoo_stash.cuckoo_graph` and :mod:`cuckoo_stash.cuckoo_table`. All
arithmetic is on ``uint64``; mixing in Python ints would silently promote to
float64, hence the module-level constants.
"""

from __future__ import annotations

import numpy as np
from numba import njit

U64 = np.uint64
GOLDEN = U64(0x9E3779B97F4A7C15)
MIX1 = U64(0xBF58476D1CE4E5B9)
MIX2 = U64(0x94D049BB133111EB)
P61 = U64((1 << 61) - 1)
M32 = U64(0xFFFFFFFF)
M29 = U64((1 << 29) - 1)
ZERO = U64(0)
ONE = U64(1)
TWO = U64(2)
S3, S27, S29, S30, S31, S32, S61 = (U64(v) for v in (3, 27, 29, 30, 31, 32, 61))

SOURCE_RANDOM = 0
SOURCE_Z = 1


@njit(cache=True, nogil=True)
def mix64(z):
    z = (z ^ (z >> S30)) * MIX1
    z = (z ^ (z >> S27)) * MIX2
    return z ^ (z >> S31)


@njit(cache=True, nogil=True)
def fold(h, part):
    return mix64(h ^ mix64(part))


@njit(cache=True, nogil=True)
def next_u64(state):
    state[0] += GOLDEN
    return mix64(state[0])


@njit(cache=True, nogil=True)
def below(state, r):
    threshold = (ZERO - r) % r
    while True:
        v = next_u64(state)
        if v >= threshold:
            return v % r


@njit(cache=True, nogil=True)
def mulmod61(a, b):
    a_hi = a >> S32
    a_lo = a & M32
    b_hi = b >> S32
    b_lo = b & M32
    hh = a_hi * b_hi
    mid = a_hi * b_lo + a_lo * b_hi
    ll = a_lo * b_lo
    r = (hh << S3) + (mid >> S29) + ((mid & M29) << S32) + (ll >> S61) + (ll & P61)
    r = (r & P61) + (r >> S61)
    if r >= P61:
        r -= P61
    return r


@njit(cache=True, nogil=True)
def poly61(coeffs, x):
    acc = ZERO
    for j in range(coeffs.shape[0] - 1, -1, -1):
        acc = mulmod61(acc, x) + coeffs[j]
        if acc >= P61:
            acc -= P61
    return acc


@njit(cache=True, nogil=True)
def draw_keys(state, n):
    keys = np.empty(n, dtype=np.uint64)
    for i in range(n):
        keys[i] = below(state, P61)
    return keys


@njit(cache=True, nogil=True)
def has_duplicates(keys):
    srt = np.sort(keys)
    for i in range(1, srt.shape[0]):
        if srt[i] == srt[i - 1]:
            return True
    return False


@njit(cache=True, nogil=True)
def sample_z(state, k, c, ell, m):
    kappa = 2 * k
    fco = np.empty((2, kappa), dtype=np.uint64)
    gco = np.empty((c, kappa), dtype=np.uint64)
    z = np.empty((2, c, ell), dtype=np.uint64)
    for i in range(2):
        for a in range(kappa):
            fco[i, a] = below(state, P61)
    for j in range(c):
        for a in range(kappa):
            gco[j, a] = below(state, P61)
    um = U64(m)
    for i in range(2):
        for j in range(c):
            for q in range(ell):
                z[i, j, q] = below(state, um)
    return fco, gco, z


@njit(cache=True, nogil=True)
def hash_z(keys, fco, gco, z, m, ell):
    n = keys.shape[0]
    c = gco.shape[0]
    um = U64(m)
    uell = U64(ell)
    h1 = np.empty(n, dtype=np.int64)
    h2 = np.empty(n, dtype=np.int64)
    for i in range(n):
        x = keys[i]
        a = poly61(fco[0], x) % um
        b = poly61(fco[1], x) % um
        for j in range(c):
            gj = np.int64(poly61(gco[j], x) % uell)
            a += z[0, j, gj]
            b += z[1, j, gj]
        h1[i] = np.int64(a % um)
        h2[i] = np.int64(b % um)
    return h1, h2


@njit(cache=True, nogil=True)
def hash_random(keys, state, m):
    n = keys.shape[0]
    um = U64(m)
    s1 = next_u64(state)
    s2 = next_u64(state)
    h1 = np.empty(n, dtype=np.int64)
    h2 = np.empty(n, dtype=np.int64)
    for i in range(n):
        h1[i] = np.int64(mix64(mix64(keys[i] ^ s1)) % um)
        h2[i] = np.int64(mix64(mix64(keys[i] ^ s2)) % um)
    return h1, h2


@njit(cache=True, nogil=True)
def trial_hashes(base, t, n, m, source, k, c, ell):
    """Keys and hash values of one trial; ``ok`` is False if the keys collided."""
    trial_seed = fold(base, U64(t))
    state = np.empty(1, dtype=np.uint64)
    state[0] = fold(trial_seed, ONE)
    keys = draw_keys(state, n)
    ok = not has_duplicates(keys)
    state[0] = fold(trial_seed, TWO)
    if source == SOURCE_Z:
        fco, gco, z = sample_z(state, k, c, ell, m)
        h1, h2 = hash_z(keys, fco, gco, z, m, ell)
    else:
        h1, h2 = hash_random(keys, state, m)
    return keys, h1, h2, ok


@njit(cache=True, nogil=True)
def _find(parent, a):
    root = a
    while parent[root] != root:
        root = parent[root]
    while parent[a] != root:
        nxt = parent[a]
        parent[a] = root
        a = nxt
    return root


@njit(cache=True, nogil=True)
def graph_excess(h1, h2, m):
    """Sum over components of ``max(0, edges - nodes)``."""
    size = 2 * m
    parent = np.arange(size)
    edges = np.zeros(size, dtype=np.int64)
    nodes = np.zeros(size, dtype=np.int64)
    touched = np.zeros(size, dtype=np.bool_)
    for i in range(h1.shape[0]):
        a = h1[i]
        b = m + h2[i]
        touched[a] = True
        touched[b] = True
        ra = _find(parent, a)
        rb = _find(parent, b)
        if ra != rb:
            parent[ra] = rb
    for i in range(h1.shape[0]):
        edges[_find(parent, h1[i])] += 1
    for v in range(size):
        if touched[v]:
            nodes[_find(parent, v)] += 1
    total = 0
    for v in range(size):
        if edges[v] > nodes[v]:
            total += edges[v] - nodes[v]
    return total


@njit(cache=True, nogil=True)
def insert_all(h1, h2, m, maxloop, hist):
    """Insert keys 0..n-1 in order with the nestless-key walk and an unbounded stash.

    Adds each insertion's round count to ``hist`` and returns how many keys
    were sent to the stash.
    """
    t1 = np.full(m, -1, dtype=np.int64)
    t2 = np.full(m, -1, dtype=np.int64)
    stashed = 0
    for key in range(h1.shape[0]):
        nestless = key
        side = 0
        rounds = 0
        while rounds < maxloop:
            rounds += 1
            if side == 0:
                pos = h1[nestless]
                nestless, t1[pos] = t1[pos], nestless
            else:
                pos = h2[nestless]
                nestless, t2[pos] = t2[pos], nestless
            if nestless < 0:
                break
            side = 1 - side
        if nestless >= 0:
            stashed += 1
        hist[rounds] += 1
    return stashed


@njit(cache=True, nogil=True)
def excess_trials(base, t0, t1, n, m, source, k, c, ell):
    """Excess of the cuckoo graph for trials ``t0 <= t < t1``; -1 marks a key collision."""
    out = np.empty(t1 - t0, dtype=np.int64)
    for t in range(t0, t1):
        keys, h1, h2, ok = trial_hashes(base, t, n, m, source, k, c, ell)
        out[t - t0] = graph_excess(h1, h2, m) if ok else -1
    return out


@njit(cache=True, nogil=True)
def insertion_trials(base, t0, t1, n, m, source, k, c, ell, maxloop, s, with_excess, hist):
    """Per trial: stash demand and (optionally) excess.

    ``hist`` only accumulates trials whose demand fits in a stash of size ``s``.
    """
    demand = np.empty(t1 - t0, dtype=np.int64)
    exc = np.full(t1 - t0, -1, dtype=np.int64)
    local = np.zeros(maxloop + 1, dtype=np.int64)
    for t in range(t0, t1):
        keys, h1, h2, ok = trial_hashes(base, t, n, m, source, k, c, ell)
        if not ok:
            demand[t - t0] = -1
            continue
        local[:] = 0
        d = insert_all(h1, h2, m, maxloop, local)
        demand[t - t0] = d
        if d <= s:
            hist += local
        if with_excess:
            exc[t - t0] = graph_excess(h1, h2, m)
    return demand, exc
