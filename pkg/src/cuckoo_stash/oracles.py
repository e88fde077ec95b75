"""Brute-force ground truth for small cuckoo graphs.

Both oracles enumerate edge subsets in order of increasing size and share no
code with the closed-form excess computation in :mod:`cuckoo_stash.cuckoo_graph`.
"""

from __future__ import annotations

from itertools import combinations

from .cuckoo_graph import CuckooGraph

MAX_ORACLE_EDGES = 20


def _check_size(g: CuckooGraph) -> None:
    if len(g.edges) > MAX_ORACLE_EDGES:
        raise ValueError(f"oracle limited to {MAX_ORACLE_EDGES} edges, got {len(g.edges)}")


def _endpoints(g: CuckooGraph) -> list[tuple[int, int]]:
    # compact vertex ids so the per-subset union-find can use flat lists
    ids: dict[int, int] = {}
    out = []
    for u, v, _ in g.edges:
        a = ids.setdefault(u, len(ids))
        b = ids.setdefault(g.m + v, len(ids))
        out.append((a, b))
    return out


def _is_pseudoforest(ends: list[tuple[int, int]], kept: tuple[int, ...], n_nodes: int) -> bool:
    """True iff every component of the kept edges has at most as many edges as nodes."""
    parent = list(range(n_nodes))
    surplus = [-1] * n_nodes  # edges - nodes, tracked at each root

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i in kept:
        a, b = ends[i]
        ra, rb = find(a), find(b)
        if ra == rb:
            surplus[ra] += 1
        else:
            parent[ra] = rb
            surplus[rb] += surplus[ra] + 1
        if surplus[find(a)] > 0:
            return False
    return True


def excess_oracle(g: CuckooGraph) -> int:
    """Fewest edge deletions leaving every component acyclic or unicyclic."""
    _check_size(g)
    ends = _endpoints(g)
    n_nodes = 2 * len(ends)
    everything = range(len(ends))
    for d in range(len(ends) + 1):
        for dropped in combinations(everything, d):
            gone = set(dropped)
            kept = tuple(i for i in everything if i not in gone)
            if _is_pseudoforest(ends, kept, n_nodes):
                return d
    raise AssertionError("unreachable: the empty edge set is always a pseudoforest")


def _orientable(ends: list[tuple[int, int]], kept: tuple[int, ...]) -> bool:
    """Assign every kept edge to one of its endpoints, each node used at most once."""
    owner: dict[int, int] = {}

    def augment(e: int, seen: set[int]) -> bool:
        for node in ends[e]:
            if node in seen:
                continue
            seen.add(node)
            if node not in owner or augment(owner[node], seen):
                owner[node] = e
                return True
        return False

    return all(augment(e, set()) for e in kept)


def feasible_with_stash_oracle(g: CuckooGraph, s: int) -> bool:
    """Can all keys be stored with at most ``s`` of them in the stash?"""
    _check_size(g)
    if s < 0:
        raise ValueError("stash capacity must be >= 0")
    ends = _endpoints(g)
    everything = range(len(ends))
    for d in range(min(s, len(ends)) + 1):
        for dropped in combinations(everything, d):
            gone = set(dropped)
            if _orientable(ends, tuple(i for i in everything if i not in gone)):
                return True
    return False
