"""Small hand-built graphs shared by the test modules."""

from cuckoo_stash.cuckoo_graph import CuckooGraph


def path_graph(edges=3, m=10):
    # alternating left/right path u0 - v0 - u1 - v1 ...
    pairs = []
    for i in range(edges):
        pairs.append((i // 2 + (i % 2), i // 2))
    return CuckooGraph.from_pairs(m, pairs)


def cycle_graph(length=4, m=10, offset=0):
    """Even cycle with ``length`` edges (length >= 2)."""
    half = length // 2
    pairs = []
    for i in range(half):
        pairs.append((offset + i, offset + i))
        pairs.append((offset + (i + 1) % half, offset + i))
    return CuckooGraph.from_pairs(m, pairs)
