"""Cuckoo graphs: bipartite multigraphs with one edge ``(h1(x), h2(x))`` per key.

Left node ``u`` and right node ``v`` are distinct vertices; internally the
right side is shifted by ``m``. Isolated nodes never count toward any of the
component statistics.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Sequence, TextIO

from .hash_families import HashPairSource

Edge = tuple[int, int, int]  # (left node, right node, key)


class _DSU:
    def __init__(self):
        self.parent: dict[int, int] = {}

    def find(self, a: int) -> int:
        parent = self.parent
        parent.setdefault(a, a)
        root = a
        while parent[root] != root:
            root = parent[root]
        while parent[a] != root:
            parent[a], a = root, parent[a]
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[ra] = rb


@dataclass(frozen=True)
class CuckooGraph:
    m: int
    edges: tuple[Edge, ...]

    def __post_init__(self):
        seen = set()
        for u, v, key in self.edges:
            if not (0 <= u < self.m and 0 <= v < self.m):
                raise ValueError(f"edge ({u}, {v}) has a node index outside [0, {self.m})")
            if key in seen:
                raise ValueError(f"duplicate edge id {key}")
            seen.add(key)

    @classmethod
    def from_pairs(cls, m: int, pairs: Iterable[tuple[int, int]]) -> "CuckooGraph":
        """Build from bare ``(u, v)`` pairs, numbering edges 0, 1, 2, ..."""
        return cls(m, tuple((u, v, i) for i, (u, v) in enumerate(pairs)))

    def __len__(self) -> int:
        return len(self.edges)

    def nodes(self) -> set[int]:
        """Non-isolated vertices, right side shifted by ``m``."""
        out = set()
        for u, v, _ in self.edges:
            out.add(u)
            out.add(self.m + v)
        return out

    def subgraph(self, keep: Iterable[int]) -> "CuckooGraph":
        """Subgraph on the edges whose ids are in ``keep``."""
        keep = set(keep)
        return CuckooGraph(self.m, tuple(e for e in self.edges if e[2] in keep))

    def without(self, drop: Iterable[int]) -> "CuckooGraph":
        drop = set(drop)
        return CuckooGraph(self.m, tuple(e for e in self.edges if e[2] not in drop))

    def degrees(self) -> dict[int, int]:
        deg: dict[int, int] = defaultdict(int)
        for u, v, _ in self.edges:
            deg[u] += 1
            deg[self.m + v] += 1
        return deg

    def dump(self, fh: TextIO) -> None:
        fh.write(f"m {self.m}\n")
        for u, v, key in self.edges:
            fh.write(f"{u} {v} {key}\n")

    @classmethod
    def load(cls, fh: TextIO) -> "CuckooGraph":
        lines = [ln.split() for ln in fh if ln.strip()]
        if not lines or lines[0][0] != "m":
            raise ValueError("edge-list dump must start with 'm <m>'")
        m = int(lines[0][1])
        return cls(m, tuple((int(u), int(v), int(k)) for u, v, k in lines[1:]))


@dataclass(frozen=True)
class Component:
    nodes: int
    edges: int
    edge_ids: tuple[int, ...]

    @property
    def cyclomatic(self) -> int:
        return self.edges - self.nodes + 1

    @property
    def cyclic(self) -> bool:
        return self.cyclomatic >= 1


@dataclass(frozen=True)
class ComponentSummary:
    components: tuple[Component, ...]

    @property
    def count(self) -> int:
        return len(self.components)

    @property
    def cyclic_count(self) -> int:
        return sum(c.cyclic for c in self.components)

    @property
    def cyclomatic(self) -> int:
        return sum(c.cyclomatic for c in self.components)

    @property
    def excess(self) -> int:
        return self.cyclomatic - self.cyclic_count


def build_graph(keys: Sequence[int], pair: HashPairSource, m: int | None = None) -> CuckooGraph:
    """One edge ``(h1(x), h2(x))`` per key, labelled by the key itself."""
    if len(set(keys)) != len(keys):
        raise ValueError("keys must be distinct")
    if m is None:
        m = pair.m
    return CuckooGraph(m, tuple((*pair(x), x) for x in keys))


def components(g: CuckooGraph) -> ComponentSummary:
    dsu = _DSU()
    for u, v, _ in g.edges:
        dsu.union(u, g.m + v)
    node_count: dict[int, int] = defaultdict(int)
    for node in g.nodes():
        node_count[dsu.find(node)] += 1
    edge_ids: dict[int, list[int]] = defaultdict(list)
    for u, _, key in g.edges:
        edge_ids[dsu.find(u)].append(key)
    return ComponentSummary(tuple(
        Component(node_count[root], len(ids), tuple(ids)) for root, ids in edge_ids.items()
    ))


def cyclomatic_number(g: CuckooGraph) -> int:
    """``edges - nodes + components`` over non-isolated nodes."""
    return len(g.edges) - len(g.nodes()) + components(g).count


def count_cyclic_components(g: CuckooGraph) -> int:
    return components(g).cyclic_count


def excess(g: CuckooGraph) -> int:
    """Cyclomatic number minus the number of cyclic components."""
    return cyclomatic_number(g) - count_cyclic_components(g)


def two_core(g: CuckooGraph) -> CuckooGraph:
    """Maximum leafless subgraph, obtained by peeling leaf edges."""
    deg = g.degrees()
    incident: dict[int, list[Edge]] = defaultdict(list)
    for e in g.edges:
        incident[e[0]].append(e)
        incident[g.m + e[1]].append(e)
    removed: set[int] = set()
    stack = [node for node, d in deg.items() if d == 1]
    while stack:
        node = stack.pop()
        if deg[node] != 1:
            continue
        edge = next(e for e in incident[node] if e[2] not in removed)
        removed.add(edge[2])
        for end in (edge[0], g.m + edge[1]):
            deg[end] -= 1
            if deg[end] == 1:
                stack.append(end)
    return g.without(removed)


def is_leafless(g: CuckooGraph) -> bool:
    return all(d != 1 for d in g.degrees().values())
