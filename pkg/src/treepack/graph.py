"""Core graph types and operations.

Vertices are dense 1-indexed labels 1..n.  Edges are stored as (min, max)
pairs.  Graph and Embedding are immutable after construction; adjacency is
kept both as sorted neighbor tuples and as integer bitmasks (bit v set in
adj_mask(u) iff uv is an edge), which keeps the embedding engines fast.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

Edge = tuple[int, int]


def norm_edge(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


class Graph:
    """Undirected simple graph on vertices 1..n."""

    __slots__ = ("n", "edges", "_adj", "_mask", "_deg")

    def __init__(self, n: int, edges: Iterable[Edge] = ()):
        if n < 0:
            raise ValueError(f"vertex count must be >= 0, got {n}")
        es = set()
        for u, v in edges:
            if u == v:
                raise ValueError(f"self-loop at {u}")
            if not (1 <= u <= n and 1 <= v <= n):
                raise ValueError(f"edge ({u},{v}) out of range 1..{n}")
            es.add(norm_edge(u, v))
        self.n = n
        self.edges = frozenset(es)
        mask = [0] * (n + 1)
        deg = [0] * (n + 1)
        for u, v in es:
            mask[u] |= 1 << v
            mask[v] |= 1 << u
            deg[u] += 1
            deg[v] += 1
        self._mask = mask
        self._deg = deg
        self._adj: list[tuple[int, ...]] | None = None

    @property
    def m(self) -> int:
        return len(self.edges)

    def degree(self, v: int) -> int:
        return self._deg[v]

    def degrees(self) -> list[int]:
        """Degree of every vertex, index 0 unused."""
        return list(self._deg)

    def max_degree(self) -> int:
        return max(self._deg[1:], default=0)

    def min_degree(self) -> int:
        return min(self._deg[1:], default=0)

    def adj_mask(self, v: int) -> int:
        return self._mask[v]

    def neighbors(self, v: int) -> tuple[int, ...]:
        if self._adj is None:
            adj: list[list[int]] = [[] for _ in range(self.n + 1)]
            for u, w in sorted(self.edges):
                adj[u].append(w)
                adj[w].append(u)
            self._adj = [tuple(sorted(a)) for a in adj]
        return self._adj[v]

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self._mask[u] >> v & 1)

    def vertices(self) -> range:
        return range(1, self.n + 1)

    def __eq__(self, other) -> bool:
        return isinstance(other, Graph) and self.n == other.n and self.edges == other.edges

    def __hash__(self) -> int:
        return hash((self.n, self.edges))

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"


def is_connected(g: Graph) -> bool:
    if g.n <= 1:
        return True
    seen = 1 << 1
    stack = [1]
    while stack:
        u = stack.pop()
        rest = g.adj_mask(u) & ~seen
        while rest:
            low = rest & -rest
            v = low.bit_length() - 1
            rest ^= low
            seen |= low
            stack.append(v)
    return seen.bit_count() == g.n


class Tree(Graph):
    """A Graph certified connected with exactly n-1 edges."""

    __slots__ = ()

    def __init__(self, n: int, edges: Iterable[Edge]):
        super().__init__(n, edges)
        if self.m != self.n - 1:
            raise ValueError(f"tree on {self.n} vertices needs {self.n - 1} edges, got {self.m}")
        if not is_connected(self):
            raise ValueError("tree must be connected")

    def __repr__(self) -> str:
        return f"Tree(n={self.n})"


def leaves(t: Graph) -> tuple[int, ...]:
    return tuple(v for v in t.vertices() if t.degree(v) == 1)


class MalformedEmbedding(ValueError):
    """Embedding violates injectivity or range, distinct from an edge conflict."""


class Embedding:
    """Injection of guest vertices 1..guest_order into host labels."""

    __slots__ = ("guest_order", "map")

    def __init__(self, mapping: Sequence[int]):
        m = tuple(mapping)
        if len(set(m)) != len(m):
            raise MalformedEmbedding("embedding is not injective")
        if any(x < 1 for x in m):
            raise MalformedEmbedding("host labels must be >= 1")
        self.guest_order = len(m)
        self.map = m

    def __call__(self, v: int) -> int:
        return self.map[v - 1]

    def image(self) -> frozenset[int]:
        return frozenset(self.map)

    @classmethod
    def identity(cls, n: int) -> "Embedding":
        return cls(range(1, n + 1))

    @classmethod
    def from_dict(cls, d: dict[int, int], guest_order: int) -> "Embedding":
        if sorted(d) != list(range(1, guest_order + 1)):
            raise MalformedEmbedding("mapping must cover guest vertices 1..order")
        return cls([d[v] for v in range(1, guest_order + 1)])

    def __eq__(self, other) -> bool:
        return isinstance(other, Embedding) and self.map == other.map

    def __hash__(self) -> int:
        return hash(self.map)

    def __repr__(self) -> str:
        return f"Embedding({self.map})"


def apply_embedding(f: Embedding, g: Graph, host_n: int) -> Graph:
    """Image of g under f, as a graph on host_n vertices."""
    if f.guest_order != g.n:
        raise MalformedEmbedding(f"embedding covers {f.guest_order} vertices, guest has {g.n}")
    if any(x > host_n for x in f.map):
        raise MalformedEmbedding(f"image exceeds host range 1..{host_n}")
    return Graph(host_n, (norm_edge(f(u), f(v)) for u, v in g.edges))


def edge_union(g: Graph, h: Graph) -> Graph:
    """Union of the edge sets, on the larger of the two label ranges."""
    return Graph(max(g.n, h.n), g.edges | h.edges)


@dataclass(frozen=True)
class PackingResult:
    ok: bool
    # (i, j, edge): embeddings i < j collide on edge, first hit under the
    # deterministic scan (embeddings in input order, edges sorted).
    first_conflict: tuple[int, int, Edge] | None = None

    def __bool__(self) -> bool:
        return self.ok


def verify_packing(pairs: Sequence[tuple[Graph, Embedding]], host_n: int) -> PackingResult:
    """Check that the embedded guests are pairwise edge-disjoint in K_host_n.

    Malformed embeddings raise MalformedEmbedding; a genuine edge collision
    is returned as a PackingResult naming the first offending pair.
    """
    owner: dict[Edge, int] = {}
    for i, (g, f) in enumerate(pairs):
        if f.guest_order != g.n:
            raise MalformedEmbedding(f"embedding {i} covers {f.guest_order} vertices, guest has {g.n}")
        if any(x > host_n for x in f.map):
            raise MalformedEmbedding(f"embedding {i} exceeds host range 1..{host_n}")
        for u, v in sorted(g.edges):
            e = norm_edge(f(u), f(v))
            j = owner.get(e)
            if j is not None:
                return PackingResult(False, (j, i, e))
            owner[e] = i
    return PackingResult(True)


@dataclass(frozen=True)
class SortedVertexOrder:
    """Vertices by non-increasing degree, ties broken by ascending label."""

    order: tuple[int, ...]

    def rank(self, i: int) -> int:
        """The i-th vertex, 1-indexed."""
        return self.order[i - 1]


def sorted_vertices(g: Graph) -> SortedVertexOrder:
    order = sorted(g.vertices(), key=lambda v: (-g.degree(v), v))
    # non-increasing degree implies d(v_i) <= 2m/i at every rank
    m2 = 2 * g.m
    for i, v in enumerate(order, 1):
        assert g.degree(v) * i <= m2, f"rank bound violated at rank {i}"
    return SortedVertexOrder(tuple(order))


def binomial_tail_bound(trials: int, p: float, mu: float, side: str) -> float:
    """Exponential tail bound for Bin(trials, p).

    side="upper" needs mu >= trials*p and bounds Pr[X >= 2*mu] by exp(-mu/3);
    side="lower" needs mu <= trials*p and bounds Pr[X <= mu/2] by exp(-mu/8).
    """
    mean = trials * p
    if side == "upper":
        if mu < mean:
            raise ValueError(f"upper bound needs mu >= np ({mu} < {mean})")
        return math.exp(-mu / 3.0)
    if side == "lower":
        if mu > mean:
            raise ValueError(f"lower bound needs mu <= np ({mu} > {mean})")
        return math.exp(-mu / 8.0)
    raise ValueError(f"side must be 'upper' or 'lower', got {side!r}")


def induced_subgraph(g: Graph, vertices: Iterable[int]) -> tuple[Graph, dict[int, int], tuple[int, ...]]:
    """Induced subgraph on the given vertices, relabeled densely.

    Returns (subgraph, old->new map, new->old tuple indexed from 1 via [new-1]).
    """
    vs = sorted(set(vertices))
    old_to_new = {v: i for i, v in enumerate(vs, 1)}
    sub_edges = []
    vset = set(vs)
    for u, v in g.edges:
        if u in vset and v in vset:
            sub_edges.append((old_to_new[u], old_to_new[v]))
    return Graph(len(vs), sub_edges), old_to_new, tuple(vs)


# Text edge-list format shared by every module: first line "n m", then one
# line "u v" per edge, 1-indexed.

def graph_to_text(g: Graph) -> str:
    lines = [f"{g.n} {g.m}"]
    lines.extend(f"{u} {v}" for u, v in sorted(g.edges))
    return "\n".join(lines) + "\n"


def parse_graph_text(lines: Sequence[str], start: int = 0) -> tuple[Graph, int]:
    """Parse one edge-list block starting at lines[start]; returns (graph, next line index)."""
    header = lines[start].split()
    if len(header) != 2:
        raise ValueError(f"line {start + 1}: expected 'n m', got {lines[start]!r}")
    n, m = int(header[0]), int(header[1])
    edges = []
    for i in range(start + 1, start + 1 + m):
        u, v = lines[i].split()
        edges.append((int(u), int(v)))
    return Graph(n, edges), start + 1 + m


def read_graph(path) -> Graph:
    with open(path) as fh:
        lines = [ln for ln in fh.read().splitlines() if ln.strip()]
    g, _ = parse_graph_text(lines)
    return g


def write_graph(path, g: Graph) -> None:
    with open(path, "w") as fh:
        fh.write(graph_to_text(g))
