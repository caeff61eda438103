"""Tree generation, structure detection, and reserved-block construction.

The packing pipeline reserves, for the j-th tree, a small set of spare
vertices (leaves or a pendant path of prescribed order) plus one anchor
vertex, and replaces the induced subtree by a path or star "completion" that
dominates the real degrees.  The completions of all k trees are later packed
into the k reserved host labels.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from enum import Enum

from .graph import Edge, Graph, Tree, leaves, norm_edge
from .profiles import ConstantsProfile

PATH = "path"
STAR = "star"


# ---------------------------------------------------------------------------
# Prüfer codes and random tree families
# ---------------------------------------------------------------------------

def decode_prufer(seq: list[int], n: int) -> Tree:
    """The unique labeled tree on 1..n with the given Prüfer sequence."""
    if n < 2:
        raise ValueError("need n >= 2")
    if len(seq) != n - 2:
        raise ValueError(f"sequence length must be n-2 = {n - 2}, got {len(seq)}")
    if any(not 1 <= x <= n for x in seq):
        raise ValueError("sequence labels out of range")
    deg = [1] * (n + 1)
    for x in seq:
        deg[x] += 1
    edges = []
    # pointer scan: always join the smallest remaining leaf to the next symbol
    ptr = 1
    while deg[ptr] != 1:
        ptr += 1
    leaf = ptr
    for x in seq:
        edges.append((leaf, x))
        deg[x] -= 1
        if deg[x] == 1 and x < ptr:
            leaf = x
        else:
            ptr += 1
            while deg[ptr] != 1:
                ptr += 1
            leaf = ptr
    edges.append((leaf, n))
    return Tree(n, edges)


def encode_prufer(t: Tree) -> list[int]:
    """Inverse of decode_prufer."""
    n = t.n
    if n < 2:
        raise ValueError("need n >= 2")
    deg = t.degrees()
    adj = {v: set(t.neighbors(v)) for v in t.vertices()}
    seq = []
    ptr = 1
    while deg[ptr] != 1:
        ptr += 1
    leaf = ptr
    for _ in range(n - 2):
        x = min(adj[leaf])
        seq.append(x)
        adj[x].discard(leaf)
        deg[x] -= 1
        if deg[x] == 1 and x < ptr:
            leaf = x
        else:
            ptr += 1
            while deg[ptr] != 1:
                ptr += 1
            leaf = ptr
    return seq


def random_tree(n: int, rng: random.Random) -> Tree:
    """Uniform random labeled tree."""
    if n == 1:
        return Tree(1, [])
    if n == 2:
        return Tree(2, [(1, 2)])
    return decode_prufer([rng.randint(1, n) for _ in range(n - 2)], n)


def random_bounded_tree(n: int, d: int, rng: random.Random) -> Tree:
    """Random tree with max degree <= d (sequential attachment, not uniform)."""
    if d < 2 and n > 2:
        raise ValueError("need degree bound >= 2")
    if n == 1:
        return Tree(1, [])
    edges = []
    deg = [0] * (n + 1)
    for v in range(2, n + 1):
        pool = [u for u in range(1, v) if deg[u] < d]
        u = pool[rng.randrange(len(pool))]
        edges.append((u, v))
        deg[u] += 1
        deg[v] += 1
    return Tree(n, edges)


def random_path(n: int, rng: random.Random) -> Tree:
    order = list(range(1, n + 1))
    rng.shuffle(order)
    return Tree(n, [(order[i], order[i + 1]) for i in range(n - 1)])


def random_star_heavy(n: int, rng: random.Random) -> Tree:
    """Tree dominated by one hub: hub degree uniform in [0.45n, 0.85n],
    remaining vertices hang in a blob off a single hub neighbor, so the hub
    keeps at least hub_degree - 1 leaf neighbors."""
    if n < 4:
        return random_tree(n, rng)
    hub = rng.randint(1, n)
    others = [v for v in range(1, n + 1) if v != hub]
    rng.shuffle(others)
    lo = max(1, math.floor(0.45 * n))
    hi = max(lo, min(n - 1, math.floor(0.85 * n)))
    hub_deg = rng.randint(lo, hi)
    edges = [(hub, v) for v in others[:hub_deg]]
    rest = others[hub_deg:]
    if rest:
        blob = [others[0], rest[0]]
        edges.append((others[0], rest[0]))
        for v in rest[1:]:
            edges.append((blob[rng.randrange(1, len(blob))], v))
            blob.append(v)
    return Tree(n, edges)


TREE_FAMILIES = ("uniform", "bounded-degree", "star-heavy", "path-heavy")


def random_family_tree(n: int, family: str, rng: random.Random, degree_bound: int = 10) -> Tree:
    if family == "uniform":
        return random_tree(n, rng)
    if family == "bounded-degree":
        return random_bounded_tree(n, min(degree_bound, max(2, n - 1)), rng)
    if family == "star-heavy":
        return random_star_heavy(n, rng)
    if family == "path-heavy":
        return random_path(n, rng)
    raise ValueError(f"unknown family {family!r}; choose from {TREE_FAMILIES}")


# ---------------------------------------------------------------------------
# Pendant paths and eligibility
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PendantPath:
    """A cut edge plus the path component of T - e it dangles.

    vertices runs from the attachment end (the endpoint of the cut edge
    inside the path) outward; every listed vertex has degree <= 2 in T.
    """

    cut_edge: Edge
    vertices: tuple[int, ...]


def _component_after_cut(t: Tree, keep: int, drop: int) -> list[int]:
    """Vertices reachable from `keep` without crossing edge (keep, drop)."""
    seen = {keep}
    stack = [keep]
    while stack:
        u = stack.pop()
        for v in t.neighbors(u):
            if u == keep and v == drop:
                continue
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return sorted(seen)


def find_pendant_path(t: Tree, order: int) -> PendantPath | None:
    """Smallest cut edge (sorted order) whose dangling component is a path of
    exactly `order` vertices, each of degree <= 2 in T; None if no edge works."""
    if not 1 <= order < t.n:
        raise ValueError(f"order must be in 1..{t.n - 1}")
    for e in sorted(t.edges):
        for attach, anchor in (e, (e[1], e[0])):
            comp = _component_after_cut(t, attach, anchor)
            if len(comp) != order:
                continue
            if any(t.degree(v) > 2 for v in comp):
                continue
            # degrees <= 2 within a tree component: it is a path; walk it
            path = [attach]
            prev = anchor
            cur = attach
            while len(path) < order:
                nxt = [w for w in t.neighbors(cur) if w != prev]
                prev, cur = cur, nxt[0]
                path.append(cur)
            return PendantPath(cut_edge=e, vertices=tuple(path))
    return None


@dataclass(frozen=True)
class Eligibility:
    """Whether a tree offers `need` spare leaves or a pendant path of order
    `need`, with the witnessing vertex set."""

    ok: bool
    branch: str | None = None  # "leaves" | "pendant"
    spares: tuple[int, ...] = ()
    pendant: PendantPath | None = None


def check_eligibility(t: Tree, need: int) -> Eligibility:
    if need <= 0:
        return Eligibility(True, "leaves", ())
    pend = find_pendant_path(t, need) if need < t.n else None
    if pend is not None:
        return Eligibility(True, "pendant", pend.vertices, pend)
    lv = leaves(t)
    if len(lv) >= need:
        return Eligibility(True, "leaves", tuple(sorted(lv)[:need]))
    return Eligibility(False)


# ---------------------------------------------------------------------------
# Classification by maximum degree
# ---------------------------------------------------------------------------

class DegreeClass(Enum):
    LOW = "low"    # max degree below the mid threshold
    MID = "mid"    # between mid and high thresholds
    HIGH = "high"  # at least 2n/3: giant hub


def classify(t: Tree, n: int, profile: ConstantsProfile) -> DegreeClass:
    if profile.n != n:
        raise ValueError(f"profile built for n={profile.n}, classify called with n={n}")
    if t.n > n:
        raise ValueError(f"tree order {t.n} exceeds n={n}")
    delta = t.max_degree()
    if delta < profile.mid_degree_threshold:
        return DegreeClass.LOW
    if delta < profile.high_degree_threshold:
        return DegreeClass.MID
    return DegreeClass.HIGH


# ---------------------------------------------------------------------------
# Reserved blocks and completions
# ---------------------------------------------------------------------------

class ReservationError(ValueError):
    """Tree cannot supply the reserved block demanded by its class."""


@dataclass(frozen=True)
class CompletionSpec:
    """A path or star on the reserved guest vertices, containing the induced
    real subtree, used as the tree's stand-in inside the reserved host block."""

    vertices: tuple[int, ...]
    edges: frozenset[Edge]
    core_edges: frozenset[Edge]      # induced real tree edges, subset of edges
    shape: str                       # PATH or STAR
    center: int | None = None        # star anchor
    extra_end_edge: Edge | None = None  # path branch: designated added edge

    @property
    def order(self) -> int:
        return len(self.vertices)

    def __post_init__(self):
        if self.shape not in (PATH, STAR):
            raise ValueError(f"bad shape {self.shape!r}")
        if not self.core_edges <= self.edges:
            raise ValueError("core edges must be contained in the completion")
        if len(self.edges) != max(0, self.order - 1):
            raise ValueError("completion must span its vertices as a tree")
        if self.shape == STAR and self.order > 1:
            if self.center is None or any(self.center not in e for e in self.edges):
                raise ValueError("star completion needs all edges at its center")


@dataclass(frozen=True)
class ReservedBlock:
    """Spare vertices plus anchor for one tree, with its completion."""

    need: int
    shape: str
    spares: tuple[int, ...]          # the required leaves or pendant path
    reserved: tuple[int, ...]        # spares plus the anchor, sorted
    center: int | None               # star anchor (max-degree vertex)
    tail: int | None                 # path anchor (extra leaf)
    completion: CompletionSpec


def _path_block(t: Tree, pend: PendantPath, need: int) -> ReservedBlock:
    spares = pend.vertices
    outside = [v for v in sorted(leaves(t)) if v not in spares]
    if not outside:
        raise ReservationError("no leaf available outside the pendant path")
    tail = outside[0]
    reserved = tuple(sorted(spares + (tail,)))
    core = frozenset(
        norm_edge(spares[i], spares[i + 1]) for i in range(len(spares) - 1)
    )
    extra = norm_edge(tail, spares[0])  # attach at the cut-edge end
    comp = CompletionSpec(
        vertices=reserved,
        edges=core | {extra},
        core_edges=core,
        shape=PATH,
        extra_end_edge=extra,
    )
    return ReservedBlock(need, PATH, spares, reserved, None, tail, comp)


def _trivial_path_block(t: Tree) -> ReservedBlock:
    tail = min(leaves(t)) if t.n > 1 else 1
    comp = CompletionSpec(
        vertices=(tail,), edges=frozenset(), core_edges=frozenset(), shape=PATH
    )
    return ReservedBlock(0, PATH, (), (tail,), None, tail, comp)


def _star_block(t: Tree, need: int, leaf_neighbors_only: bool) -> ReservedBlock:
    deg = t.degrees()
    center = min(v for v in t.vertices() if deg[v] == t.max_degree())
    if leaf_neighbors_only:
        pool = sorted(v for v in t.neighbors(center) if deg[v] == 1)
        what = "leaf-neighbors of the max-degree vertex"
    else:
        pool = sorted(v for v in leaves(t) if v != center)
        what = "leaves"
    if len(pool) < need:
        raise ReservationError(f"tree has {len(pool)} {what}, needs {need}")
    spares = tuple(pool[:need])
    reserved = tuple(sorted(spares + (center,)))
    core = frozenset(norm_edge(center, a) for a in spares if t.has_edge(center, a))
    full = frozenset(norm_edge(center, a) for a in spares)
    comp = CompletionSpec(
        vertices=reserved, edges=full, core_edges=core, shape=STAR, center=center
    )
    return ReservedBlock(need, STAR, spares, reserved, center, None, comp)


def build_reserved(t: Tree, j: int, k: int, cls: DegreeClass) -> ReservedBlock:
    """Reserved block for the j-th tree: k-1-j spares plus one anchor.

    HIGH-class trees must reserve leaf-neighbors of the hub (star shape);
    MID-class trees reserve leaves around the hub (the hub anchors the star
    and its reserved host label stays untouched until this tree is packed);
    LOW-class trees prefer a pendant path and fall back to a leaf star.
    """
    need = k - 1 - j
    if need < 0:
        raise ValueError(f"j={j} exceeds k-1={k - 1}")
    if t.n <= need:
        raise ReservationError(f"tree of order {t.n} cannot spare {need} vertices")

    if cls is DegreeClass.HIGH:
        block = _star_block(t, need, leaf_neighbors_only=True)
    elif cls is DegreeClass.MID:
        block = _star_block(t, need, leaf_neighbors_only=False)
    else:
        if need == 0:
            block = _trivial_path_block(t)
        else:
            pend = find_pendant_path(t, need)
            if pend is not None:
                block = _path_block(t, pend, need)
            else:
                elig = check_eligibility(t, need)
                if not elig.ok:
                    raise ReservationError(
                        f"tree offers neither {need} leaves nor a pendant path of order {need}"
                    )
                block = _star_block(t, need, leaf_neighbors_only=False)

    _assert_degree_domination(t, block)
    return block


def _assert_degree_domination(t: Tree, block: ReservedBlock) -> None:
    # real degrees must be dominated by completion degrees on the reserved
    # set minus the star center; the order-1 path block is the one known
    # exception (its single vertex carries a real edge the completion cannot
    # show) and is handled by keeping it off the high-class center hosts.
    comp = block.completion
    if comp.order <= 1:
        return
    cdeg: dict[int, int] = {v: 0 for v in comp.vertices}
    for u, v in comp.edges:
        cdeg[u] += 1
        cdeg[v] += 1
    for v in comp.vertices:
        if v == block.center:
            continue
        assert t.degree(v) <= cdeg[v], (
            f"completion under-dominates vertex {v}: {t.degree(v)} > {cdeg[v]}"
        )
