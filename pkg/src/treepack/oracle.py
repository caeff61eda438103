"""Ground truth at small orders: exhaustive tree enumeration and complete
packing search by pruned backtracking, plus the consecutive-orders suites."""

from __future__ import annotations

import itertools
import random
import time
from dataclasses import dataclass, field

from .graph import Edge, Embedding, Graph, Tree, norm_edge, verify_packing
from .embed_common import derive_seed

MAX_ENUM_ORDER = 10


# ---------------------------------------------------------------------------
# Non-isomorphic tree enumeration (center-rooted canonical codes)
# ---------------------------------------------------------------------------

def _centers(t: Tree) -> list[int]:
    """The 1 or 2 middle vertices under repeated leaf stripping."""
    if t.n <= 2:
        return list(t.vertices())
    deg = t.degrees()
    alive = t.n
    layer = [v for v in t.vertices() if deg[v] == 1]
    while alive > 2:
        nxt = []
        for v in layer:
            deg[v] = 0
            for w in t.neighbors(v):
                if deg[w] > 0:
                    deg[w] -= 1
                    if deg[w] == 1:
                        nxt.append(w)
        alive -= len(layer)
        layer = nxt
    return sorted(layer)


def _rooted_code(t: Tree, root: int) -> tuple:
    def code(v: int, parent: int) -> tuple:
        return tuple(sorted(code(w, v) for w in t.neighbors(v) if w != parent))

    return code(root, 0)


def canonical_code(t: Tree) -> tuple:
    """Isomorphism-invariant code: minimum center-rooted subtree encoding."""
    return min(_rooted_code(t, c) for c in _centers(t))


def enumerate_trees(order: int) -> list[Tree]:
    """One representative per isomorphism class, by leaf growth + canonical
    deduplication.  Capped at order 10."""
    if order < 1:
        raise ValueError("order must be positive")
    if order > MAX_ENUM_ORDER:
        raise ValueError(f"order {order} exceeds the enumeration cap {MAX_ENUM_ORDER}")
    level: dict[tuple, Tree] = {canonical_code(Tree(1, [])): Tree(1, [])}
    for m in range(2, order + 1):
        nxt: dict[tuple, Tree] = {}
        for t in level.values():
            for v in t.vertices():
                grown = Tree(m, list(t.edges) + [(v, m)])
                nxt.setdefault(canonical_code(grown), grown)
        level = nxt
    return [level[c] for c in sorted(level)]


# ---------------------------------------------------------------------------
# Complete packing search
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PackSearch:
    status: str                      # "some" | "none" | "timeout"
    embeddings: tuple[Embedding, ...] | None
    nodes: int

    def __bool__(self) -> bool:
        return self.status == "some"


def _guest_order(g: Graph) -> list[int]:
    """Connected-expansion order over vertices of positive degree: components
    by falling degree, DFS inside.  Isolated vertices never constrain edges
    and are filled in afterwards."""
    order: list[int] = []
    seen: set[int] = set()
    for start in sorted(g.vertices(), key=lambda v: (-g.degree(v), v)):
        if start in seen or g.degree(start) == 0:
            continue
        seen.add(start)
        stack = [start]
        while stack:
            u = stack.pop()
            order.append(u)
            for w in sorted(g.neighbors(u), reverse=True):
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
    return order


def exact_pack(
    guests: list[Graph],
    host_n: int,
    time_budget: float | None = None,
    node_budget: int | None = None,
) -> PackSearch:
    """Complete search for pairwise edge-disjoint placements into K_host_n.

    Guests are processed in decreasing edge count.  The host is fully
    symmetric before anything is placed, so the first guest is placed
    canonically (its expansion order onto hosts 1,2,...), which loses no
    solutions.  Later guest vertices backtrack over the bitmask of hosts
    compatible with all placed neighbors, pruned by residual host degree.
    """
    total_edges = sum(g.m for g in guests)
    if total_edges > host_n * (host_n - 1) // 2:
        raise ValueError("guests carry more edges than the host")
    if any(g.n > host_n for g in guests):
        raise ValueError("guest order exceeds host order")

    perm = sorted(range(len(guests)), key=lambda i: (-guests[i].m, i))
    ordered = [guests[i] for i in perm]
    vorders = [_guest_order(g) for g in ordered]

    full_mask = ((1 << (host_n + 1)) - 1) & ~1
    used = [0] * (host_n + 1)          # used[u]: hosts joined to u by a used edge
    free_deg = [host_n - 1] * (host_n + 1)
    deadline = time.monotonic() + time_budget if time_budget is not None else None
    state = {"nodes": 0, "timeout": False}
    assigns = [[0] * (g.n + 1) for g in ordered]

    def place(gi: int, v: int, h: int) -> None:
        a = assigns[gi]
        for w in ordered[gi].neighbors(v):
            hw = a[w]
            if hw:
                used[h] |= 1 << hw
                used[hw] |= 1 << h
                free_deg[h] -= 1
                free_deg[hw] -= 1

    def unplace(gi: int, v: int, h: int) -> None:
        a = assigns[gi]
        for w in ordered[gi].neighbors(v):
            hw = a[w]
            if hw:
                used[h] &= ~(1 << hw)
                used[hw] &= ~(1 << h)
                free_deg[h] += 1
                free_deg[hw] += 1

    def search(gi: int, pos: int, placed_mask: int) -> bool:
        if gi == len(ordered):
            return True
        vorder = vorders[gi]
        if pos == len(vorder):
            return search(gi + 1, 0, 0)
        state["nodes"] += 1
        if state["nodes"] % 2048 == 0:
            if deadline is not None and time.monotonic() > deadline:
                state["timeout"] = True
                return False
            if node_budget is not None and state["nodes"] > node_budget:
                state["timeout"] = True
                return False
        g = ordered[gi]
        v = vorder[pos]
        a = assigns[gi]
        need = g.degree(v)
        if gi == 0:
            candidates = [pos + 1]  # canonical: expansion order onto 1,2,...
        else:
            cand_mask = full_mask & ~placed_mask
            for w in g.neighbors(v):
                hw = a[w]
                if hw:
                    cand_mask &= ~used[hw]
                    cand_mask &= ~(1 << hw)
            candidates = []
            while cand_mask:
                low = cand_mask & -cand_mask
                cand_mask ^= low
                candidates.append(low.bit_length() - 1)
        for h in candidates:
            if free_deg[h] < need:
                continue
            a[v] = h
            place(gi, v, h)
            if search(gi, pos + 1, placed_mask | (1 << h)):
                return True
            unplace(gi, v, h)
            a[v] = 0
            if state["timeout"]:
                return False
        return False

    ok = search(0, 0, 0)
    if state["timeout"]:
        return PackSearch("timeout", None, state["nodes"])
    if not ok:
        return PackSearch("none", None, state["nodes"])

    embs: list[Embedding | None] = [None] * len(guests)
    for gi, g in enumerate(ordered):
        a = assigns[gi]
        taken = set(a[1:])
        spare = (h for h in range(1, host_n + 1) if h not in taken)
        mapping = {v: (a[v] if a[v] else next(spare)) for v in g.vertices()}
        embs[perm[gi]] = Embedding.from_dict(mapping, g.n)
    result = tuple(embs)  # type: ignore[arg-type]
    check = verify_packing(list(zip(guests, result)), host_n)
    assert check.ok, "oracle produced a conflicting packing"
    return PackSearch("some", result, state["nodes"])


def exact_pack_bruteforce(guests: list[Graph], host_n: int) -> bool:
    """Independent existence check by pruned product of all injections.
    Only sensible for host_n <= 6 with very few guests."""
    if host_n > 6:
        raise ValueError("brute-force checker is limited to host_n <= 6")

    def rec(i: int, used_edges: frozenset[Edge]) -> bool:
        if i == len(guests):
            return True
        g = guests[i]
        for perm in itertools.permutations(range(1, host_n + 1), g.n):
            img = {norm_edge(perm[u - 1], perm[v - 1]) for u, v in g.edges}
            if img & used_edges:
                continue
            if rec(i + 1, used_edges | img):
                return True
        return False

    return rec(0, frozenset())


# ---------------------------------------------------------------------------
# Consecutive-orders suites
# ---------------------------------------------------------------------------

@dataclass
class SuiteReport:
    total: int = 0
    packed: int = 0
    failed: int = 0
    timeout: int = 0
    failures: list[str] = field(default_factory=list)
    timeouts: list[str] = field(default_factory=list)

    def summary(self) -> str:
        return (
            f"total={self.total} packed={self.packed} "
            f"failed={self.failed} timeout={self.timeout}"
        )

    def to_text(self) -> str:
        lines = [self.summary()]
        lines.extend(f"FAILED {key}" for key in self.failures)
        lines.extend(f"TIMEOUT {key}" for key in self.timeouts)
        return "\n".join(lines) + "\n"


def consecutive_suite(
    n_max: int,
    k: int,
    n_min: int | None = None,
    sample: int | None = None,
    seed: int = 0,
    time_budget: float | None = 30.0,
) -> SuiteReport:
    """Try to pack every k-tuple of tree isomorphism classes of orders
    n, n-1, ..., n-k+1 into K_n for each n up to n_max.

    With sample set, a seeded random subset of that many tuples per n is
    used instead of the full product.
    """
    if k < 1:
        raise ValueError("k must be positive")
    report = SuiteReport()
    lo = n_min if n_min is not None else k
    for n in range(max(lo, k), n_max + 1):
        pools = [enumerate_trees(n - j) for j in range(k)]
        combos = list(itertools.product(*[range(len(p)) for p in pools]))
        if sample is not None and len(combos) > sample:
            rng = random.Random(derive_seed(seed, n, k))
            combos = sorted(rng.sample(combos, sample))
        for combo in combos:
            guests = [pools[j][ci] for j, ci in enumerate(combo)]
            key = f"n={n} k={k} classes={','.join(map(str, combo))}"
            res = exact_pack(list(guests), n, time_budget=time_budget)
            report.total += 1
            if res.status == "some":
                report.packed += 1
            elif res.status == "none":
                report.failed += 1
                report.failures.append(key)
            else:
                report.timeout += 1
                report.timeouts.append(key)
    return report
