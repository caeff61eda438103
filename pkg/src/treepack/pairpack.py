"""Pack two equal-order sparse graphs: find a bijection of vertex sets whose
image of the first edge set avoids the second.

Used by the pipeline to finish giant-hub trees after their hub block is
pinned.  Randomized restarts with conflict-repair local search, exact
backtracking at small orders; every success is verified before it is
returned, and a failure only ever means the budget ran out.
"""

from __future__ import annotations

import math
import random

from .graph import Embedding, Graph, norm_edge
from .embed_common import derive_seed


def pair_precondition(g1: Graph, g2: Graph, alpha: float) -> bool:
    """Edge-sparsity test under which packing is guaranteed for large orders:
    |E(g1)| <= alpha*n and |E(g2)| <= n^{3/2} / (3 sqrt(alpha))."""
    if not 0 < alpha < 0.5:
        raise ValueError(f"alpha must be in (0, 1/2), got {alpha}")
    if g1.n != g2.n:
        raise ValueError(f"order mismatch: {g1.n} vs {g2.n}")
    n = g1.n
    return g1.m <= alpha * n and g2.m <= n ** 1.5 / (3 * math.sqrt(alpha))


def _conflicts(sigma: list[int], g1: Graph, g2: Graph) -> set[tuple[int, int]]:
    return {
        (u, v) for u, v in g1.edges if g2.has_edge(sigma[u], sigma[v])
    }


def _exact_pair_pack(g1: Graph, g2: Graph) -> Embedding | None:
    """Complete backtracking: place g1's vertices (degree-descending within a
    component walk) onto g2's labels avoiding image edges in g2."""
    n = g1.n
    order: list[int] = []
    seen: set[int] = set()
    for start in sorted(g1.vertices(), key=lambda v: (-g1.degree(v), v)):
        if start in seen:
            continue
        stack = [start]
        seen.add(start)
        while stack:
            u = stack.pop()
            order.append(u)
            for w in sorted(g1.neighbors(u), key=lambda v: (-g1.degree(v), v), reverse=True):
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
    assign: dict[int, int] = {}
    used: set[int] = set()

    def found(pos: int) -> bool:
        if pos == len(order):
            return True
        v = order[pos]
        placed_nbrs = [assign[w] for w in g1.neighbors(v) if w in assign]
        for h in range(1, n + 1):
            if h in used:
                continue
            if any(g2.has_edge(h, x) for x in placed_nbrs):
                continue
            assign[v] = h
            used.add(h)
            if found(pos + 1):
                return True
            del assign[v]
            used.discard(h)
        return False

    if not found(0):
        return None
    return Embedding.from_dict(assign, n)


def pack_sparse_pair(
    g1: Graph,
    g2: Graph,
    seed: int = 0,
    restarts: int = 20,
    exact_cutoff: int = 8,
) -> Embedding | None:
    """Bijection sigma with E(sigma(g1)) disjoint from E(g2), or None when the
    budget is exhausted (never a claim of non-existence, except that the
    search is complete for n <= exact_cutoff)."""
    if g1.n != g2.n:
        raise ValueError(f"order mismatch: {g1.n} vs {g2.n}")
    n = g1.n
    if n == 0:
        return Embedding([])
    if n <= exact_cutoff:
        return _exact_pair_pack(g1, g2)

    patience = max(64, int(n * math.log(n)))
    for restart in range(restarts):
        rng = random.Random(derive_seed(seed, "pair", restart))
        sigma = [0] + list(range(1, n + 1))
        tail = sigma[1:]
        rng.shuffle(tail)
        sigma[1:] = tail
        conflicts = _conflicts(sigma, g1, g2)
        stale = 0
        while conflicts and stale < patience:
            u, v = sorted(conflicts)[rng.randrange(len(conflicts))]
            a = u if rng.random() < 0.5 else v
            b = rng.randint(1, n)
            if b == a:
                stale += 1
                continue
            touched = [
                e for e in g1.edges if a in e or b in e
            ]
            before = sum(1 for e in touched if e in conflicts)
            sigma[a], sigma[b] = sigma[b], sigma[a]
            after = sum(
                1 for e in touched if g2.has_edge(sigma[e[0]], sigma[e[1]])
            )
            if after < before:
                for e in touched:
                    conflicts.discard(e)
                for e in touched:
                    if g2.has_edge(sigma[e[0]], sigma[e[1]]):
                        conflicts.add(e)
                stale = 0
            else:
                sigma[a], sigma[b] = sigma[b], sigma[a]
                stale += 1
        if not conflicts:
            emb = Embedding(sigma[1:])
            # verified, not trusted
            assert all(
                not g2.has_edge(*norm_edge(emb(u), emb(v))) for u, v in g1.edges
            )
            return emb
    return None
