"""Bipartite matching and forest independent sets used by the embedding stages."""

from __future__ import annotations

from collections import deque

from .graph import Graph


def max_bipartite_matching(
    left: list[int], right: list[int], adj: dict[int, list[int]]
) -> dict[int, int]:
    """Hopcroft-Karp maximum matching.

    left/right are disjoint vertex label lists, adj maps each left vertex to
    its right neighbors.  Returns {left: right} for matched pairs.  Fully
    deterministic given the input orders.
    """
    INF = float("inf")
    match_l: dict[int, int | None] = {u: None for u in left}
    match_r: dict[int, int | None] = {v: None for v in right}
    dist: dict[int, float] = {}

    def bfs() -> bool:
        q = deque()
        for u in left:
            if match_l[u] is None:
                dist[u] = 0
                q.append(u)
            else:
                dist[u] = INF
        found = False
        while q:
            u = q.popleft()
            for v in adj.get(u, ()):
                w = match_r[v]
                if w is None:
                    found = True
                elif dist[w] == INF:
                    dist[w] = dist[u] + 1
                    q.append(w)
        return found

    def dfs(u: int) -> bool:
        for v in adj.get(u, ()):
            w = match_r[v]
            if w is None or (dist[w] == dist[u] + 1 and dfs(w)):
                match_l[u] = v
                match_r[v] = u
                return True
        dist[u] = INF
        return False

    while bfs():
        for u in left:
            if match_l[u] is None:
                dfs(u)
    return {u: v for u, v in match_l.items() if v is not None}


def forest_max_independent_set(g: Graph, allowed: set[int]) -> set[int]:
    """Exact maximum independent set of g[allowed], where g[allowed] must be
    a forest.  Linear-time subtree DP per component; deterministic."""
    allowed_sorted = sorted(allowed)
    nbr = {v: [w for w in g.neighbors(v) if w in allowed] for v in allowed_sorted}
    seen: set[int] = set()
    chosen: set[int] = set()
    for root in allowed_sorted:
        if root in seen:
            continue
        # iterative post-order over the component
        order = []
        parent = {root: 0}
        stack = [root]
        seen.add(root)
        while stack:
            u = stack.pop()
            order.append(u)
            for w in nbr[u]:
                if w not in seen:
                    seen.add(w)
                    parent[w] = u
                    stack.append(w)
        incl = {u: 1 for u in order}
        excl = {u: 0 for u in order}
        for u in reversed(order):
            p = parent[u]
            if p:
                incl[p] += excl[u]
                excl[p] += max(incl[u], excl[u])
        # reconstruct top-down; ties resolved toward exclusion
        take = {root: incl[root] > excl[root]}
        for u in order:
            if u == root:
                continue
            p = parent[u]
            take[u] = (not take[p]) and incl[u] > excl[u]
        chosen.update(u for u in order if take[u])
    return chosen
