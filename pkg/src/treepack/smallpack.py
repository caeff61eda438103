"""Pack the k small completions (paths and stars of orders k..1) into K_k.

The completions use every edge of K_k exactly once, so this is a search for
a decomposition, constrained further by two side conditions threaded through
the big pipeline:

  (5) a star's image avoids the centers of all earlier (larger) stars;
  (6) each path keeps a redundant end edge: its designated added edge (or
      some end edge, when none is designated) must not land with both ends
      on high-class star centers.

Exhaustive backtracking over K_k with the first completion placed
canonically; sound because k stays small and every found packing is
re-verified, not trusted.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

from .graph import Edge, norm_edge
from .trees import PATH, STAR, CompletionSpec


class SmallPackError(RuntimeError):
    """No packing satisfying the side conditions was found (exhausted search)."""


@dataclass(frozen=True)
class SmallPacking:
    specs: tuple[CompletionSpec, ...]
    maps: tuple[dict[int, int], ...]     # per spec: guest vertex -> host label
    high_class: frozenset[int]           # indices of high-class (giant hub) specs
    hosts_n: int

    def image_edges(self, i: int) -> set[Edge]:
        m = self.maps[i]
        return {norm_edge(m[u], m[v]) for u, v in self.specs[i].edges}

    def star_center_host(self, i: int) -> int | None:
        c = self.specs[i].center
        return self.maps[i][c] if c is not None else None

    def high_center_hosts(self) -> set[int]:
        return {self.star_center_host(i) for i in sorted(self.high_class)}

    def check_conditions(self) -> dict[str, bool]:
        """Re-verify edge-disjointness and both side conditions."""
        seen: set[Edge] = set()
        disjoint = True
        for i in range(len(self.specs)):
            img = self.image_edges(i)
            if seen & img:
                disjoint = False
            seen |= img
        star_ok = True
        for j, sj in enumerate(self.specs):
            if sj.shape != STAR:
                continue
            cj = self.star_center_host(j)
            for i in range(j + 1, len(self.specs)):
                if self.specs[i].shape == STAR and cj in set(self.maps[i].values()):
                    star_ok = False
        path_ok = all(
            _path_condition_ok(self.specs[i], self.maps[i], self.high_center_hosts())
            for i in range(len(self.specs))
        )
        return {"disjoint": disjoint, "star_avoidance": star_ok, "path_end_redundant": path_ok}


def _edge_essential(e_host: Edge, centers: set[int]) -> bool:
    return e_host[0] in centers and e_host[1] in centers


def _path_condition_ok(spec: CompletionSpec, m: dict[int, int], centers: set[int]) -> bool:
    if spec.shape != PATH or spec.order < 2:
        return True
    if spec.extra_end_edge is not None:
        u, v = spec.extra_end_edge
        return not _edge_essential(norm_edge(m[u], m[v]), centers)
    ends = _path_end_edges(spec)
    return any(not _edge_essential(norm_edge(m[u], m[v]), centers) for u, v in ends)


def _path_end_edges(spec: CompletionSpec) -> list[Edge]:
    deg: dict[int, int] = {v: 0 for v in spec.vertices}
    for u, v in spec.edges:
        deg[u] += 1
        deg[v] += 1
    return [e for e in spec.edges if deg[e[0]] == 1 or deg[e[1]] == 1]


def _path_sequence(spec: CompletionSpec) -> list[int]:
    """Vertices of a path completion in path order (smaller end first)."""
    if spec.order == 1:
        return [spec.vertices[0]]
    nbr: dict[int, list[int]] = {v: [] for v in spec.vertices}
    for u, v in spec.edges:
        nbr[u].append(v)
        nbr[v].append(u)
    ends = sorted(v for v in spec.vertices if len(nbr[v]) == 1)
    seq = [ends[0]]
    prev = None
    while len(seq) < spec.order:
        nxt = [w for w in nbr[seq[-1]] if w != prev]
        prev = seq[-1]
        seq.append(nxt[0])
    return seq


def pack_small(
    specs: list[CompletionSpec],
    high_class: set[int] | frozenset[int] = frozenset(),
    max_k: int = 12,
) -> SmallPacking:
    """Pack completions of orders k, k-1, ..., 1 into host labels 1..k.

    high_class holds indices (into specs) of giant-hub completions; their
    centers form the set that conditions (6)-style redundancy is checked
    against.  Deterministic first solution: specs in the given (decreasing
    order) sequence, host labels ascending, first completion canonical.
    """
    k = len(specs)
    if k == 0:
        raise ValueError("need at least one completion")
    if k > max_k:
        raise ValueError(f"k={k} exceeds the configured bound {max_k}")
    orders = [s.order for s in specs]
    if orders != list(range(k, 0, -1)):
        raise ValueError(f"completion orders must be k..1, got {orders}")
    high = frozenset(high_class)

    used: set[Edge] = set()
    free_deg = {h: k - 1 for h in range(1, k + 1)}
    maps: list[dict[int, int] | None] = [None] * k
    star_center_hosts: list[int | None] = [None] * k  # per placed star spec
    max_high = max(high) if high else -1

    def high_centers_placed() -> set[int]:
        return {star_center_hosts[i] for i in high if star_center_hosts[i] is not None}

    def commit(i: int, m: dict[int, int]) -> list[Edge]:
        es = [norm_edge(m[u], m[v]) for u, v in specs[i].edges]
        for e in es:
            used.add(e)
            free_deg[e[0]] -= 1
            free_deg[e[1]] -= 1
        maps[i] = m
        if specs[i].shape == STAR:
            star_center_hosts[i] = m[specs[i].center] if specs[i].order > 1 else m[specs[i].vertices[0]]
        return es

    def rollback(i: int, es: list[Edge]) -> None:
        for e in es:
            used.discard(e)
            free_deg[e[0]] += 1
            free_deg[e[1]] += 1
        maps[i] = None
        star_center_hosts[i] = None

    def earlier_star_centers(i: int) -> set[int]:
        return {
            star_center_hosts[j]
            for j in range(i)
            if specs[j].shape == STAR and star_center_hosts[j] is not None
        }

    def candidate_maps(i: int):
        spec = specs[i]
        t = spec.order
        hosts = range(1, k + 1)
        if spec.shape == STAR:
            banned = earlier_star_centers(i)  # condition (5)
            if t == 1:
                for h in hosts:
                    if h not in banned:
                        yield {spec.vertices[0]: h}
                return
            lvs = sorted(v for v in spec.vertices if v != spec.center)
            for c in hosts:
                if c in banned or free_deg[c] < t - 1:
                    continue
                pool = [
                    h for h in hosts
                    if h != c and h not in banned and norm_edge(c, h) not in used
                ]
                if len(pool) < t - 1:
                    continue
                for combo in combinations(pool, t - 1):
                    m = {spec.center: c}
                    m.update(zip(lvs, combo))
                    yield m
        else:
            seq = _path_sequence(spec)
            if t == 1:
                # an order-1 path carries a real edge its completion cannot
                # show; keep it off the giant-hub centers so accumulated
                # degrees at those hosts stay dominated by the completions
                banned = high_centers_placed() if i > max_high else set()
                for h in hosts:
                    if h not in banned:
                        yield {seq[0]: h}
                return
            assign: list[int] = []

            def extend(pos: int):
                if pos == t:
                    yield dict(zip(seq, assign))
                    return
                for h in hosts:
                    if h in assign:
                        continue
                    if pos > 0 and norm_edge(assign[-1], h) in used:
                        continue
                    assign.append(h)
                    yield from extend(pos + 1)
                    assign.pop()

            yield from extend(0)

    def paths_condition_ok_so_far(upto: int) -> bool:
        # only meaningful once every high-class star center is placed
        if upto < max_high:
            return True
        centers = high_centers_placed()
        for i in range(upto + 1):
            if maps[i] is not None and not _path_condition_ok(specs[i], maps[i], centers):
                return False
        return True

    def canonical_first() -> dict[int, int]:
        spec = specs[0]
        if spec.shape == STAR and spec.order > 1:
            lvs = sorted(v for v in spec.vertices if v != spec.center)
            m = {spec.center: 1}
            m.update(zip(lvs, range(2, spec.order + 1)))
            return m
        return dict(zip(_path_sequence(spec), range(1, spec.order + 1)))

    def search(i: int) -> bool:
        if i == k:
            return paths_condition_ok_so_far(k - 1)
        gen = [canonical_first()] if i == 0 else candidate_maps(i)
        for m in gen:
            es = commit(i, m)
            if paths_condition_ok_so_far(i) and search(i + 1):
                return True
            rollback(i, es)
        return False

    if not search(0):
        raise SmallPackError(
            "no small packing satisfies the side conditions; "
            "this would falsify the decomposition claim for these shapes"
        )
    return SmallPacking(
        specs=tuple(specs),
        maps=tuple(m for m in maps if m is not None),
        high_class=high,
        hosts_n=k,
    )


def classify_edges(sp: SmallPacking) -> list[dict[Edge, str]]:
    """Tag every completion edge redundant/essential against the giant-hub
    center set, asserting that essential edges are always real tree edges."""
    centers = sp.high_center_hosts()
    out: list[dict[Edge, str]] = []
    for i, spec in enumerate(sp.specs):
        tags: dict[Edge, str] = {}
        for e in sorted(spec.edges):
            host_e = norm_edge(sp.maps[i][e[0]], sp.maps[i][e[1]])
            essential = _edge_essential(host_e, centers)
            tags[e] = "essential" if essential else "redundant"
            assert not essential or e in spec.core_edges, (
                f"essential edge {e} of completion {i} is not a real tree edge"
            )
        out.append(tags)
    return out
