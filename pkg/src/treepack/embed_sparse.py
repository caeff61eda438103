"""Pack a tree of small maximum degree edge-disjointly into a sparse host.

Four stages: pin the pre-placed vertices; walk the heavy host vertices in
degree order, each onto a guest of degree <= 3 whose remaining guest
neighbors are immediately matched out of randomized conflict-free reserves;
sweep the guest vertices outside a maximum independent set greedily; finish
the independent remainder with a perfect matching in the compatibility
bipartite graph.  Every choice set is an exact feasibility set, so a
returned embedding is unconditionally a verified packing; under desk-scale
constants a stage may instead empty and raise StageFailure for the caller's
retry ladder.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .graph import Embedding, Graph, Tree, sorted_vertices
from .matching import forest_max_independent_set, max_bipartite_matching
from .profiles import FAITHFUL, ConstantsProfile
from .embed_common import (
    EMPTY_PIN,
    PackingState,
    PinConstraint,
    ResampleExhausted,
    StageFailure,
    StageTrace,
    choice_order,
    derive_seed,
    finalize,
    pad_to_order,
)


@dataclass(frozen=True)
class StageSets:
    """Randomized repair pools for the heavy-host stage.

    For host rank i: candidates[i] are the low-degree non-neighbors of v_i,
    sampled[i] keeps an independent coin-flip subset, overlap_sizes[i] counts
    earlier samples adjacent to v_i, and reserves[i] is the sampled set
    stripped of the closed neighborhoods of all earlier samples (the only
    vertices safe to consume for repairs without cross-iteration conflicts).
    """

    candidates: tuple[tuple[int, ...], ...]
    sampled: tuple[tuple[int, ...], ...]
    reserves: tuple[tuple[int, ...], ...]
    overlap_sizes: tuple[int, ...]
    heavy_count: int
    attempts: int
    floor_shortfalls: int


def draw_pool_sample(
    g: Graph,
    ranks: tuple[int, ...],
    candidates: list[tuple[int, ...]],
    p: float,
    rng: random.Random,
) -> tuple[list[tuple[int, ...]], list[int], list[tuple[int, ...]]]:
    """One raw draw of the randomized pools: per rank an independent
    coin-flip subset of the candidates, its overlap count with the rank
    vertex's neighborhood, and the conflict-free reserve."""
    sampled = [tuple(u for u in cand if rng.random() < p) for cand in candidates]
    seen_mask = 0       # union of earlier samples
    covered_mask = 0    # union of earlier closed neighborhoods
    overlaps: list[int] = []
    reserves: list[tuple[int, ...]] = []
    for i, v in enumerate(ranks):
        overlaps.append((seen_mask & g.adj_mask(v)).bit_count())
        reserves.append(tuple(u for u in sampled[i] if not covered_mask >> u & 1))
        for u in sampled[i]:
            seen_mask |= 1 << u
            covered_mask |= (1 << u) | g.adj_mask(u)
    return sampled, overlaps, reserves


def pool_candidates(g: Graph, ranks: tuple[int, ...], degree_cap: int) -> list[tuple[int, ...]]:
    """Per rank: the low-degree non-neighbors of the rank vertex."""
    low_degree = [u for u in range(1, g.n + 1) if g.degree(u) < degree_cap]
    out = []
    for v in ranks:
        av = g.adj_mask(v) | (1 << v)
        out.append(tuple(u for u in low_degree if not av >> u & 1))
    return out


def sample_stage_sets(
    g: Graph, order, profile: ConstantsProfile, seed: int
) -> StageSets:
    """Sample repair pools until the health conditions hold.

    Condition 1: every overlap stays below the profile cap.  Condition 2:
    every reserve up to the heavy-host horizon reaches the profile floor.
    Resamples with fresh derived seeds up to the retry budget, then raises
    ResampleExhausted naming the violated condition and its worst rank.

    The faithful preset enforces both conditions.  Desk keeps condition 2
    advisory (counted in floor_shortfalls): at n in the tens the closed
    neighborhoods of a few sampled rounds already cover the whole host, so a
    hard floor would be unsatisfiable; the engine instead falls back from
    the reserve to the full candidate pool under its exact conflict checks.
    """
    n = g.n
    p = profile.pool_sample_rate
    cap = profile.overlap_cap_low(g.m)
    floor = profile.reserve_floor_low()
    strict_floor = profile.preset == FAITHFUL
    cutoff = profile.heavy_host_cutoff_low(g.m)
    ranks = order.order
    heavy = sum(1 for v in ranks if g.degree(v) >= cutoff)
    candidates = pool_candidates(g, ranks, profile.pool_degree_cap)

    worst = (None, -1)
    for attempt in range(profile.retry_budget + 1):
        rng = random.Random(derive_seed(seed, "pools", attempt))
        sampled, overlaps, reserves = draw_pool_sample(g, ranks, candidates, p, rng)
        ok = True
        shortfalls = 0
        for i in range(len(ranks)):
            if overlaps[i] > cap:
                ok = False
                worst = ("overlap_cap", i + 1)
            if i < heavy and len(reserves[i]) < floor:
                shortfalls += 1
                if strict_floor:
                    ok = False
                    worst = ("reserve_floor", i + 1)
        if ok:
            return StageSets(
                candidates=tuple(candidates),
                sampled=tuple(sampled),
                reserves=tuple(reserves),
                overlap_sizes=tuple(overlaps),
                heavy_count=heavy,
                attempts=attempt + 1,
                floor_shortfalls=shortfalls,
            )
    raise ResampleExhausted(worst[0] or "none", worst[1], profile.retry_budget + 1)


def pack_low_max_degree(
    g: Graph,
    t: Tree,
    pin: PinConstraint = EMPTY_PIN,
    profile: ConstantsProfile | None = None,
    seed: int = 0,
    explore: bool = False,
) -> tuple[Embedding, StageTrace]:
    """Embed t into the complement of g, honoring the pin, keeping the union
    max degree within budget.  Raises StageFailure / ResampleExhausted."""
    if profile is None:
        raise ValueError("profile is required")
    n = g.n
    trace = StageTrace()
    if t.n > n:
        raise ValueError(f"tree order {t.n} exceeds host order {n}")
    if t.max_degree() >= profile.mid_degree_threshold:
        raise ValueError("tree max degree is out of this engine's range")
    if g.max_degree() > profile.degree_budget():
        raise ValueError("host max degree already exceeds the budget")
    if g.m > profile.k * n:
        trace.note(f"warning: host has {g.m} > kn edges")
    for w in pin.validate(g, t, profile):
        trace.note(f"pin-warning: {w}")

    guest = pad_to_order(t, n)
    state = PackingState(g, guest)
    host_order = sorted_vertices(g)
    rng = random.Random(derive_seed(seed, "choices")) if explore else None

    # stage 1: pins
    for gv, hv in sorted(pin.mapping().items()):
        state.match(hv, gv)
    trace.stat("pinned", len(pin))

    # stage 2: heavy hosts onto guests of degree <= 3, repairing their
    # guest neighborhoods out of the sampled reserves
    sets = sample_stage_sets(g, host_order, profile, seed)
    trace.stat("resample_attempts", sets.attempts)
    trace.resamples = sets.attempts - 1
    x = sets.heavy_count
    trace.stat("heavy_hosts", x)
    if profile.preset == FAITHFUL:
        assert x <= 540 * profile.k * (2 * profile.k + 1) * n ** 0.75

    pin_closed = 0
    for hv in pin.hosts:
        pin_closed |= (1 << hv) | g.adj_mask(hv)

    quiet_guests = [v for v in range(1, n + 1) if guest.degree(v) <= 3]
    for i in range(x):
        u = host_order.rank(i + 1)
        if state.host_matched(u):
            trace.note(f"s2 i={i + 1} host={u} already matched, skipped")
            continue
        gv = next(
            (
                v
                for v in choice_order(quiet_guests, rng)
                if not state.guest_matched(v) and state.compatible(u, v)
            ),
            None,
        )
        if gv is None:
            raise StageFailure("stage2-host", f"no quiet guest for host {u} (rank {i + 1})")
        state.match(u, gv)
        repairs = [w for w in guest.neighbors(gv) if not state.guest_matched(w)]
        pool = [
            w
            for w in sets.reserves[i]
            if not pin_closed >> w & 1 and not state.host_matched(w)
        ]
        fallback = [
            w
            for w in sets.candidates[i]
            if w not in sets.reserves[i]
            and not pin_closed >> w & 1
            and not state.host_matched(w)
        ]
        for rv in sorted(repairs):
            hw = next((w for w in choice_order(pool, rng) if
                       not state.host_matched(w) and state.compatible(w, rv)), None)
            if hw is None and profile.preset != FAITHFUL:
                # reserve exhausted: widen to the full low-degree candidate
                # pool; exact conflict checks keep every commit valid
                hw = next((w for w in choice_order(fallback, rng) if
                           not state.host_matched(w) and state.compatible(w, rv)), None)
                if hw is not None:
                    trace.note(f"s2 i={i + 1} fallback repair for guest {rv}")
            if hw is None:
                raise StageFailure(
                    "stage2-repair", f"reserve {i + 1} exhausted for guest {rv}"
                )
            state.match(hw, rv)
        trace.note(f"s2 i={i + 1} host={u} guest={gv} repairs={len(repairs)}")
    trace.stat("matched_after_s2", state.matched_count())

    # stage 3: guests outside a maximum independent set, greedy
    unmatched_guests = set(state.unmatched_guests())
    independent = forest_max_independent_set(guest, unmatched_guests)
    sweep = sorted(unmatched_guests - independent, key=lambda v: (-guest.degree(v), v))
    trace.stat("independent_rest", len(independent))
    trace.stat("greedy_sweep", len(sweep))
    hosts_free = state.unmatched_hosts()
    for gv in sweep:
        hu = next(
            (u for u in choice_order(hosts_free, rng)
             if not state.host_matched(u) and state.compatible(u, gv)),
            None,
        )
        if hu is None:
            raise StageFailure("stage3", f"no host for guest {gv}")
        state.match(hu, gv)
    trace.stat("matched_after_s3", state.matched_count())

    # stage 4: perfect matching between leftover hosts and the independent set
    left = state.unmatched_hosts()
    right = sorted(independent)
    adj = {
        u: [v for v in right if state.compatible(u, v)]
        for u in left
    }
    if profile.preset == FAITHFUL:
        half = len(right) / 2
        assert all(len(a) >= half for a in adj.values()), "bipartite degree bound broken"
    matching = max_bipartite_matching(left, right, adj)
    if len(matching) != len(left):
        raise StageFailure(
            "stage4-hall", f"matched {len(matching)} of {len(left)} leftover hosts"
        )
    for u in left:
        state.match(u, matching[u])
    trace.stat("matched_after_s4", state.matched_count())

    emb = finalize(state, g, t, pin, profile, trace)
    return emb, trace
