"""Pack a tree with a giant hub edge-disjointly into a sparse host.

Both sides may now carry heavy vertices, so two extra stages run before the
greedy/matching finish: the hub goes onto an isolated host; heavy hosts go
onto the hub's quiet fringe (hub neighbors whose whole vicinity has small
guest degree), repairing their guest neighborhoods out of low-degree host
pools; then heavy residual guests go onto low-degree hosts, repairing their
host neighborhoods out of randomized independent guest reserves.  The swap
discipline (heavy host <-> quiet guest, heavy guest <-> quiet host) is what
keeps the union max degree within budget.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .graph import Embedding, Graph, Tree, induced_subgraph, sorted_vertices
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


class InsufficientFringe(RuntimeError):
    """The hub's quiet fringe cannot cover the heavy-host stage."""


def select_hub_fringe(guest: Graph, profile: ConstantsProfile, min_size: int = 0) -> tuple[int, ...]:
    """Hub neighbors u with guest degree <= the quiet cap such that every
    neighbor of u other than the hub also respects the cap."""
    hub = min(v for v in guest.vertices() if guest.degree(v) == guest.max_degree())
    q = profile.quiet_degree_cap
    fringe = []
    for u in guest.neighbors(hub):
        if guest.degree(u) > q:
            continue
        if any(guest.degree(w) > q for w in guest.neighbors(u) if w != hub):
            continue
        fringe.append(u)
    if profile.preset == FAITHFUL:
        need = (2 * profile.k + 1) * profile.n ** 0.75
        if len(fringe) <= need:
            raise InsufficientFringe(f"fringe {len(fringe)} not above {need:.0f}")
    elif len(fringe) < min_size:
        raise InsufficientFringe(f"fringe {len(fringe)} below required {min_size}")
    return tuple(sorted(fringe))


@dataclass(frozen=True)
class DenseStageSets:
    """Randomized guest-side reserves for the heavy-guest stage, built over
    the residual forest: per residual rank i, candidates form a maximum
    independent set of low-degree non-neighbors of the rank vertex."""

    ranks: tuple[int, ...]               # residual guest labels by degree desc
    candidates: tuple[tuple[int, ...], ...]
    sampled: tuple[tuple[int, ...], ...]
    reserves: tuple[tuple[int, ...], ...]
    overlap_sizes: tuple[int, ...]
    heavy_count: int
    attempts: int
    floor_shortfalls: int


def sample_dense_stage_sets(
    h_prime: Graph, profile: ConstantsProfile, seed: int
) -> DenseStageSets:
    """Independent-set reserves over the residual guest forest, resampled
    until the overlap cap holds (and, under the faithful preset, the reserve
    floor; desk keeps the floor advisory, mirroring the sparse sampler)."""
    r = h_prime.n
    rate = profile.reserve_sample_rate
    cap = profile.overlap_cap_high()
    floor = profile.reserve_floor_high()
    strict_floor = profile.preset == FAITHFUL
    cutoff = profile.heavy_guest_cutoff()
    ranks = sorted_vertices(h_prime).order
    heavy = sum(1 for v in ranks if h_prime.degree(v) >= cutoff)

    low = {v for v in range(1, r + 1) if h_prime.degree(v) < profile.reserve_degree_cap}
    candidates: list[tuple[int, ...]] = []
    for v in ranks:
        allowed = {u for u in low if u != v and not h_prime.has_edge(u, v)}
        candidates.append(tuple(sorted(forest_max_independent_set(h_prime, allowed))))

    worst = (None, -1)
    for attempt in range(profile.retry_budget + 1):
        rng = random.Random(derive_seed(seed, "dense-pools", attempt))
        sampled = [tuple(u for u in cand if rng.random() < rate) for cand in candidates]
        seen = 0
        covered = 0
        overlaps: list[int] = []
        reserves: list[tuple[int, ...]] = []
        ok = True
        shortfalls = 0
        for i, v in enumerate(ranks):
            overlaps.append((seen & h_prime.adj_mask(v)).bit_count())
            reserves.append(tuple(u for u in sampled[i] if not covered >> u & 1))
            if overlaps[-1] > cap:
                ok = False
                worst = ("overlap_cap", i + 1)
            if i < heavy and len(reserves[-1]) < floor:
                shortfalls += 1
                if strict_floor:
                    ok = False
                    worst = ("reserve_floor", i + 1)
            for u in sampled[i]:
                seen |= 1 << u
                covered |= (1 << u) | h_prime.adj_mask(u)
        if ok:
            return DenseStageSets(
                ranks=ranks,
                candidates=tuple(candidates),
                sampled=tuple(sampled),
                reserves=tuple(reserves),
                overlap_sizes=tuple(overlaps),
                heavy_count=heavy,
                attempts=attempt + 1,
                floor_shortfalls=shortfalls,
            )
    raise ResampleExhausted(worst[0] or "none", worst[1], profile.retry_budget + 1)


def pack_high_max_degree(
    g: Graph,
    t: Tree,
    pin: PinConstraint = EMPTY_PIN,
    profile: ConstantsProfile | None = None,
    seed: int = 0,
    explore: bool = False,
) -> tuple[Embedding, StageTrace]:
    """Embed a giant-hub tree into the complement of g (which must have an
    isolated vertex), honoring the pin and the union degree budget."""
    if profile is None:
        raise ValueError("profile is required")
    n = g.n
    trace = StageTrace()
    if t.n > n:
        raise ValueError(f"tree order {t.n} exceeds host order {n}")
    if t.max_degree() < profile.mid_degree_threshold:
        raise ValueError("tree max degree is below this engine's range")
    if g.min_degree() != 0:
        raise ValueError("host must have an isolated vertex")
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

    hub = min(v for v in guest.vertices() if guest.degree(v) == guest.max_degree())
    if hub in pin.guests:
        raise StageFailure("stage1", "the hub itself is pinned")

    cutoff = profile.heavy_host_cutoff_high(g.m)
    z = sum(1 for v in host_order.order if g.degree(v) >= cutoff)
    trace.stat("heavy_hosts", z)
    if profile.preset == FAITHFUL:
        assert z <= 2 * profile.k * n ** 0.75

    fringe = select_hub_fringe(guest, profile, min_size=z + len(pin))
    trace.stat("fringe_size", len(fringe))

    # stage 1: pins, then the hub onto an isolated host
    for gv, hv in sorted(pin.mapping().items()):
        state.match(hv, gv)
    iso = next(
        (u for u in range(1, n + 1) if g.degree(u) == 0 and not state.host_matched(u)),
        None,
    )
    if iso is None:
        raise StageFailure("stage1", "no free isolated host for the hub")
    state.match(iso, hub)
    trace.stat("hub_host", iso)

    pin_guest_closed = 0
    for gv in pin.guests:
        pin_guest_closed |= (1 << gv) | guest.adj_mask(gv)
    pin_host_closed = 0
    for hv in pin.hosts:
        pin_host_closed |= (1 << hv) | g.adj_mask(hv)

    # stage 2: heavy hosts onto the quiet fringe, repairing guest
    # neighborhoods into low-degree host pools
    fringe_free = [v for v in fringe if not pin_guest_closed >> v & 1]
    low_hosts = [u for u in range(1, n + 1) if g.degree(u) < profile.pool_degree_cap]
    s2_guests = []
    for i in range(z):
        u = host_order.rank(i + 1)
        if state.host_matched(u):
            trace.note(f"s2 i={i + 1} host={u} already matched, skipped")
            continue
        gv = next(
            (v for v in choice_order(fringe_free, rng)
             if not state.guest_matched(v) and state.compatible(u, v)),
            None,
        )
        if gv is None:
            raise StageFailure("stage2-host", f"fringe exhausted for host {u} (rank {i + 1})")
        state.match(u, gv)
        s2_guests.append(gv)
        repairs = [w for w in guest.neighbors(gv) if not state.guest_matched(w)]
        au = g.adj_mask(u) | (1 << u)
        pool = [
            w for w in low_hosts
            if not au >> w & 1 and not pin_host_closed >> w & 1 and not state.host_matched(w)
        ]
        for rv in sorted(repairs):
            hw = next((w for w in choice_order(pool, rng)
                       if not state.host_matched(w) and state.compatible(w, rv)), None)
            if hw is None:
                raise StageFailure("stage2-repair", f"host pool emptied for guest {rv}")
            state.match(hw, rv)
        trace.note(f"s2 i={i + 1} host={u} guest={gv} repairs={len(repairs)}")
    # chosen fringe guests must be pairwise non-adjacent with independent
    # neighborhoods (forest structure around the hub guarantees it)
    for a in s2_guests:
        for b in s2_guests:
            if a < b:
                assert not guest.has_edge(a, b), "fringe guests adjacent"
    trace.stat("matched_after_s2", state.matched_count())

    # residual guest forest
    unmatched_guests = state.unmatched_guests()
    if profile.preset == FAITHFUL:
        assert len(unmatched_guests) >= 3 * n / 4
    elif len(unmatched_guests) < 3 * n / 4:
        trace.note(f"note: residual forest has {len(unmatched_guests)} < 3n/4 vertices")
    h_prime, old2new, new2old = induced_subgraph(guest, unmatched_guests)
    sets = sample_dense_stage_sets(h_prime, profile, seed)
    trace.stat("resample_attempts", sets.attempts)
    trace.resamples = sets.attempts - 1
    y = sets.heavy_count
    trace.stat("heavy_guests", y)
    if profile.preset == FAITHFUL:
        assert y <= n ** 0.5 / 180

    # stage 3: heavy residual guests onto low-degree hosts, repairing host
    # neighborhoods into the independent guest reserves
    host_cap = profile.stage_host_degree_cap
    for i in range(y):
        gv = new2old[sets.ranks[i] - 1]
        if state.guest_matched(gv):
            trace.note(f"s3 i={i + 1} guest={gv} already matched, skipped")
            continue
        hu = next(
            (u for u in choice_order(state.unmatched_hosts(), rng)
             if g.degree(u) <= host_cap and state.compatible(u, gv)),
            None,
        )
        if hu is None:
            raise StageFailure("stage3-guest", f"no quiet host for guest {gv} (rank {i + 1})")
        state.match(hu, gv)
        repairs = [w for w in g.neighbors(hu) if not state.host_matched(w)]
        pool = [new2old[w - 1] for w in sets.reserves[i]]
        fallback = [
            new2old[w - 1] for w in sets.candidates[i] if w not in sets.reserves[i]
        ]
        for hw in sorted(repairs):
            rv = next((v for v in choice_order(pool, rng)
                       if not state.guest_matched(v) and state.compatible(hw, v)), None)
            if rv is None and profile.preset != FAITHFUL:
                rv = next((v for v in choice_order(fallback, rng)
                           if not state.guest_matched(v) and state.compatible(hw, v)), None)
                if rv is not None:
                    trace.note(f"s3 i={i + 1} fallback repair for host {hw}")
            if rv is None:
                raise StageFailure("stage3-repair", f"guest reserve {i + 1} emptied for host {hw}")
            state.match(hw, rv)
        trace.note(f"s3 i={i + 1} guest={gv} host={hu} repairs={len(repairs)}")
    trace.stat("matched_after_s3", state.matched_count())

    # stage 4: guests outside a maximum independent set, greedy
    unmatched_now = set(state.unmatched_guests())
    independent = forest_max_independent_set(guest, unmatched_now)
    sweep = sorted(unmatched_now - independent, key=lambda v: (-guest.degree(v), v))
    trace.stat("independent_rest", len(independent))
    trace.stat("greedy_sweep", len(sweep))
    for gv in sweep:
        hu = next(
            (u for u in choice_order(state.unmatched_hosts(), rng) if state.compatible(u, gv)),
            None,
        )
        if hu is None:
            raise StageFailure("stage4", f"no host for guest {gv}")
        state.match(hu, gv)
    trace.stat("matched_after_s4", state.matched_count())

    # stage 5: perfect matching on the remainder
    left = state.unmatched_hosts()
    right = sorted(independent & set(state.unmatched_guests()))
    adj = {u: [v for v in right if state.compatible(u, v)] for u in left}
    matching = max_bipartite_matching(left, right, adj)
    if len(matching) != len(left):
        raise StageFailure(
            "stage5-hall", f"matched {len(matching)} of {len(left)} leftover hosts"
        )
    for u in left:
        state.match(u, matching[u])
    trace.stat("matched_after_s5", state.matched_count())

    emb = finalize(state, g, t, pin, profile, trace)
    return emb, trace
