"""End-to-end packing of k trees of orders n, n-1, ..., n-k+1 into K_n.

The run reserves the last k host labels as a block, packs every tree's
small completion into that block under the side conditions, and splits the
block into mid-class hub labels (one per mid-class tree, kept untouched
until their owner needs an isolated host), the rest, and the giant-hub
labels inside it.  Mid-class trees are packed first (high-max-degree
engine), then low-class trees (low-max-degree engine), then giant-hub trees
by pinning their hub block and packing the remainder against the residual
union with the sparse pair packer.  Every stage failure walks a ladder:
reseeded engine retries, whole-instance restarts, exact search at tiny n,
then an honest failure report.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field

from .graph import (
    Edge,
    Embedding,
    Graph,
    Tree,
    apply_embedding,
    edge_union,
    induced_subgraph,
    norm_edge,
    parse_graph_text,
    verify_packing,
)
from .profiles import DESK, ConstantsProfile, make_profile
from .trees import (
    DegreeClass,
    ReservationError,
    ReservedBlock,
    build_reserved,
    check_eligibility,
    classify,
    random_family_tree,
)
from .smallpack import SmallPackError, SmallPacking, pack_small
from .embed_common import (
    PinConstraint,
    ResampleExhausted,
    StageFailure,
    StageTrace,
    derive_seed,
    pack_with_retries,
)
from .embed_dense import InsufficientFringe, pack_high_max_degree
from .embed_sparse import pack_low_max_degree
from .pairpack import pack_sparse_pair, pair_precondition
from .oracle import exact_pack


class HypothesisViolated(ValueError):
    """Some tree offers neither the required leaves nor pendant path."""

    def __init__(self, j: int, detail: str):
        super().__init__(f"HypothesisViolated j={j}: {detail}")
        self.j = j
        self.detail = detail


@dataclass(frozen=True)
class Instance:
    n: int
    k: int
    trees: tuple[Tree, ...]

    def __post_init__(self):
        if self.k < 1 or self.n <= self.k:
            raise ValueError(f"need n > k >= 1, got n={self.n}, k={self.k}")
        if len(self.trees) != self.k:
            raise ValueError(f"expected {self.k} trees, got {len(self.trees)}")
        for j, t in enumerate(self.trees):
            if t.n != self.n - j:
                raise ValueError(f"tree {j} must have order {self.n - j}, has {t.n}")


@dataclass
class PackReport:
    outcome: str = "fail"
    fallback_level: int = 0   # 0 clean, 1 engine retries, 2 restarts, 3 oracle
    retries: int = 0
    millis: int = 0
    notes: list[str] = field(default_factory=list)

    def note(self, text: str) -> None:
        self.notes.append(text)

    def to_text(self) -> str:
        lines = [
            f"outcome={self.outcome}",
            f"fallback_level={self.fallback_level}",
            f"retries={self.retries}",
            f"millis={self.millis}",
        ]
        lines.extend(self.notes)
        return "\n".join(lines) + "\n"


@dataclass
class PackResult:
    ok: bool
    embeddings: tuple[Embedding, ...] | None
    report: PackReport
    traces: tuple[StageTrace, ...] = ()


def select_residual_block(f: Graph, center: int, pinned: set[int], size: int) -> tuple[int, ...]:
    """Lowest-label `size` hosts outside the pinned set avoiding both the
    center and its current neighborhood in the union f."""
    banned = f.adj_mask(center) | (1 << center)
    cands = [v for v in range(1, f.n + 1) if v not in pinned and not banned >> v & 1]
    if len(cands) < size:
        raise StageFailure(
            "residual-block",
            f"only {len(cands)} candidate hosts for a block of {size}; "
            "the reservation counting argument failed",
        )
    return tuple(cands[:size])


def _check_instance(inst: Instance, profile: ConstantsProfile) -> list[tuple[DegreeClass, ReservedBlock]]:
    """Classify every tree and build its reserved block, or raise
    HypothesisViolated naming the offending index."""
    out = []
    for j, t in enumerate(inst.trees):
        need = inst.k - 1 - j
        elig = check_eligibility(t, need)
        if not elig.ok:
            raise HypothesisViolated(j, f"no {need} leaves and no pendant path of order {need}")
        cls = classify(t, inst.n, profile)
        try:
            block = build_reserved(t, j, inst.k, cls)
        except ReservationError as exc:
            raise HypothesisViolated(j, str(exc)) from exc
        out.append((cls, block))
    return out


def _lift(emb_sub: Embedding, new2old: tuple[int, ...]) -> Embedding:
    return Embedding([new2old[h - 1] for h in emb_sub.map])


def _attempt(
    inst: Instance,
    profile: ConstantsProfile,
    prepared: list[tuple[DegreeClass, ReservedBlock]],
    seed: int,
    report: PackReport,
    traces: list[StageTrace],
) -> tuple[Embedding, ...]:
    n, k = inst.n, inst.k
    offset = n - k
    budget = profile.degree_budget()

    classes = [cls for cls, _ in prepared]
    blocks = [blk for _, blk in prepared]
    mids = sorted((j for j, c in enumerate(classes) if c is DegreeClass.MID), reverse=True)
    lows = sorted((j for j, c in enumerate(classes) if c is DegreeClass.LOW), reverse=True)
    highs = sorted((j for j, c in enumerate(classes) if c is DegreeClass.HIGH), reverse=True)
    report.note(f"classes mid={mids} low={lows} high={highs}")

    sp: SmallPacking = pack_small(
        [blocks[j].completion for j in range(k)],
        high_class=set(highs),
        max_k=profile.small_pack_bound,
    )
    hmaps = [{gv: hv + offset for gv, hv in sp.maps[j].items()} for j in range(k)]

    mid_centers = {j: hmaps[j][blocks[j].center] for j in mids}
    y_hosts = set(mid_centers.values())
    block_hosts = set(range(offset + 1, n + 1))
    x_hosts = block_hosts - y_hosts
    z_hosts = {hmaps[j][blocks[j].center] for j in highs}
    assert z_hosts <= x_hosts, "giant-hub centers must avoid mid-class centers"

    x_pins = [
        {gv: hv for gv, hv in hmaps[j].items() if hv in x_hosts} for j in range(k)
    ]
    z_pins = [
        {gv: hv for gv, hv in hmaps[j].items() if hv in z_hosts} for j in range(k)
    ]

    union = Graph(n, [])
    embeddings: dict[int, Embedding] = {}

    def fold_in(j: int, emb: Embedding) -> None:
        nonlocal union
        union = edge_union(union, apply_embedding(emb, inst.trees[j], n))
        if union.max_degree() > budget:
            raise StageFailure("budget", f"union degree {union.max_degree()} after tree {j}")
        embeddings[j] = emb
        partial = verify_packing(
            [(inst.trees[i], embeddings[i]) for i in sorted(embeddings)], n
        )
        if not partial.ok:
            raise StageFailure("partial-verify", f"conflict {partial.first_conflict}")

    # -- mid-class trees: high-max-degree engine, own hub label kept isolated
    for pos, j in enumerate(mids):
        t = inst.trees[j]
        future = {mid_centers[jj] for jj in mids[pos + 1:]}
        universe = (set(range(1, n + 1)) - x_hosts - future) | set(x_pins[j].values())
        sub, old2new, new2old = induced_subgraph(union, universe)
        own = old2new[mid_centers[j]]
        if sub.degree(own) != 0:
            raise StageFailure("mid-setup", f"hub label of tree {j} is not isolated")
        guests = tuple(sorted(x_pins[j]))
        pin = PinConstraint(guests, tuple(old2new[x_pins[j][gv]] for gv in guests))
        emb_sub, trace, attempts = pack_with_retries(
            pack_high_max_degree, sub, t, pin, profile, derive_seed(seed, "mid", j)
        )
        traces.append(trace)
        report.retries += attempts
        emb = _lift(emb_sub, new2old)
        assert set(emb.map) & x_hosts == set(x_pins[j].values())
        report.note(f"tree={j} class=mid attempts={attempts}")
        fold_in(j, emb)

    # -- low-class trees: low-max-degree engine
    for j in lows:
        t = inst.trees[j]
        universe = (set(range(1, n + 1)) - x_hosts) | set(x_pins[j].values())
        sub, old2new, new2old = induced_subgraph(union, universe)
        guests = tuple(sorted(x_pins[j]))
        pin = PinConstraint(guests, tuple(old2new[x_pins[j][gv]] for gv in guests))
        emb_sub, trace, attempts = pack_with_retries(
            pack_low_max_degree, sub, t, pin, profile, derive_seed(seed, "low", j)
        )
        traces.append(trace)
        report.retries += attempts
        emb = _lift(emb_sub, new2old)
        assert set(emb.map) & x_hosts == set(x_pins[j].values())
        report.note(f"tree={j} class=low attempts={attempts}")
        fold_in(j, emb)

    # -- giant-hub trees: pin the hub block, pair-pack the remainder
    for pos, j in enumerate(highs):
        t = inst.trees[j]
        center_host = hmaps[j][blocks[j].center]
        pinned_guests = sorted(z_pins[j])
        alpha_extra = len(pinned_guests) - 1
        assert blocks[j].center in z_pins[j]

        # completions of everything packed so far dominate the union at the
        # hub label; violations are surfaced, not patched
        done = [i for i in range(k) if i in embeddings]
        hstar_edges: set[Edge] = set()
        for i in done:
            for u, v in blocks[i].completion.edges:
                hstar_edges.add(norm_edge(hmaps[i][u], hmaps[i][v]))
        hstar = Graph(n, hstar_edges)
        f_deg = union.degree(center_host)
        h_deg = hstar.degree(center_host)
        report.note(f"tree={j} class=high hub_degree union={f_deg} completions={h_deg}")
        if f_deg > h_deg:
            report.note(f"tree={j} domination violated ({f_deg} > {h_deg})")

        size = n - 1 - j - alpha_extra
        block_hosts_sel = select_residual_block(union, center_host, z_hosts, size)
        rest_guests = sorted(set(range(1, t.n + 1)) - set(pinned_guests))
        s_rest, g_old2new, _ = induced_subgraph(t, rest_guests)
        f_rest, _, f_new2old = induced_subgraph(union, block_hosts_sel)

        n_prime = len(rest_guests)
        edges_ok = s_rest.m <= 0.4 * n_prime
        sparse_ok = pair_precondition(s_rest, f_rest, 0.4)
        report.note(f"tree={j} residual edges_ok={edges_ok} sparse_ok={sparse_ok}")

        sigma = pack_sparse_pair(
            s_rest, f_rest, seed=derive_seed(seed, "high", j),
            restarts=profile.retry_budget + 8,
        )
        if sigma is None:
            raise StageFailure("pair-pack", f"no residual packing for tree {j}")

        mapping = dict(z_pins[j])
        for gv in rest_guests:
            mapping[gv] = f_new2old[sigma(g_old2new[gv]) - 1]
        emb = Embedding.from_dict(mapping, t.n)
        for u, v in t.edges:
            if union.has_edge(emb(u), emb(v)):
                raise StageFailure("high-verify", f"tree {j} image collides at ({emb(u)},{emb(v)})")
        assert {hv for hv in emb.map if hv in z_hosts} == set(z_pins[j].values())
        report.note(f"tree={j} class=high block={size}")
        fold_in(j, emb)

    return tuple(embeddings[j] for j in range(k))


def pack_consecutive_trees(
    inst: Instance,
    profile: ConstantsProfile | None = None,
    seed: int = 0,
) -> PackResult:
    """Pack the instance; never raises on stage trouble (works the fallback
    ladder and reports), but rejects ineligible instances with
    HypothesisViolated."""
    t0 = time.perf_counter()
    if profile is None:
        profile = make_profile(inst.n, inst.k, DESK)
    report = PackReport()
    traces: list[StageTrace] = []
    prepared = _check_instance(inst, profile)

    last_error = None
    for restart in range(profile.restart_budget + 1):
        try:
            embs = _attempt(
                inst, profile, prepared, derive_seed(seed, "run", restart), report, traces
            )
            final = verify_packing(list(zip(inst.trees, embs)), inst.n)
            if not final.ok:
                raise StageFailure("final-verify", f"conflict {final.first_conflict}")
            report.outcome = "ok"
            if restart > 0:
                report.fallback_level = 2
            elif report.retries > 0:
                report.fallback_level = 1
            report.millis = int((time.perf_counter() - t0) * 1000)
            return PackResult(True, embs, report, tuple(traces))
        except (StageFailure, ResampleExhausted, SmallPackError, InsufficientFringe) as exc:
            last_error = exc
            report.note(f"restart={restart} error={exc}")

    if inst.n <= profile.oracle_cutoff:
        res = exact_pack(list(inst.trees), inst.n, time_budget=60.0)
        if res.status == "some":
            report.outcome = "ok"
            report.fallback_level = 3
            report.millis = int((time.perf_counter() - t0) * 1000)
            return PackResult(True, res.embeddings, report, tuple(traces))
        report.note(f"oracle status={res.status}")

    report.outcome = "fail"
    report.note(f"last_error={last_error}")
    report.millis = int((time.perf_counter() - t0) * 1000)
    return PackResult(False, None, report, tuple(traces))


# ---------------------------------------------------------------------------
# Instance generation and file formats
# ---------------------------------------------------------------------------

def make_instance(
    n: int,
    k: int,
    family: str,
    seed: int,
    degree_bound: int = 10,
    preset: str = DESK,
) -> Instance:
    """Deterministic eligible instance: for each j, resample the family until
    the tree passes the eligibility and reservation checks."""
    profile = make_profile(n, k, preset)
    trees = []
    for j in range(k):
        order = n - j
        tree = None
        for attempt in range(200):
            rng = random.Random(derive_seed(seed, "gen", j, attempt))
            cand = random_family_tree(order, family, rng, degree_bound)
            try:
                build_reserved(cand, j, k, classify(cand, n, profile))
            except ReservationError:
                continue
            if check_eligibility(cand, k - 1 - j).ok:
                tree = cand
                break
        if tree is None:
            raise RuntimeError(f"family {family!r} cannot produce an eligible tree for j={j}")
        trees.append(tree)
    return Instance(n, k, tuple(trees))


def instance_to_text(inst: Instance) -> str:
    parts = [f"{inst.n} {inst.k}"]
    for t in inst.trees:
        parts.append(f"{t.n} {t.m}")
        parts.extend(f"{u} {v}" for u, v in sorted(t.edges))
    return "\n".join(parts) + "\n"


def parse_instance_text(text: str) -> Instance:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    n, k = map(int, lines[0].split())
    trees = []
    pos = 1
    for _ in range(k):
        g, pos = parse_graph_text(lines, pos)
        trees.append(Tree(g.n, g.edges))
    return Instance(n, k, tuple(trees))


def read_instance(path) -> Instance:
    with open(path) as fh:
        return parse_instance_text(fh.read())


def write_instance(path, inst: Instance) -> None:
    with open(path, "w") as fh:
        fh.write(instance_to_text(inst))


def packing_to_text(embeddings) -> str:
    lines = []
    for j, emb in enumerate(embeddings):
        for gv in range(1, emb.guest_order + 1):
            lines.append(f"{j} {gv} {emb(gv)}")
    return "\n".join(lines) + "\n"


def parse_packing_text(text: str, inst: Instance) -> list[Embedding]:
    maps: list[dict[int, int]] = [dict() for _ in range(inst.k)]
    for ln in text.splitlines():
        if not ln.strip():
            continue
        j, gv, hv = map(int, ln.split())
        maps[j][gv] = hv
    return [Embedding.from_dict(maps[j], inst.trees[j].n) for j in range(inst.k)]
