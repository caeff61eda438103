"""Shared machinery for the two staged embedding engines.

Both engines build a bijection f from host vertices onto guest vertices
(the guest forest is the tree padded with isolated vertices up to host
order) and then return its inverse restricted to the tree.  PackingState
maintains the partial bijection together with, per host vertex, the bitmask
of guest vertices that would violate edge-disjointness, so stage choices are
exact feasibility checks rather than the sufficient conditions used in the
existence analysis.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, field

from .graph import Edge, Embedding, Graph, Tree, norm_edge
from .profiles import FAITHFUL, ConstantsProfile


def derive_seed(*parts) -> int:
    """Stable 64-bit seed from arbitrary parts (platform independent)."""
    h = hashlib.blake2b(repr(parts).encode(), digest_size=8)
    return int.from_bytes(h.digest(), "big")


class StageFailure(RuntimeError):
    """A stage's choice set emptied; carries the stage name and reason."""

    def __init__(self, stage: str, reason: str):
        super().__init__(f"{stage}: {reason}")
        self.stage = stage
        self.reason = reason


class ResampleExhausted(RuntimeError):
    """All resampling attempts violated a required set-size condition."""

    def __init__(self, condition: str, worst_index: int, attempts: int):
        super().__init__(
            f"condition {condition!r} still violated at rank {worst_index} after {attempts} attempts"
        )
        self.condition = condition
        self.worst_index = worst_index
        self.attempts = attempts


class PinError(ValueError):
    """Pin constraint violates its invariants."""


@dataclass(frozen=True)
class PinConstraint:
    """Pre-placed guest vertices: f'(guest) = host for each pair.

    Host degrees should not exceed 2k and guest degrees 2; the mapped guest
    edges must avoid the host edges inside the pinned block.  The degree caps
    are hard errors under the faithful preset and trace notes under desk
    (a leaf-star reservation can legitimately pin the tree's hub).
    """

    guests: tuple[int, ...]
    hosts: tuple[int, ...]

    def __post_init__(self):
        if len(self.guests) != len(self.hosts):
            raise PinError("pin sides must have equal size")
        if len(set(self.guests)) != len(self.guests) or len(set(self.hosts)) != len(self.hosts):
            raise PinError("pin sides must be duplicate-free")

    def __len__(self) -> int:
        return len(self.guests)

    def mapping(self) -> dict[int, int]:
        return dict(zip(self.guests, self.hosts))

    def validate(self, g: Graph, t: Tree, profile: ConstantsProfile) -> list[str]:
        """Check invariants; returns soft warnings, raises PinError on hard ones."""
        if len(self) > profile.k:
            raise PinError(f"pin size {len(self)} exceeds k={profile.k}")
        for v in self.hosts:
            if not 1 <= v <= g.n:
                raise PinError(f"pinned host {v} out of range")
        for v in self.guests:
            if not 1 <= v <= t.n:
                raise PinError(f"pinned guest {v} out of range")
        m = self.mapping()
        for u, v in t.edges:
            if u in m and v in m and g.has_edge(m[u], m[v]):
                raise PinError(f"pinned guest edge ({u},{v}) collides with a host edge")
        warnings = []
        for v in self.hosts:
            if g.degree(v) > 2 * profile.k:
                msg = f"pinned host {v} has degree {g.degree(v)} > 2k"
                if profile.preset == FAITHFUL:
                    raise PinError(msg)
                warnings.append(msg)
        for v in self.guests:
            if t.degree(v) > 2:
                msg = f"pinned guest {v} has degree {t.degree(v)} > 2"
                if profile.preset == FAITHFUL:
                    raise PinError(msg)
                warnings.append(msg)
        return warnings


EMPTY_PIN = PinConstraint((), ())


@dataclass
class StageTrace:
    """Line-oriented decision log; byte-identical across identical runs."""

    lines: list[str] = field(default_factory=list)
    resamples: int = 0
    stats: dict[str, float] = field(default_factory=dict)

    def note(self, text: str) -> None:
        self.lines.append(text)

    def stat(self, key: str, value) -> None:
        self.stats[key] = value
        self.lines.append(f"{key}={value}")

    def to_text(self) -> str:
        return "\n".join(self.lines) + "\n"

    def write(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_text())


class PackingState:
    """Partial host->guest bijection maintaining edge-disjointness.

    banned[u] holds, as a bitmask, every guest vertex adjacent (in the guest
    forest) to the image of some matched host neighbor of u; matching u to
    any guest outside banned[u] keeps the packing property.
    """

    def __init__(self, host: Graph, guest: Graph):
        if host.n != guest.n:
            raise ValueError("host and guest must have equal order")
        self.host = host
        self.guest = guest
        self.n = host.n
        self.h2g = [0] * (host.n + 1)
        self.g2h = [0] * (host.n + 1)
        self.banned = [0] * (host.n + 1)
        self.matched_hosts = 0  # bitmask
        self.matched_guests = 0

    def host_matched(self, u: int) -> bool:
        return bool(self.matched_hosts >> u & 1)

    def guest_matched(self, v: int) -> bool:
        return bool(self.matched_guests >> v & 1)

    def compatible(self, u: int, v: int) -> bool:
        return not (self.banned[u] >> v & 1)

    def match(self, u: int, v: int) -> None:
        assert not self.host_matched(u) and not self.guest_matched(v)
        assert self.compatible(u, v), f"match ({u},{v}) violates packing"
        self.h2g[u] = v
        self.g2h[v] = u
        self.matched_hosts |= 1 << u
        self.matched_guests |= 1 << v
        gm = self.guest.adj_mask(v)
        for w in self.host.neighbors(u):
            self.banned[w] |= gm

    def unmatched_hosts(self) -> list[int]:
        return [u for u in range(1, self.n + 1) if not self.matched_hosts >> u & 1]

    def unmatched_guests(self) -> list[int]:
        return [v for v in range(1, self.n + 1) if not self.matched_guests >> v & 1]

    def matched_count(self) -> int:
        return self.matched_hosts.bit_count()


def pad_to_order(t: Tree, n: int) -> Graph:
    """The guest forest: the tree plus isolated vertices up to order n."""
    if t.n > n:
        raise ValueError(f"tree order {t.n} exceeds target {n}")
    return Graph(n, t.edges)


def finalize(
    state: PackingState,
    g: Graph,
    t: Tree,
    pin: PinConstraint,
    profile: ConstantsProfile,
    trace: StageTrace,
) -> Embedding:
    """Extract f' = f^{-1}|V(T), re-check every guarantee, or raise."""
    mapping = {}
    for v in range(1, t.n + 1):
        u = state.g2h[v]
        if u == 0:
            raise StageFailure("finalize", f"guest {v} left unmatched")
        mapping[v] = u
    emb = Embedding.from_dict(mapping, t.n)
    for u, v in t.edges:
        if g.has_edge(emb(u), emb(v)):
            raise StageFailure("finalize", f"image edge ({emb(u)},{emb(v)}) hits the host")
    for gv, hv in pin.mapping().items():
        if emb(gv) != hv:
            raise StageFailure("finalize", f"pin broken at guest {gv}")
    budget = profile.degree_budget()
    union_deg = g.degrees()
    for u, v in t.edges:
        union_deg[emb(u)] += 1
        union_deg[emb(v)] += 1
    worst = max(union_deg[1:], default=0)
    trace.stat("union_max_degree", worst)
    if worst > budget:
        raise StageFailure("finalize", f"union degree {worst} exceeds budget {budget:.1f}")
    return emb


def choice_order(items: list[int], rng: random.Random | None) -> list[int]:
    """Deterministic lowest-label order, or a seeded shuffle when exploring."""
    out = sorted(items)
    if rng is not None:
        rng.shuffle(out)
    return out


def pack_with_retries(engine, g, t, pin, profile, seed: int, trace_sink=None):
    """Run an engine with the profile's retry budget; reseeded, exploring
    variants after the first attempt.  Returns (embedding, trace, attempts)."""
    last: Exception | None = None
    for attempt in range(profile.retry_budget + 1):
        try:
            emb, trace = engine(
                g, t, pin, profile,
                derive_seed(seed, attempt),
                explore=attempt > 0,
            )
            if trace_sink is not None:
                trace_sink.append(trace)
            return emb, trace, attempt
        except (StageFailure, ResampleExhausted) as exc:
            last = exc
    raise last if last is not None else RuntimeError("retry budget is negative")
