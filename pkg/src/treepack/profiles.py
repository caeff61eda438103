"""Tunable constants for the staged embedding engines and the pipeline.

Two presets.  "faithful" carries the literal constants from the analysis
(valid only for astronomically large n; at desk scale most of its degree
cutoffs degenerate past n or below 1).  "desk" rescales every cutoff so that
all stages stay non-degenerate for n in the tens-to-hundreds and relies on
retry/restart budgets instead of asymptotic guarantees.  Every returned
packing is verified either way, so the preset only affects success rate and
which code paths run, never correctness of an accepted result.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

FAITHFUL = "faithful"
DESK = "desk"


@dataclass(frozen=True)
class ConstantsProfile:
    """All engine constants for one (n, k) instance, as one record."""

    n: int
    k: int
    preset: str = DESK

    # classification thresholds
    mid_degree_threshold: float = field(init=False)   # type boundary low/mid: 60(2k+1)n^{3/4}, desk-capped
    high_degree_threshold: float = field(init=False)  # type boundary mid/high: 2n/3

    # degree budget slack: packed unions must keep max degree <= (2/3 + slack) n
    degree_budget_slack: float = field(init=False)

    # low-degree cap for host-side repair pools (the "a" in the tail lemma)
    pool_degree_cap: int = field(init=False)
    # per-vertex sampling rate for host-side repair pools
    pool_sample_rate: float = field(init=False)
    # guest degree cap defining the quiet fringe around the hub
    quiet_degree_cap: int = field(init=False)
    # guest degree cap for reserve pools in the high-degree engine
    reserve_degree_cap: int = field(init=False)
    # per-vertex sampling rate for guest-side reserve pools
    reserve_sample_rate: float = field(init=False)
    # host degree cap when placing heavy guests
    stage_host_degree_cap: int = field(init=False)

    retry_budget: int = field(init=False)     # per-engine reseeded retries / resamples
    restart_budget: int = field(init=False)   # whole-instance restarts in the pipeline
    oracle_cutoff: int = field(init=False)    # exact-search fallback allowed for n <= this
    small_pack_bound: int = 12                # max k accepted by the small-block packer

    def __post_init__(self):
        n, k = self.n, self.k
        if n < 1 or k < 1:
            raise ValueError(f"need n >= 1 and k >= 1, got n={n}, k={k}")
        if self.preset not in (FAITHFUL, DESK):
            raise ValueError(f"unknown preset {self.preset!r}")
        faithful_mid = 60 * (2 * k + 1) * n ** 0.75
        if self.preset == FAITHFUL:
            values = dict(
                mid_degree_threshold=faithful_mid,
                degree_budget_slack=0.05,
                pool_sample_rate=n ** -0.75 / (540 * 26 * k * k * (2 * k + 1)),
                quiet_degree_cap=max(1, math.floor(n ** 0.25 / (59 * (2 * k + 1)))),
                reserve_degree_cap=180,
                reserve_sample_rate=n ** -0.5,
                retry_budget=5,
                restart_budget=2,
            )
        else:
            # cap keeps all three degree classes reachable at small n
            values = dict(
                mid_degree_threshold=min(faithful_mid, (n - 1) // 2),
                degree_budget_slack=0.25,
                pool_sample_rate=min(0.25, 2.0 / math.sqrt(n)),
                quiet_degree_cap=max(3, math.ceil(n ** 0.25)),
                reserve_degree_cap=max(8, math.ceil(math.sqrt(n))),
                reserve_sample_rate=min(0.3, 3.0 / math.sqrt(n)),
                retry_budget=12,
                restart_budget=3,
            )
        values.update(
            high_degree_threshold=2 * n / 3,
            pool_degree_cap=26 * k,
            stage_host_degree_cap=4 * k,
            oracle_cutoff=12,
        )
        for name, val in values.items():
            object.__setattr__(self, name, val)
        if self.mid_degree_threshold <= 0:
            raise ValueError("degenerate mid-degree threshold")

    # -- degree cutoffs for the staged engines ------------------------------

    def degree_budget(self) -> float:
        """Max degree allowed in any accumulated union: (2/3 + slack) n."""
        return (2.0 / 3.0 + self.degree_budget_slack) * self.n

    def heavy_host_cutoff_low(self, m: int) -> float:
        """Host degree from which the low-max-degree engine individually
        places host vertices in its matching stage (m = host edge count)."""
        if self.preset == FAITHFUL:
            return self.n ** 0.25 / (270 * (2 * self.k + 1))
        return max(math.ceil(math.sqrt(self.n)), math.ceil(4 * m / self.n) if m else 1)

    def heavy_host_cutoff_high(self, m: int) -> float:
        """Same role for the high-max-degree engine."""
        if self.preset == FAITHFUL:
            return self.n ** 0.25
        return max(math.ceil(math.sqrt(self.n)), math.ceil(4 * m / self.n) if m else 1)

    def heavy_guest_cutoff(self) -> float:
        """Residual-guest degree from which the high-max-degree engine
        individually places guest vertices."""
        if self.preset == FAITHFUL:
            return 360 * math.sqrt(self.n)
        return max(8, math.ceil(math.sqrt(self.n)))

    # -- sampled-set health conditions (resample until these hold) ----------

    def overlap_cap_low(self, m: int) -> float:
        """Cap on |sampled-so-far ∩ N(v_i)| for the low engine's pools."""
        if self.preset == FAITHFUL:
            return self.n ** 0.25 / (240 * (2 * self.k + 1))
        return max(math.ceil(4 * m * self.pool_sample_rate), 6)

    def reserve_floor_low(self) -> int:
        """Required size of each conflict-free reserve in the low engine."""
        if self.preset == FAITHFUL:
            return self.k * (2 * self.k + 1) + 3
        return 4

    def overlap_cap_high(self) -> float:
        if self.preset == FAITHFUL:
            return 4 * math.sqrt(self.n)
        return max(math.ceil(4 * self.n * self.reserve_sample_rate), 8)

    def reserve_floor_high(self) -> float:
        if self.preset == FAITHFUL:
            return math.sqrt(self.n) / (20 * math.e)
        return 4

    # -- consistency of the faithful constants ------------------------------

    def consistency_report(self) -> dict[str, bool]:
        """Checks tying the sampled-set thresholds to the tail bounds.

        The first check is exact coefficient arithmetic: with m <= kn and the
        faithful sample rate, 4mp stays below the overlap cap for every n, so
        the cap is only ever hit with exponentially small probability.  The
        remaining checks are evaluated at this profile's own (n, k).
        """
        n, k = self.n, self.k
        report = {}
        # 4*k*n*p = c1 * n^{1/4} must stay below c2 * n^{1/4}
        c1 = Fraction(4, 540 * 26 * k * (2 * k + 1))
        c2 = Fraction(1, 240 * (2 * k + 1))
        report["overlap_cap_dominates_4mp"] = c1 < c2
        p = self.pool_sample_rate
        report["reserve_floor_below_mean"] = (
            self.reserve_floor_low() < p * (n / 4) / (2 * math.e)
        )
        rr = self.reserve_sample_rate
        report["high_reserve_floor_below_mean"] = (
            self.reserve_floor_high() <= rr * (n / 10) / (2 * math.e) + 1e-9
        )
        return report


def make_profile(n: int, k: int, preset: str = DESK) -> ConstantsProfile:
    return ConstantsProfile(n=n, k=k, preset=preset)
