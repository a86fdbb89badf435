"""Two-user rate region obtained by time-sharing the relayed streaming code.

Two independent sources stream through one relay.  Source i's link to the
relay tolerates N_i erasures per sliding window, the shared relay-to-
destination link tolerates N3, and both users face the same deadline T.
Each user runs its own single-user code (with threshold j_i); the relay
serves them by concatenating its per-user payloads, so any mix of A user-1
streams and B user-2 streams is achievable as long as every link keeps up
with the widest packet it must carry.  Enumerating integer mixes (A, B)
yields an inner bound on the achievable (R1, R2) region, which this module
builds exactly (as Fractions) together with its Pareto frontier and the
reference bounds it is compared against.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .field_mds import is_prime_power
from .scheme_params import InvalidParams, SchemeParams, derive_dims

__all__ = [
    "MacParams",
    "RateRegion",
    "MacSpotReport",
    "pp_capacity",
    "build_region",
    "pareto_frontier",
    "region_field_size",
    "emit_region_csv",
    "interleaved_spot_check",
]


def pp_capacity(T: int, N: int) -> Fraction:
    """Point-to-point streaming capacity (T+1-N)/(T+1).

    This is the best rate at which a single link with deadline T can survive
    N erasures per window; the region's individual and sumrate bounds are
    instances of it.
    """
    if T < 0 or N < 0 or N > T:
        raise InvalidParams(f"capacity needs 0 <= N <= T, got T={T}, N={N}")
    return Fraction(T + 1 - N, T + 1)


@dataclass(frozen=True)
class MacParams:
    """Two-user parameters: per-source first-link budgets N1/N2, shared
    relay-link budget N3, common deadline T, per-user thresholds j1/j2."""

    T: int
    N1: int
    N2: int
    N3: int
    j1: int = 0
    j2: int = 0

    def __post_init__(self):
        # each user must individually form a valid single-user scheme
        self.user(1)
        self.user(2)

    def user(self, which: int) -> SchemeParams:
        """Single-user parameters seen by user 1 or 2 (its own first link
        plus the shared relay link)."""
        if which == 1:
            return SchemeParams(self.T, self.N1, self.N3, self.j1)
        if which == 2:
            return SchemeParams(self.T, self.N2, self.N3, self.j2)
        raise InvalidParams(f"user index must be 1 or 2, got {which}")


RatePair = tuple[Fraction, Fraction]


@dataclass(frozen=True)
class RateRegion:
    """Achievable rate pairs for one MacParams, all exact rationals.

    points: every pair produced by some integer mix (A, B), deduplicated.
    frontier: the mutually nondominated subset, sorted by decreasing R1.
    bound1/bound2: per-user ceilings C(T-N3, N_i).
    sumrate_bound: the nonadaptive reference line C(T-N2, N3).
    """

    mac: MacParams
    mix_bound: int
    points: tuple[RatePair, ...]
    frontier: tuple[RatePair, ...]
    bound1: Fraction
    bound2: Fraction
    sumrate_bound: Fraction
    notes: tuple[str, ...] = field(default=())

    def exceeds_sumrate(self) -> tuple[int, int]:
        """(#points with R1+R2 > sumrate_bound, #points total)."""
        over = sum(1 for r1, r2 in self.points if r1 + r2 > self.sumrate_bound)
        return over, len(self.points)


def pareto_frontier(points: Iterable[RatePair]) -> tuple[RatePair, ...]:
    """Maximal elements under componentwise >=, sorted by decreasing R1."""
    best: list[RatePair] = []
    for r1, r2 in sorted(set(points), key=lambda p: (-p[0], -p[1])):
        # r1 never increases along the sweep, so only r2 can disqualify
        if not best or r2 > best[-1][1]:
            best.append((r1, r2))
    return tuple(best)


def _per_user_sizes(p: SchemeParams) -> tuple[int, int, int]:
    """(message symbols, first-link packet symbols, worst relay payload)."""
    d = derive_dims(p)
    return d.k_src, d.n1, d.n2_star


def build_region(mac: MacParams, mix_bound: int = 64) -> RateRegion:
    """Enumerate integer mixes (A, B) in [0, mix_bound]^2, A+B >= 1.

    A mix carries A user-1 and B user-2 streams in parallel.  Per slot the
    three links move A*n1_1, B*n1_2 and A*nr_1 + B*nr_2 symbols; dividing
    the delivered message symbols by the widest of those normalizes to one
    symbol per channel use:

        (R1, R2) = (A*k_1, B*k_2) / max(A*n1_1, B*n1_2, A*nr_1 + B*nr_2)
    """
    if mix_bound < 1:
        raise InvalidParams(f"mix_bound must be >= 1, got {mix_bound}")
    k1, n1_1, nr_1 = _per_user_sizes(mac.user(1))
    k2, n1_2, nr_2 = _per_user_sizes(mac.user(2))

    pts: set[RatePair] = set()
    for a in range(mix_bound + 1):
        for b in range(mix_bound + 1):
            if a + b == 0:
                continue
            denom = max(a * n1_1, b * n1_2, a * nr_1 + b * nr_2)
            pts.add((Fraction(a * k1, denom), Fraction(b * k2, denom)))

    frontier = pareto_frontier(pts)
    bound1 = pp_capacity(mac.T - mac.N3, mac.N1)
    bound2 = pp_capacity(mac.T - mac.N3, mac.N2)
    sumrate = pp_capacity(mac.T - mac.N2, mac.N3)

    notes = []
    for r1, r2 in frontier:
        if r1 > bound1 or r2 > bound2:
            # should be impossible; keep it loud rather than silently wrong
            raise AssertionError(
                f"frontier point ({r1}, {r2}) violates per-user bounds "
                f"({bound1}, {bound2}) for {mac}"
            )
    over, total = (
        sum(1 for r1, r2 in pts if r1 + r2 > sumrate),
        len(pts),
    )
    notes.append(f"{over}/{total} points exceed the sumrate reference {sumrate}")

    return RateRegion(
        mac=mac,
        mix_bound=mix_bound,
        points=tuple(sorted(pts)),
        frontier=frontier,
        bound1=bound1,
        bound2=bound2,
        sumrate_bound=sumrate,
        notes=tuple(notes),
    )


def region_field_size(mac: MacParams) -> tuple[int, int]:
    """(nominal, implemented) common field for a two-user deployment.

    Nominal is max(T+1-j1, T+1-j2); implemented is the smallest prime power
    at least that large.  Each user's own codec may still round up further
    if its single-user requirement is bigger (see decode field note in
    scheme_params.implemented_field_size).
    """
    nominal = max(mac.T + 1 - mac.j1, mac.T + 1 - mac.j2)
    q = max(nominal, 2)
    while not is_prime_power(q):
        q += 1
    return nominal, q


def emit_region_csv(mac: MacParams, path, mix_bound: int = 64) -> None:
    """Write the region to CSV: R1, R2, on_frontier, sumrate_bound.

    Parameters are echoed in a leading comment line so the file is
    self-describing; rates are exact-fraction strings to keep the file
    byte-stable and lossless.
    """
    # imported here to keep the numpy-heavy simulation module out of
    # pure-arithmetic use of this one
    from .sim_harness import _write_csv

    region = build_region(mac, mix_bound)
    frontier = set(region.frontier)
    comment = (
        f"two-user region T={mac.T} N1={mac.N1} N2={mac.N2} N3={mac.N3} "
        f"j1={mac.j1} j2={mac.j2} mix_bound={mix_bound} "
        f"bounds=({region.bound1},{region.bound2}) "
        f"sumrate_bound={region.sumrate_bound}"
    )
    rows = [
        (str(r1), str(r2), int((r1, r2) in frontier), str(region.sumrate_bound))
        for r1, r2 in region.points
    ]
    _write_csv(path, comment, ("R1", "R2", "on_frontier", "sumrate_bound"), rows)


# ---------------------------------------------------------------------------
# codec-level spot check of the time-sharing argument


@dataclass
class MacSpotReport:
    mac: MacParams
    horizon: int
    episodes: int = 0
    failures: tuple = ()

    @property
    def ok(self) -> bool:
        return not self.failures


def _burst_family(horizon: int, n: int, starts: Sequence[int]) -> list[list[int]]:
    fam = [[0] * horizon]
    if n <= 0:
        return fam
    for s in starts:
        if 0 <= s and s + n <= horizon:
            bits = [0] * horizon
            for i in range(s, s + n):
                bits[i] = 1
            fam.append(bits)
    return fam


def interleaved_spot_check(
    mac: MacParams,
    horizon: Optional[int] = None,
    seed: int = 0,
    budget: int = 48,
) -> MacSpotReport:
    """Run both users' codecs end to end against a shared relay-link pattern.

    In a mixed deployment every relay packet concatenates both users'
    payloads, so one erasure on the relay link hits both streams in the same
    slot.  Parallel copies of the same user are byte-identical runs, so the
    mix sizes (A, B) only enter the rate arithmetic; what needs checking at
    codec level is that each user still decodes every message by its
    deadline when the relay-link erasures are drawn from the *shared* budget
    N3.  This probes burst patterns on all three links (each admissible for
    its own budget) up to `budget` episodes and reports any failure.
    """
    from .sim_harness import run_episode

    T = mac.T
    if horizon is None:
        horizon = 2 * (T + 1)
    window = T + 1

    shared = _burst_family(
        horizon, mac.N3, list(range(0, horizon - mac.N3 + 1, max(1, window // 2)))
    )
    report = MacSpotReport(mac=mac, horizon=horizon)
    failures = []
    for which, first_budget in ((1, mac.N1), (2, mac.N2)):
        p = mac.user(which)
        first = _burst_family(horizon, first_budget, [0, mac.user(which).j + 1, T])
        for e3 in shared:
            for e1 in first:
                if report.episodes >= budget:
                    break
                ep = run_episode(p, e1, e3, horizon=horizon, seed=seed)
                report.episodes += 1
                if not ep.ok:
                    failures.append(
                        (which, tuple(e1), tuple(e3), ep.failed, ep.violations)
                    )
    report.failures = tuple(failures)
    return report
