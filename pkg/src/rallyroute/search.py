"""Local search over multi-day schedules.

The improvement layer runs four neighbourhoods under a granular admission
filter inside a variable neighbourhood descent, restarted and perturbed by
a multi-start iterated driver. Moves are expressed as day patches; a move
that touches a wakeup or overnight city repairs the chain of neighbouring
days and re-evaluates on which side of the night the affected meeting
should be held.

Randomness enters only through the perturbation operators and the
stochastic constructor; every neighbourhood scan is deterministic.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

from .construct import ConstructionError, ConstructorConfig, escc, shrc
from .model import Instance
from .rewards import RewardModel, chain_reward, day_travel_cost, net_benefit
from .scenarios import ScenarioConfig
from .schedule import (DayTour, Schedule, check_feasibility,
                       tour_duration_minutes)

_TOL = 1e-9
_NEIGHBORHOOD_KINDS = ("n1", "n2", "n3", "n4")


@dataclass(frozen=True)
class SearchConfig:
    """Knobs of the improvement layer."""

    iter_max: int = 100       # outer restarts
    ell_max: int = 50         # consecutive non-improving inner steps
    lam: float = 0.75         # granular admission threshold, inf disables
    k_max: int = 4            # neighbourhoods in the descent cycle
    runs: int = 10            # replications used by the bench layer
    time_limit: Optional[float] = None  # wall seconds, None = unlimited
    debug: bool = False       # recompute every accepted delta from scratch
    constructor: ConstructorConfig = field(default_factory=ConstructorConfig)

    def __post_init__(self):
        if self.iter_max < 1:
            raise ValueError("iter_max must be at least 1")
        if self.ell_max < 1:
            raise ValueError("ell_max must be at least 1")
        if not self.lam > 0:
            raise ValueError("lam must be positive")
        if self.k_max < 1:
            raise ValueError("k_max must be at least 1")
        if self.runs < 1:
            raise ValueError("runs must be at least 1")


@dataclass(frozen=True)
class MoveCandidate:
    """One evaluated move: a patch of whole days plus its exact delta."""

    kind: str
    operands: tuple
    delta_objective: float
    feasible: bool
    patch: Dict[int, DayTour]


@dataclass
class SearchTrace:
    """What happened during one driver run."""

    iterations: List[float] = field(default_factory=list)  # best after each restart
    evaluated: Dict[str, int] = field(default_factory=dict)
    accepted: Dict[str, int] = field(default_factory=dict)
    restarts: int = 0
    constructor_failures: int = 0
    elapsed_s: float = 0.0

    def count(self, table: str, kind: str, n: int = 1) -> None:
        bucket = self.evaluated if table == "evaluated" else self.accepted
        bucket[kind] = bucket.get(kind, 0) + n

    @property
    def evaluated_total(self) -> int:
        return sum(self.evaluated.values())


def granular_admissible(i: int, j: int, k: int, lam: float,
                        instance: Instance) -> bool:
    """Is inserting city i between cities j and k worth evaluating?

    City i must sit close to one endpoint relative to the length of the
    edge it breaks; a zero-length edge admits only co-located cities. The
    infinite sentinel disables the filter.
    """
    if math.isinf(lam):
        return True
    d_jk = instance.minutes(j, k)
    close = min(instance.minutes(i, j), instance.minutes(i, k))
    if d_jk == 0:
        return close == 0
    return close <= lam * d_jk


# ---------------------------------------------------------------------------
# objective bookkeeping


class _Eval:
    """Snapshot of a feasible schedule with incremental delta evaluation."""

    def __init__(self, schedule: Schedule, instance: Instance,
                 model: RewardModel):
        self.schedule = schedule
        self.instance = instance
        self.model = model
        self.weight = model.travel_cost_weight * model.cost_normalizer
        self.ledger: Dict[int, List[int]] = {}
        for t, tour in enumerate(schedule.days, start=1):
            for c in tour.meeting_set():
                self.ledger.setdefault(c, []).append(t)
        self.chains: Dict[int, float] = {
            c: chain_reward(model.base_reward(c), days, model)
            for c, days in self.ledger.items()}
        self.day_costs = [day_travel_cost(tour.route, instance)
                          for tour in schedule.days]
        self.objective = sum(self.chains.values()) - self.weight * sum(self.day_costs)

    def delta(self, patch: Dict[int, DayTour]) -> float:
        cost_delta = 0.0
        affected: Set[int] = set()
        for d, tour in patch.items():
            cost_delta += day_travel_cost(tour.route, self.instance) \
                - self.day_costs[d - 1]
            affected |= tour.meeting_set() ^ self.schedule.days[d - 1].meeting_set()
        reward_delta = 0.0
        for c in affected:
            new_days = [d for d in self.ledger.get(c, []) if d not in patch]
            for d, tour in patch.items():
                if c in tour.meeting_set():
                    new_days.append(d)
            reward_delta += chain_reward(self.model.base_reward(c), new_days,
                                         self.model) - self.chains.get(c, 0.0)
        return reward_delta - self.weight * cost_delta

    def unrouted(self) -> List[int]:
        """Cities not visited anywhere, best base reward first."""
        seen: Set[int] = set()
        for tour in self.schedule.days:
            seen.update(tour.route)
        pool = [c for c in self.instance.cities if c.id not in seen]
        pool.sort(key=lambda c: (-c.base_reward, c.id))
        return [c.id for c in pool]

    def cap_room(self, scenario: ScenarioConfig) -> List[int]:
        """Cities that may still host another meeting, best reward first."""
        pool = [c for c in self.instance.cities
                if len(self.ledger.get(c.id, [])) < scenario.cap_for(c.size_class)]
        pool.sort(key=lambda c: (-c.base_reward, c.id))
        return [c.id for c in pool]


# ---------------------------------------------------------------------------
# patch machinery


def _route_view(days: Sequence[DayTour], work: Dict[int, List[int]],
                d: int) -> List[int]:
    r = work.get(d)
    return r if r is not None else list(days[d - 1].route)


def _replace_slot(days: Sequence[DayTour], work: Dict[int, List[int]],
                  d: int, i: int, new_city: int,
                  slots: Set[Tuple[int, int]]) -> bool:
    """Rewrite one occurrence and repair the chain it belongs to.

    Overnight cities appear as the terminal of one day and the wakeup of
    the next (or both ends of a closed tour); replacing one end drags the
    other along, cascading through single-city days. All rewritten slots
    are collected in `slots`. Returns False on degenerate rewrites.
    """
    m = len(days)
    entry = _route_view(days, work, d)
    if not 0 <= i < len(entry) or entry[i] == new_city:
        return False
    stack = [(d, i)]
    while stack:
        dd, ii = stack.pop()
        if (dd, ii) in slots:
            continue
        r = _route_view(days, work, dd)
        if not 0 <= ii < len(r):
            return False
        if r[ii] == new_city:
            # cascade reached a slot that already agrees; the chain is
            # consistent here, nothing further to drag along
            continue
        r[ii] = new_city
        work[dd] = r
        slots.add((dd, ii))
        last = len(r) - 1
        orig = days[dd - 1].route
        closed = len(orig) > 1 and orig[0] == orig[-1]
        if ii == 0:
            if closed and last != 0:
                stack.append((dd, last))
            if dd > 1:
                prev = _route_view(days, work, dd - 1)
                stack.append((dd - 1, len(prev) - 1))
        if ii == last:
            if closed and last != 0:
                stack.append((dd, 0))
            if dd < m:
                stack.append((dd + 1, 0))
    return True


def _day_options(freed: Sequence[int], slot_days: Sequence[int]) -> List[tuple]:
    """Candidate meeting-day tuples for a city that takes over a visit."""
    base = tuple(freed)
    opts = [base]
    if len(freed) == 1 and len(slot_days) > 1:
        for d in slot_days:
            if (d,) != base:
                opts.append((d,))
    return opts


def _days_of(slots: Iterable[Tuple[int, int]]) -> List[int]:
    return sorted({d for d, _ in slots})


class _Ctx:
    """Shared context of one search run."""

    def __init__(self, instance: Instance, scenario: ScenarioConfig,
                 config: SearchConfig, trace: SearchTrace):
        self.instance = instance
        self.scenario = scenario
        self.config = config
        self.trace = trace
        self.model = RewardModel.for_scenario(instance, scenario)
        p = instance.params
        self.capital = p.capital_id
        self.alpha = p.max_meetings_per_day
        self.t_max = p.max_tour_minutes

    def positions(self, schedule: Schedule) -> List[Tuple[int, int, int]]:
        """Selectable visit occurrences as (day, index, city)."""
        out = []
        for t, tour in enumerate(schedule.days, start=1):
            r = tour.route
            closed = len(r) > 1 and r[0] == r[-1]
            for i, c in enumerate(r):
                if closed and i == len(r) - 1:
                    continue  # the return stop is the same visit as the wakeup
                if self.scenario.force_closed_at_capital and c == self.capital:
                    continue  # depot nodes stay put here
                out.append((t, i, c))
        return out

    def quick_reject(self, patch: Dict[int, DayTour]) -> bool:
        """Cheap per-day screens before the full feasibility check."""
        for tour in patch.values():
            if len(tour.meeting_set()) > self.alpha:
                return True
            if len(tour.distinct_cities()) > self.alpha + 1:
                return True
            if tour_duration_minutes(tour, self.instance) > self.t_max + _TOL:
                return True
        return False

    def feasible(self, state: _Eval, patch: Dict[int, DayTour]) -> bool:
        if self.quick_reject(patch):
            return False
        candidate = state.schedule.replace_days(patch)
        return not check_feasibility(candidate, self.instance, self.scenario)


def _swap_variants(ctx: _Ctx, state: _Eval, ta: int, ia: int, a: int,
                   tb: int, ib: int, b: int) -> List[Dict[int, DayTour]]:
    """All meeting-attribution variants of swapping two visits."""
    days = state.schedule.days
    work: Dict[int, List[int]] = {}
    slots_a: Set[Tuple[int, int]] = set()
    slots_b: Set[Tuple[int, int]] = set()
    if not _replace_slot(days, work, ta, ia, b, slots_a):
        return []
    if (tb, ib) in slots_a:
        return []  # the second visit vanished in the first repair
    if not _replace_slot(days, work, tb, ib, a, slots_b):
        return []
    if slots_a & slots_b:
        return []  # tangled repairs, not a clean swap

    days_a = _days_of(slots_a)  # b moves in here, a moved out
    days_b = _days_of(slots_b)  # a moves in here, b moved out
    freed_a = [d for d in days_a if a in days[d - 1].meeting_set()]
    freed_b = [d for d in days_b if b in days[d - 1].meeting_set()]

    variants = []
    for b_days in _day_options(freed_a, days_a):
        for a_days in _day_options(freed_b, days_b):
            meet: Dict[int, Set[int]] = {
                d: set(days[d - 1].meetings) for d in work}
            for d in freed_a:
                meet[d].discard(a)
            for d in freed_b:
                meet[d].discard(b)
            ok = True
            for d in b_days:
                if b in meet[d]:
                    ok = False  # b would meet twice that day
                    break
                meet[d].add(b)
            if ok:
                for d in a_days:
                    if a in meet[d]:
                        ok = False
                        break
                    meet[d].add(a)
            if not ok:
                continue
            variants.append({d: DayTour.of(work[d], sorted(meet[d]))
                             for d in work})
    return variants


def _removal_patch(days: Sequence[DayTour], t: int, i: int
                   ) -> Optional[Tuple[Dict[int, List[int]], Dict[int, Set[int]]]]:
    """Drop one interior (or final-day terminal) visit from a day."""
    r = list(days[t - 1].route)
    if len(r) <= 1:
        return None
    closed = r[0] == r[-1]
    last = len(r) - 1
    interior = 0 < i < last
    final_terminal = (i == last and not closed and t == len(days))
    if not (interior or final_terminal):
        return None
    city = r[i]
    del r[i]
    if len(r) > 1 and r[0] == r[-1] and not closed:
        return None  # an open day must not fold into a fake loop
    meet = {t: set(days[t - 1].meetings) - {city}}
    return {t: r}, meet


def _overnight_drop_variants(ctx: _Ctx, state: _Eval, t: int
                             ) -> List[Dict[int, DayTour]]:
    """Drop the visit that spans the night between days t and t+1.

    The politician then sleeps one stop earlier; the next morning starts
    there, cascading through the chain like any other boundary rewrite.
    """
    days = state.schedule.days
    if not 1 <= t < len(days):
        return []
    r = days[t - 1].route
    if len(r) < 2 or r[0] == r[-1]:
        return []  # nothing before the terminal, or a closed loop
    if ctx.scenario.force_closed_at_capital:
        return []
    c, z = r[-1], r[-2]
    work: Dict[int, List[int]] = {t: list(r[:-1])}
    slots: Set[Tuple[int, int]] = set()
    if not _replace_slot(days, work, t + 1, 0, z, slots):
        return []
    slot_days = _days_of(slots)
    freed = [d for d in slot_days if c in days[d - 1].meeting_set()]
    variants = []
    for z_days in _day_options(freed, slot_days):
        meet: Dict[int, Set[int]] = {d: set(days[d - 1].meetings)
                                     for d in work}
        meet[t].discard(c)  # the dropped visit loses its meeting too
        for d in freed:
            meet[d].discard(c)
        ok = True
        for d in z_days:
            if z in meet[d]:
                ok = False
                break
            meet[d].add(z)
        if not ok:
            continue
        variants.append({d: DayTour.of(work[d], sorted(meet[d]))
                         for d in work})
    return variants


def _insertion_points(ctx: _Ctx, days: Sequence[DayTour],
                      work: Dict[int, List[int]], skip_day: Optional[int],
                      city: int, lam: float) -> List[Tuple[float, int, int]]:
    """Admissible places to add a visit: (cost increase, day, edge index).

    Edge index e means the new city goes between positions e and e+1; an
    index equal to the route length means appending past the terminal
    (single-city days, or the final day of the campaign).
    """
    out = []
    inst = ctx.instance
    for d in range(1, len(days) + 1):
        if d == skip_day:
            continue
        r = _route_view(days, work, d)
        if city in r:
            continue  # one visit per day
        for e in range(len(r) - 1):
            j, k = r[e], r[e + 1]
            if not granular_admissible(city, j, k, lam, inst):
                continue
            inc = inst.cost(j, city) + inst.cost(city, k) - inst.cost(j, k)
            out.append((inc, d, e))
        # appending moves the overnight stop; allowed where the chain
        # stays intact or can be repaired forward
        terminal_ok = (d == len(days)) or (len(r) == 1)
        if terminal_ok and not (ctx.scenario.force_closed_at_capital):
            if not (len(r) > 1 and r[0] == r[-1]):
                inc = inst.cost(r[-1], city)
                out.append((inc, d, len(r)))
    out.sort()
    return out


def _insert_variants(ctx: _Ctx, state: _Eval, work: Dict[int, List[int]],
                     meet: Dict[int, Set[int]], d: int, e: int, city: int,
                     give_meeting: bool) -> List[Dict[int, DayTour]]:
    """Patches that add a visit of `city` to day d at edge e."""
    days = state.schedule.days
    r = _route_view(days, work, d)
    meeting_days: List[tuple]
    if e >= len(r):  # append past the terminal
        old_terminal = r[-1]
        if old_terminal == city:
            return []
        work[d] = r + [city]
        if d < len(days):
            # tomorrow wakes up in the new overnight stop
            if old_terminal in days[d].meeting_set():
                return []  # would orphan the displaced wakeup meeting
            slots: Set[Tuple[int, int]] = set()
            if not _replace_slot(days, work, d + 1, 0, city, slots):
                return []
            span = sorted({d} | {dd for dd, _ in slots})
            meeting_days = [(d,)] + [(x,) for x in span if x != d] \
                if give_meeting else [()]
        else:
            meeting_days = [(d,)] if give_meeting else [()]
    else:
        work[d] = r[:e + 1] + [city] + r[e + 1:]
        meeting_days = [(d,)] if give_meeting else [()]

    out = []
    for choice in meeting_days:
        m: Dict[int, Set[int]] = {}
        for dd in work:
            base = meet.get(dd)
            m[dd] = set(base) if base is not None \
                else set(days[dd - 1].meetings)
        ok = True
        for dd in choice:
            if city in m.get(dd, set()):
                ok = False
                break
            m.setdefault(dd, set(days[dd - 1].meetings)).add(city)
        if not ok:
            continue
        out.append({dd: DayTour.of(work[dd], sorted(m[dd])) for dd in work})
    return out


# ---------------------------------------------------------------------------
# neighbourhood scans


def _consider(ctx: _Ctx, state: _Eval, kind: str, operands: tuple,
              patches: Iterable[Dict[int, DayTour]],
              best: Optional[MoveCandidate]) -> Optional[MoveCandidate]:
    for patch in patches:
        ctx.trace.count("evaluated", kind)
        delta = state.delta(patch)
        if delta <= _TOL:
            continue
        if best is not None and delta <= best.delta_objective:
            continue
        if not ctx.feasible(state, patch):
            continue
        best = MoveCandidate(kind, operands, delta, True, patch)
    return best


def _scan_n1(ctx: _Ctx, state: _Eval) -> Optional[MoveCandidate]:
    """Swap two visits that belong to different days."""
    best = None
    pos = ctx.positions(state.schedule)
    for x in range(len(pos)):
        ta, ia, a = pos[x]
        for y in range(x + 1, len(pos)):
            tb, ib, b = pos[y]
            if tb == ta or a == b:
                continue
            variants = _swap_variants(ctx, state, ta, ia, a, tb, ib, b)
            best = _consider(ctx, state, "n1", (ta, ia, tb, ib), variants, best)
    return best


def _scan_n4(ctx: _Ctx, state: _Eval) -> Optional[MoveCandidate]:
    """Swap two visits inside one day."""
    best = None
    pos = ctx.positions(state.schedule)
    for x in range(len(pos)):
        ta, ia, a = pos[x]
        for y in range(x + 1, len(pos)):
            tb, ib, b = pos[y]
            if tb != ta or a == b:
                continue
            variants = _swap_variants(ctx, state, ta, ia, a, tb, ib, b)
            best = _consider(ctx, state, "n4", (ta, ia, tb, ib), variants, best)
    return best


def _scan_n2(ctx: _Ctx, state: _Eval) -> Optional[MoveCandidate]:
    """The cardinality neighbourhood around drop-add.

    Evaluates the classic pair (drop a visit, route the best unvisited
    city elsewhere) and each half alone, plus pure meeting toggles on
    already-visited cities. Only this neighbourhood can change how many
    visits and meetings a schedule holds.
    """
    pool = state.unrouted()
    target = pool[0] if pool else None  # highest base reward
    days = state.schedule.days
    best = None
    for t, i, city in ctx.positions(state.schedule):
        removed = _removal_patch(days, t, i)
        if removed is None:
            continue
        base_work, base_meet = removed
        drop_only = {t: DayTour.of(base_work[t], sorted(base_meet[t]))}
        best = _consider(ctx, state, "n2", (t, i, city, None, None, None),
                         [drop_only], best)
        if target is None:
            continue
        points = _insertion_points(ctx, days, base_work, t, target,
                                   ctx.config.lam)
        if not points:
            continue
        _, d, e = points[0]  # cheapest admissible position
        work = {k: list(v) for k, v in base_work.items()}
        meet = {k: set(v) for k, v in base_meet.items()}
        variants = _insert_variants(ctx, state, work, meet, d, e, target, True)
        best = _consider(ctx, state, "n2", (t, i, city, target, d, e),
                         variants, best)
    # dropping an overnight stop pulls the night one stop earlier
    for t in range(1, len(days)):
        variants = _overnight_drop_variants(ctx, state, t)
        best = _consider(ctx, state, "n2", ("night", t), variants, best)
    # adds without a paired drop; revisits of cities with meeting-cap
    # room left are as welcome as first visits
    for u in state.cap_room(ctx.scenario):
        for _, d, e in _insertion_points(ctx, days, {}, None, u,
                                         ctx.config.lam):
            variants = _insert_variants(ctx, state, {}, {}, d, e, u, True)
            best = _consider(ctx, state, "n2", (None, None, None, u, d, e),
                             variants, best)
    # meeting toggles: host in a city already on the route, or skip one
    for t, tour in enumerate(days, start=1):
        hosted = tour.meeting_set()
        for c in sorted(tour.distinct_cities()):
            if c in hosted:
                continue
            patch = {t: DayTour.of(list(tour.route), sorted(hosted | {c}))}
            best = _consider(ctx, state, "n2", ("host", t, c), [patch], best)
        for c in sorted(hosted):
            patch = {t: DayTour.of(list(tour.route), sorted(hosted - {c}))}
            best = _consider(ctx, state, "n2", ("skip", t, c), [patch], best)
    return best


def _scan_n3(ctx: _Ctx, state: _Eval) -> Optional[MoveCandidate]:
    """Exchange a routed visit for an unvisited city."""
    pool = state.unrouted()
    if not pool:
        return None
    days = state.schedule.days
    best = None
    for t, i, city in ctx.positions(state.schedule):
        route = days[t - 1].route
        if 0 < i < len(route) - 1:
            j, k = route[i - 1], route[i + 1]
        else:
            j = k = None  # boundary visits skip the filter
        for u in pool:
            if j is not None and not granular_admissible(
                    u, j, k, ctx.config.lam, ctx.instance):
                continue
            work: Dict[int, List[int]] = {}
            slots: Set[Tuple[int, int]] = set()
            if not _replace_slot(days, work, t, i, u, slots):
                continue
            slot_days = _days_of(slots)
            freed = [d for d in slot_days if city in days[d - 1].meeting_set()]
            variants = []
            for u_days in _day_options(freed, slot_days):
                meet = {d: set(days[d - 1].meetings) for d in work}
                for d in freed:
                    meet[d].discard(city)
                ok = True
                for d in u_days:
                    if u in meet[d]:
                        ok = False
                        break
                    meet[d].add(u)
                if not ok:
                    continue
                variants.append({d: DayTour.of(work[d], sorted(meet[d]))
                                 for d in work})
            best = _consider(ctx, state, "n3", (t, i, city, u), variants, best)
    return best


_SCANS = {1: _scan_n1, 2: _scan_n2, 3: _scan_n3, 4: _scan_n4}


def neighborhood(schedule: Schedule, k: int, instance: Instance,
                 scenario: ScenarioConfig, lam: float = 0.75
                 ) -> Optional[MoveCandidate]:
    """Best strictly improving move of the k-th neighbourhood, if any."""
    if k not in _SCANS:
        raise ValueError(f"neighbourhood index {k} outside 1..4")
    config = SearchConfig(lam=lam)
    ctx = _Ctx(instance, scenario, config, SearchTrace())
    model = RewardModel.for_scenario(instance, scenario)
    state = _Eval(schedule, instance, model)
    return _SCANS[k](ctx, state)


# ---------------------------------------------------------------------------
# descent and driver


def _vnd(ctx: _Ctx, schedule: Schedule) -> Tuple[Schedule, float]:
    state = _Eval(schedule, ctx.instance, ctx.model)
    k = 1
    misses = 0
    while misses < ctx.config.k_max:
        kp = ((k - 1) % 4) + 1
        cand = _SCANS[kp](ctx, state)
        if cand is None:
            misses += 1
            k += 1
            continue
        new_schedule = state.schedule.replace_days(cand.patch)
        if ctx.config.debug:
            before = net_benefit(state.schedule, ctx.model)
            after = net_benefit(new_schedule, ctx.model)
            drift = abs((after - before) - cand.delta_objective)
            if drift > 1e-9:
                raise AssertionError(
                    f"incremental delta off by {drift:g} on {cand.kind}")
        state = _Eval(new_schedule, ctx.instance, ctx.model)
        ctx.trace.count("accepted", cand.kind)
        misses = 0
        k = 1
    return state.schedule, state.objective


def vnd(schedule: Schedule, instance: Instance, scenario: ScenarioConfig,
        config: Optional[SearchConfig] = None,
        trace: Optional[SearchTrace] = None) -> Schedule:
    """Descend through the four neighbourhoods until none improves."""
    ctx = _Ctx(instance, scenario, config or SearchConfig(),
               trace if trace is not None else SearchTrace())
    out, _ = _vnd(ctx, schedule)
    return out


def _perturb_m1(ctx: _Ctx, state: _Eval, rng) -> Optional[Dict[int, DayTour]]:
    """Swap two random pairs of visits."""
    pos = ctx.positions(state.schedule)
    if len(pos) < 4:
        return None
    chosen = rng.sample(range(len(pos)), 4)
    (ta, ia, a), (tb, ib, b) = pos[chosen[0]], pos[chosen[1]]
    (tc, ic, c), (td, idx, d) = pos[chosen[2]], pos[chosen[3]]
    if a == b or c == d:
        return None
    first = _swap_variants(ctx, state, ta, ia, a, tb, ib, b)
    if not first:
        return None
    mid = state.schedule.replace_days(first[0])
    mid_state = _Eval(mid, ctx.instance, ctx.model)
    # the second pair is located again by value: repairs may have moved it
    pos2 = {(t, i): city for t, i, city in ctx.positions(mid)}
    c2 = pos2.get((tc, ic))
    d2 = pos2.get((td, idx))
    if c2 is None or d2 is None or c2 == d2:
        return None
    second = _swap_variants(ctx, mid_state, tc, ic, c2, td, idx, d2)
    if not second:
        return None
    merged = dict(first[0])
    merged.update(second[0])
    # second-pass patches were built on the intermediate schedule, so days
    # only touched by the first pass must keep their first-pass content
    for dd, tour in first[0].items():
        if dd not in second[0]:
            merged[dd] = tour
    return merged


def _perturb_m2(ctx: _Ctx, state: _Eval, rng) -> Optional[Dict[int, DayTour]]:
    """Relabel the two lowest-reward routed cities as unvisited ones."""
    pool = state.unrouted()
    if len(pool) < 2:
        return None
    capital = ctx.capital
    scored = sorted((state.chains.get(c, 0.0), c)
                    for c in state.ledger if c != capital)
    if len(scored) < 2:
        return None
    victims = [scored[0][1], scored[1][1]]
    subs = rng.sample(pool, 2)
    mapping = {victims[0]: subs[0], victims[1]: subs[1]}
    patch: Dict[int, DayTour] = {}
    for t, tour in enumerate(state.schedule.days, start=1):
        if not (set(tour.route) & mapping.keys()):
            continue
        route = [mapping.get(x, x) for x in tour.route]
        meetings = sorted(mapping.get(x, x) for x in tour.meetings)
        patch[t] = DayTour.of(route, meetings)
    return patch or None


def _perturb_m3(ctx: _Ctx, state: _Eval, rng) -> Optional[Dict[int, DayTour]]:
    """Move one random visit to its cheapest position on another day."""
    days = state.schedule.days
    pos = ctx.positions(state.schedule)
    rng.shuffle(pos)
    for t, i, city in pos:
        if i == len(days[t - 1].route) - 1 and t < len(days):
            # an overnight stop: pull the night back, resettle the city
            variants = _overnight_drop_variants(ctx, state, t)
            if not variants:
                continue
            base = variants[0]
            mid = state.schedule.replace_days(base)
            mid_state = _Eval(mid, ctx.instance, ctx.model)
            had_meeting = city in days[t - 1].meeting_set()
            points = _insertion_points(ctx, mid.days, {}, t, city,
                                       ctx.config.lam)
            if not points:
                continue
            _, d, e = points[0]
            tails = _insert_variants(ctx, mid_state, {}, {}, d, e, city,
                                     had_meeting)
            if not tails:
                continue
            merged = dict(base)
            merged.update(tails[0])
            return merged
        removed = _removal_patch(days, t, i)
        if removed is None:
            continue
        work, meet = removed
        had_meeting = city in days[t - 1].meeting_set()
        points = _insertion_points(ctx, days, work, t, city, ctx.config.lam)
        if not points:
            continue
        _, d, e = points[0]
        variants = _insert_variants(ctx, state, work, meet, d, e, city,
                                    had_meeting)
        if variants:
            return variants[0]
    return None


_PERTURBS = (_perturb_m1, _perturb_m2, _perturb_m3)


def perturb(schedule: Schedule, instance: Instance, scenario: ScenarioConfig,
            config: Optional[SearchConfig] = None, rng=None,
            attempts: int = 20) -> Schedule:
    """One random shake; deteriorating results are welcome, infeasible not.

    Falls back to the unchanged schedule when no feasible shake is found
    within the attempt budget.
    """
    if rng is None:
        raise ValueError("perturb needs an rng")
    ctx = _Ctx(instance, scenario, config or SearchConfig(), SearchTrace())
    state = _Eval(schedule, instance, ctx.model)
    for _ in range(attempts):
        op = rng.randrange(len(_PERTURBS))
        patch = _PERTURBS[op](ctx, state, rng)
        if not patch:
            continue
        if ctx.feasible(state, patch):
            return schedule.replace_days(patch)
    return schedule


def ms_ivnd(instance: Instance, scenario: ScenarioConfig,
            config: Optional[SearchConfig] = None, rng=None
            ) -> Tuple[Schedule, SearchTrace]:
    """Multi-start driver: construct, descend, shake, keep the best.

    Odd restarts seed from the deterministic constructor, even restarts
    from the stochastic one. Each restart descends, then keeps shaking and
    descending until `ell_max` consecutive shakes fail to improve it. The
    best schedule over all restarts is returned with the run trace.
    """
    if rng is None:
        raise ValueError("ms_ivnd needs an rng")
    config = config or SearchConfig()
    trace = SearchTrace()
    ctx = _Ctx(instance, scenario, config, trace)
    started = time.monotonic()

    def out_of_time() -> bool:
        return (config.time_limit is not None
                and time.monotonic() - started > config.time_limit)

    best_schedule: Optional[Schedule] = None
    best_objective = -math.inf
    escc_seed: Optional[Schedule] = None

    for it in range(1, config.iter_max + 1):
        if out_of_time():
            break
        try:
            if it % 2 == 1:
                if escc_seed is None:
                    escc_seed = escc(instance, scenario, config.constructor)
                seed_schedule = escc_seed
            else:
                seed_schedule = shrc(instance, scenario, rng)
        except ConstructionError:
            trace.constructor_failures += 1
            if best_schedule is None:
                raise
            trace.iterations.append(best_objective)
            continue
        trace.restarts += 1
        current, current_obj = _vnd(ctx, seed_schedule)
        if current_obj > best_objective + _TOL:
            best_schedule, best_objective = current, current_obj
        misses = 0
        while misses < config.ell_max:
            if out_of_time():
                break
            shaken = perturb(current, instance, scenario, config, rng)
            improved, improved_obj = _vnd(ctx, shaken)
            if improved_obj > current_obj + _TOL:
                current, current_obj = improved, improved_obj
                misses = 0
                if current_obj > best_objective + _TOL:
                    best_schedule, best_objective = current, current_obj
            else:
                misses += 1
        trace.iterations.append(best_objective)

    trace.elapsed_s = time.monotonic() - started
    if best_schedule is None:
        raise ConstructionError("no restart produced a schedule")
    return best_schedule, trace
